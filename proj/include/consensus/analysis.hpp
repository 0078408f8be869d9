#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/protocol.hpp"
#include "consensus/types.hpp"

namespace consensus {

/// B = (Xi L + L^T Xi) / 2 with Xi = diag(xi): symmetric, zero row sums,
/// non-positive off-diagonal. Positive semidefinite exactly when those hold,
/// which drives the dissipation identity below.
template <class F = double>
struct BMatrix {
  Mx<F> entries;
  Eigen::Index size() const { return entries.rows(); }
};

template <class F>
BMatrix<F> b_matrix(const LeftEigenvector<F>& xi, const Laplacian<F>& lap) {
  if (xi.size() != lap.size())
    throw InvariantViolation("b_matrix: eigenvector length must match graph size");
  const Mx<F> scaled = xi.xi.asDiagonal() * lap.entries;
  Mx<F> b = (scaled + scaled.transpose()) / F(2);

  const F scale = std::max(F(1), b.cwiseAbs().maxCoeff());
  const F slack = F(1e-12) * scale;
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > slack)
    throw InvariantViolation("b_matrix: symmetry violated");
  if ((b.rowwise().sum().cwiseAbs().array() > slack).any())
    throw InvariantViolation("b_matrix: row sums must vanish");
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (i != j && b(i, j) > slack)
        throw InvariantViolation("b_matrix: off-diagonal entries must be non-positive");
  return BMatrix<F>{std::move(b)};
}

/// -y^T B y, evaluated as a plain quadratic form.
template <class F, class Derived>
F quadratic_dissipation(const BMatrix<F>& b, const Eigen::MatrixBase<Derived>& y) {
  return -y.derived().dot(b.entries * y.derived());
}

///// The same number assembled pairwise: sum over i > j of b_ij (y_i - y_j)^2.
/// Non-positive term by term since off-diagonal b_ij <= 0.
template <class F, class Derived>
F pairwise_dissipation(const BMatrix<F>& b, const Eigen::MatrixBase<Derived>& y) {
  F total = F(0);
  for (Eigen::Index i = 0; i < b.size(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const F d = y(i) - y(j);
      total += b.entries(i, j) * d * d;
    }
  return total;
}

template <class F = double>
struct DissipationValue {
  F vdot;      // pairwise route; guaranteed <= 0 up to rounding
  F residual;  // |pairwise - quadratic| agreement between the two routes
};

/// dV/dt along the flow at state x, with the cross-check residual between
/// the quadratic-form and pairwise evaluations.
template <class F>
DissipationValue<F> vdot_sos(const BMatrix<F>& b, const Protocol<F>& p, const Vx<F>& x) {
  if (x.size() != b.size())
    throw InvariantViolation("vdot_sos: state length must match matrix size");
  const Vx<F> y = map_values(p, x);
  const F pairwise = pairwise_dissipation(b, y);
  const F quadratic = quadratic_dissipation(b, y);
  using std::abs;
  return DissipationValue<F>{pairwise, abs(pairwise - quadratic)};
}

template <class F = double>
struct AnalysisReport {
  bool v_monotone = true;
  std::optional<F> first_v_violation_time;
  F max_conservation_drift = F(0);
  std::optional<F> consensus_time;    // first sample at or below the tolerance
  std::optional<F> fitted_decay_rate; // from log-disagreement regression
  F sos_residual = F(0);              // worst cross-check residual over samples
};

/// Least-squares slope of log(disagreement) over the samples with
/// disagreement in [10 * tol, initial / 2]; positive value means decay.
template <class F>
std::optional<F> fit_decay_rate(const Trajectory<F>& traj) {
  if (traj.samples.empty()) return std::nullopt;
  const F lo = F(10) * traj.consensus_tol;
  const F hi = traj.samples.front().disagreement / F(2);
  F st = F(0), sy = F(0), stt = F(0), sty = F(0);
  long m = 0;
  for (const auto& s : traj.samples) {
    if (!(s.disagreement >= lo) || !(s.disagreement <= hi)) continue;
    using std::log;
    const F y = log(s.disagreement);
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const F denom = F(m) * stt - st * st;
  if (!(denom > F(0))) return std::nullopt;
  return -(F(m) * sty - st * sy) / denom;
}

/// Certifies a recorded trajectory: Lyapunov monotonicity within a relative
/// slack of 1e-9, drift of the conserved weighted average, first consensus
/// sample, fitted decay rate, and the dissipation cross-check residual.
template <class F>
AnalysisReport<F> analyze(const Trajectory<F>& traj, const LeftEigenvector<F>& xi,
                          const Laplacian<F>& lap, const Protocol<F>& p) {
  if (traj.samples.empty())
    throw InvariantViolation("analyze: trajectory has no samples");
  const BMatrix<F> b = b_matrix(xi, lap);

  using std::abs;
  AnalysisReport<F> report;
  const F v0 = traj.front().lyapunov;
  const F v_slack = F(1e-9) * (F(1) + abs(v0));
  const F w0 = traj.front().weighted_avg;
  F v_prev = v0;
  for (const auto& s : traj.samples) {
    if (report.v_monotone && s.lyapunov > v_prev + v_slack) {
      report.v_monotone = false;
      report.first_v_violation_time = s.t;
    }
    v_prev = s.lyapunov;
    report.max_conservation_drift =
        std::max(report.max_conservation_drift, abs(s.weighted_avg - w0));
    if (!report.consensus_time && s.disagreement <= traj.consensus_tol)
      report.consensus_time = s.t;
    report.sos_residual = std::max(report.sos_residual, vdot_sos(b, p, s.x).residual);
  }
  report.fitted_decay_rate = fit_decay_rate(traj);
  return report;
}

///// Slack of the sector inequality at state x: a response with sector bound
/// alpha dissipates at least alpha^2 times the linear rate, so
/// h(x)^T B h(x) - alpha^2 x^T B x is non-negative when the bound holds.
template <class F>
F sector_slack(const BMatrix<F>& b, const Protocol<F>& p, F alpha, const Vx<F>& x) {
  const F linear = -pairwise_dissipation(b, x);  // x^T B x >= 0
  const F response = -pairwise_dissipation(b, map_values(p, x));
  return response - alpha * alpha * linear;
}

enum class RateOrdering { FirstFaster, SecondFaster, Tie };

template <class F = double>
struct RateComparison {
  RateOrdering ordering = RateOrdering::Tie;
  std::optional<F> crossing_first, crossing_second;  // first sample time at or below eps
  std::optional<F> rate_first, rate_second;
  F threshold = F(0);
};

/// Orders two trajectories by the first recorded time their disagreement
/// falls to eps. Differences within one recording interval count as a tie.
template <class F>
RateComparison<F> compare_rates(const Trajectory<F>& a, const Trajectory<F>& bt, F eps) {
  if (!(eps > F(0)))
    throw InvariantViolation("compare_rates: threshold must be positive");
  auto crossing = [eps](const Trajectory<F>& t) -> std::optional<F> {
    for (const auto& s : t.samples)
      if (s.disagreement <= eps) return s.t;
    return std::nullopt;
  };
  RateComparison<F> cmp;
  cmp.threshold = eps;
  cmp.crossing_first = crossing(a);
  cmp.crossing_second = crossing(bt);
  cmp.rate_first = fit_decay_rate(a);
  cmp.rate_second = fit_decay_rate(bt);
  if (!cmp.crossing_first && !cmp.crossing_second)
    throw Incomparable("compare_rates: neither trajectory reaches the threshold");

  using std::abs;
  const F tie_span = std::max(a.sample_interval, bt.sample_interval);
  if (cmp.crossing_first && cmp.crossing_second &&
      abs(*cmp.crossing_first - *cmp.crossing_second) < tie_span)
    cmp.ordering = RateOrdering::Tie;
  else if (cmp.crossing_first &&
           (!cmp.crossing_second || *cmp.crossing_first < *cmp.crossing_second))
    cmp.ordering = RateOrdering::FirstFaster;
  else
    cmp.ordering = RateOrdering::SecondFaster;
  return cmp;
}

}  // namespace consensus
