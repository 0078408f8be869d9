#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "consensus/graph.hpp"
#include "consensus/protocol.hpp"
#include "consensus/types.hpp"

namespace consensus {

enum class Integrator { RK4, Euler };
enum class Termination { ConsensusReached, TimeLimit, Divergence };

template <class F = double>
struct SimulationConfig {
  F dt = F(1e-3);
  F t_max = F(50);
  F consensus_tol = F(1e-6);
  long record_every = 10;  // steps between retained samples
  Integrator integrator = Integrator::RK4;

  void validate() const {
    if (!(dt > F(0)) || !std::isfinite(static_cast<double>(dt)))
      throw InvariantViolation("simulation config: dt must be positive and finite");
    if (!(t_max >= dt))
      throw InvariantViolation("simulation config: t_max must be at least dt");
    if (!(consensus_tol > F(0)))
      throw InvariantViolation("simulation config: consensus tolerance must be positive");
    if (record_every < 1)
      throw InvariantViolation("simulation config: record_every must be at least 1");
  }
};

template <class F = double>
struct State {
  F t = F(0);
  Vx<F> x;
};

template <class F = double>
struct Sample {
  F t;
  Vx<F> x;
  F lyapunov;      // NaN when no left eigenvector is available
  F weighted_avg;  // xi^T x, NaN likewise
  F disagreement;  // max(x) - min(x)
};

template <class F = double>
struct Trajectory {
  std::vector<Sample<F>> samples;
  Termination terminated_by = Termination::TimeLimit;
  std::optional<F> decision_value;  // mean of final state, set on consensus
  F consensus_tol = F(1e-6);
  F sample_interval = F(0);  // dt * record_every

  const Sample<F>& front() const { return samples.front(); }
  const Sample<F>& back() const { return samples.back(); }
};

/// Response values h(x_i), stacked.
template <class F, class Derived>
Vx<F> map_values(const Protocol<F>& p, const Eigen::MatrixBase<Derived>& x) {
  return x.derived().unaryExpr([&p](F w) { return p(w); });
}

/// Right-hand side of the flow: dx/dt = -L h(x).
template <class F, class Derived>
Vx<F> derivative(const Laplacian<F>& lap, const Protocol<F>& p,
                 const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != lap.size())
    throw InvariantViolation("derivative: state length must match graph size");
  return -(lap.entries * map_values(p, x));
}

template <class Derived>
typename Derived::Scalar disagreement(const Eigen::MatrixBase<Derived>& x) {
  return x.maxCoeff() - x.minCoeff();
}

/// xi^T x; invariant along the flow for the matching left eigenvector.
template <class F, class Derived>
F weighted_average(const LeftEigenvector<F>& xi, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != xi.size())
    throw InvariantViolation("weighted_average: state length must match eigenvector");
  return xi.xi.dot(x);
}

/// V(x) = sum_i xi_i * integral of h from 0 to x_i. Decays along solutions
/// whenever the scaled symmetrized Laplacian is positive semidefinite on the
/// response differences, which holds for any response on these graphs.
template <class F, class Derived>
F lyapunov(const LeftEigenvector<F>& xi, const Protocol<F>& p,
           const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != xi.size())
    throw InvariantViolation("lyapunov: state length must match eigenvector");
  const Vx<F> integrals =
      x.derived().unaryExpr([&p](F a) { return p.integral_from_zero(a); });
  return xi.xi.dot(integrals);
}

namespace detail {

template <class F>
Vx<F> euler_advance(const Laplacian<F>& lap, const Protocol<F>& p, const Vx<F>& x, F dt) {
  return x + dt * derivative(lap, p, x);
}

template <class F>
Vx<F> rk4_advance(const Laplacian<F>& lap, const Protocol<F>& p, const Vx<F>& x, F dt) {
  const Vx<F> k1 = derivative(lap, p, x);
  const Vx<F> k2 = derivative(lap, p, x + (dt / F(2)) * k1);
  const Vx<F> k3 = derivative(lap, p, x + (dt / F(2)) * k2);
  const Vx<F> k4 = derivative(lap, p, x + dt * k3);
  return x + (dt / F(6)) * (k1 + F(2) * k2 + F(2) * k3 + k4);
}

template <class F>
Vx<F> advance(const Laplacian<F>& lap, const Protocol<F>& p, const Vx<F>& x, F dt,
              Integrator method) {
  return method == Integrator::RK4 ? rk4_advance(lap, p, x, dt)
                                   : euler_advance(lap, p, x, dt);
}

}  // namespace detail

/// One fixed-step update. Throws NonFiniteState if the update leaves the
/// finite floats.
template <class F>
State<F> step(const Laplacian<F>& lap, const Protocol<F>& p, const State<F>& s, F dt,
              Integrator method = Integrator::RK4) {
  if (!(dt > F(0)))
    throw InvariantViolation("step: dt must be positive");
  State<F> next{s.t + dt, detail::advance(lap, p, s.x, dt, method)};
  if (!next.x.allFinite())
    throw NonFiniteState("step: non-finite state component");
  return next;
}

/// Integrates until consensus, the time limit, or a divergence guard at
/// 1e6 * (1 + max |x0|). In certified mode the graph must be strongly
/// connected; otherwise Lyapunov and weighted-average columns may be NaN.
template <class F>
Trajectory<F> simulate(const WeightedDigraph<F>& g, const Protocol<F>& p, const Vx<F>& x0,
                       const SimulationConfig<F>& cfg = {}, bool certified = true) {
  cfg.validate();
  if (x0.size() != g.size())
    throw InvariantViolation("simulate: initial state length must match graph size");
  if (!x0.allFinite())
    throw InvariantViolation("simulate: initial state must be finite");

  const Laplacian<F> lap = build_laplacian(g);
  std::optional<LeftEigenvector<F>> xi;
  if (connectivity(g).strongly_connected)
    xi = left_eigenvector(lap);
  else if (certified)
    throw NotStronglyConnected("simulate: graph is not strongly connected");

  Trajectory<F> traj;
  traj.consensus_tol = cfg.consensus_tol;
  traj.sample_interval = cfg.dt * F(cfg.record_every);

  constexpr F nan = std::numeric_limits<F>::quiet_NaN();
  auto record = [&](F t, const Vx<F>& x) {
    traj.samples.push_back({t, x,
                            xi ? lyapunov(*xi, p, x) : nan,
                            xi ? weighted_average(*xi, x) : nan,
                            disagreement(x)});
  };

  const F guard = F(1e6) * (F(1) + x0.cwiseAbs().maxCoeff());
  const auto total_steps =
      static_cast<std::int64_t>(std::ceil(static_cast<double>(cfg.t_max / cfg.dt) - 1e-9));
  Vx<F> x = x0;
  std::int64_t recorded_at = -1;
  for (std::int64_t k = 0;; ++k) {
    const F t = F(k) * cfg.dt;
    if (k % cfg.record_every == 0) {
      record(t, x);
      recorded_at = k;
    }
    if (disagreement(x) <= cfg.consensus_tol) {
      if (recorded_at != k) record(t, x);
      traj.terminated_by = Termination::ConsensusReached;
      traj.decision_value = x.mean();
      return traj;
    }
    if (k >= total_steps) {
      if (recorded_at != k) record(t, x);
      traj.terminated_by = Termination::TimeLimit;
      return traj;
    }
    x = detail::advance(lap, p, x, cfg.dt, cfg.integrator);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > guard) {
      record(F(k + 1) * cfg.dt, x);
      traj.terminated_by = Termination::Divergence;
      return traj;
    }
  }
}

}  // namespace consensus
