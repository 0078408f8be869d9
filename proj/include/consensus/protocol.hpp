#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "consensus/errors.hpp"
#include "consensus/types.hpp"

namespace consensus {

enum class ProtocolKind { Linear, LinearPlusSine, PiecewisePowerRoot, TableDefined };

namespace detail {

template <class F>
std::string kind_label(const char* fmt, F alpha) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, static_cast<double>(alpha));
  return buf;
}

template <class F>
struct LinearImpl {
  F alpha;
  F value(F w) const { return alpha * w; }
  F integral(F a) const { return alpha * a * a / F(2); }
  std::optional<F> sector() const {
    return alpha > F(0) ? std::optional<F>(alpha) : std::nullopt;
  }
  std::string label() const { return kind_label("linear:%g", alpha); }
};

template <class F>
struct LinearPlusSineImpl {
  F alpha;
  F value(F w) const {
    using std::sin;
    return alpha * w + sin(w);
  }
  F integral(F a) const {
    using std::cos;
    return alpha * a * a / F(2) + F(1) - cos(a);
  }
  // The sine contributes slopes in [-1, 1], so only alpha > 1 certifies a
  // positive lower sector bound.
  std::optional<F> sector() const {
    return alpha > F(1) ? std::optional<F>(alpha - F(1)) : std::nullopt;
  }
  std::string label() const { return kind_label("linsin:%g", alpha); }
};

// Odd response: w^2 beyond |w| = 1, sqrt(|w|) with matching sign inside.
template <class F>
struct PowerRootImpl {
  F value(F w) const {
    using std::sqrt;
    const F m = w < F(0) ? -w : w;
    const F h = m > F(1) ? m * m : sqrt(m);
    return w < F(0) ? -h : h;
  }
  F integral(F a) const {
    using std::sqrt;
    const F m = a < F(0) ? -a : a;  // odd response, even antiderivative
    if (m <= F(1)) return F(2) / F(3) * m * sqrt(m);
    return F(2) / F(3) + (m * m * m - F(1)) / F(3);
  }
  std::optional<F> sector() const { return F(0.5); }  // slope minimum, attained at |w| = 1
  std::string label() const { return "piecewise"; }
};

// Piecewise-linear interpolation through strictly increasing samples, with
// linear extrapolation at the end slopes. The antiderivative accumulates
// trapezoid areas, so no quadrature is involved.
template <class F>
struct TableImpl {
  Vx<F> w, h;
  Vx<F> slope;  // per segment
  Vx<F> cum;    // integral of the interpolant from w(0) to w(k)

  TableImpl(Vx<F> w_in, Vx<F> h_in) : w(std::move(w_in)), h(std::move(h_in)) {
    const Eigen::Index k = w.size();
    if (k != h.size() || k < 2)
      throw InvariantViolation("table protocol: need matching sample columns with at least two rows");
    if (!w.allFinite() || !h.allFinite())
      throw InvariantViolation("table protocol: samples must be finite");
    slope.resize(k - 1);
    cum.resize(k);
    cum(0) = F(0);
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      const F dw = w(i + 1) - w(i);
      const F dh = h(i + 1) - h(i);
      if (!(dw > F(0)) || !(dh > F(0)))
        throw InvariantViolation("table protocol: samples must be strictly increasing in both columns");
      slope(i) = dh / dw;
      cum(i + 1) = cum(i) + dw * (h(i) + h(i + 1)) / F(2);
    }
  }

  // Index of the segment whose linear piece governs t (clamped to the ends).
  Eigen::Index segment(F t) const {
    const F* lo = w.data();
    const F* hi = w.data() + w.size();
    const Eigen::Index pos = std::upper_bound(lo, hi, t) - lo;
    return std::clamp<Eigen::Index>(pos - 1, 0, w.size() - 2);
  }

  F value(F t) const {
    const Eigen::Index s = segment(t);
    return h(s) + slope(s) * (t - w(s));
  }

  // Signed antiderivative measured from w(0); exact for the interpolant.
  F primitive(F t) const {
    const Eigen::Index s = segment(t);
    const F d = t - w(s);
    return cum(s) + h(s) * d + slope(s) * d * d / F(2);
  }

  F integral(F a) const { return primitive(a) - primitive(F(0)); }

  std::optional<F> sector() const { return slope.minCoeff(); }

  std::string label() const {
    return kind_label("table:%gpt", static_cast<F>(w.size()));
  }
};

}  // namespace detail

/// A response nonlinearity h applied edgewise by the consensus dynamics.
/// All variants pass through the origin; monotonicity is a property to be
/// checked, not an assumption baked into the type.
template <class F = double>
class Protocol {
 public:
  static Protocol linear(F alpha) { return Protocol(detail::LinearImpl<F>{alpha}); }
  static Protocol linear_plus_sine(F alpha) {
    return Protocol(detail::LinearPlusSineImpl<F>{alpha});
  }
  static Protocol piecewise_power_root() { return Protocol(detail::PowerRootImpl<F>{}); }
  static Protocol table(Vx<F> w, Vx<F> h) {
    return Protocol(detail::TableImpl<F>(std::move(w), std::move(h)));
  }

  F operator()(F w) const {
    return std::visit([w](const auto& k) { return k.value(w); }, impl_);
  }

  /// Integral of the response from 0 to a, in closed form for every variant.
  F integral_from_zero(F a) const {
    return std::visit([a](const auto& k) { return k.integral(a); }, impl_);
  }

  /// Sector bound guaranteed by construction, when one is known.
  std::optional<F> declared_sector_bound() const {
    return std::visit([](const auto& k) { return k.sector(); }, impl_);
  }

  ProtocolKind kind() const {
    return static_cast<ProtocolKind>(impl_.index());
  }

  std::string label() const {
    return std::visit([](const auto& k) { return k.label(); }, impl_);
  }

 private:
  using Impl = std::variant<detail::LinearImpl<F>, detail::LinearPlusSineImpl<F>,
                            detail::PowerRootImpl<F>, detail::TableImpl<F>>;

  explicit Protocol(Impl impl) : impl_(std::move(impl)) {
    using std::abs;
    if (!(abs((*this)(F(0))) <= F(1e-12)))
      throw InvariantViolation("protocol: response must vanish at the origin");
  }

  Impl impl_;
};

template <class F>
struct MonotonicityWitness {
  F w_lo, w_hi;  // adjacent sample pair with non-increasing response
  F quotient;
};

template <class F = double>
struct MonotonicityReport {
  bool monotone_on_range = true;
  std::optional<MonotonicityWitness<F>> witness;  // first offending pair
  F estimated_sector_bound = std::numeric_limits<F>::infinity();  // min difference quotient
};

/// Samples difference quotients on a uniform grid over [lo, hi] refined by
/// midpoints. Certifies nothing off-grid; the estimated bound is the observed
/// minimum quotient.
template <class F>
MonotonicityReport<F> check_monotone(const Protocol<F>& p, F lo, F hi, long samples = 10000) {
  if (!(lo < hi))
    throw InvariantViolation("check_monotone: need lo < hi");
  if (samples < 2)
    throw InvariantViolation("check_monotone: need at least two samples");

  const long m = 2 * samples - 1;  // grid points plus midpoints
  const F step = (hi - lo) / F(m - 1);
  MonotonicityReport<F> report;
  F w_prev = lo;
  F h_prev = p(lo);
  for (long k = 1; k < m; ++k) {
    const F w = k == m - 1 ? hi : lo + F(k) * step;
    const F h = p(w);
    const F q = (h - h_prev) / (w - w_prev);
    report.estimated_sector_bound = std::min(report.estimated_sector_bound, q);
    if (q <= F(0) && report.monotone_on_range) {
      report.monotone_on_range = false;
      report.witness = MonotonicityWitness<F>{w_prev, w, q};
    }
    w_prev = w;
    h_prev = h;
  }
  return report;
}

/// Observed positive sector bound over [lo, hi]; throws when any sampled
/// quotient fails to be strictly positive.
template <class F>
F sector_bound(const Protocol<F>& p, F lo, F hi, long samples = 10000) {
  const auto report = check_monotone(p, lo, hi, samples);
  if (!report.monotone_on_range || !(report.estimated_sector_bound > F(0)))
    throw NonMonotone("sector_bound: sampled difference quotients are not strictly positive");
  return report.estimated_sector_bound;
}

}  // namespace consensus
