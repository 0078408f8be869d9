#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "consensus/graph.hpp"
#include "consensus/protocol.hpp"

// Shared generators and reference helpers for the test binaries. Random
// draws always run on an explicitly seeded engine so every failure replays.

namespace testsupport {

using consensus::Mxd;
using consensus::Vxd;
using consensus::WeightedDigraph;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

/// Arbitrary digraph with edge density p; connectivity not guaranteed.
inline WeightedDigraph<double> random_digraph(std::mt19937_64& rng, int n, double p,
                                              double w_lo = 0.5, double w_hi = 2.0) {
  std::uniform_real_distribution<double> coin(0.0, 1.0), weight(w_lo, w_hi);
  Mxd w = Mxd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng) < p) w(i, j) = weight(rng);
  return WeightedDigraph<double>(std::move(w));
}

/// Strongly connected by construction: a random full cycle plus extra edges.
inline WeightedDigraph<double> random_sc_digraph(std::mt19937_64& rng, int n,
                                                 double extra_p = 0.35) {
  std::uniform_real_distribution<double> cycle_weight(1.0, 3.0), extra_weight(0.5, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  Mxd w = Mxd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    w(order[(k + 1) % n], order[k]) = cycle_weight(rng);  // order[k+1] listens to order[k]
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && w(i, j) == 0.0 && coin(rng) < extra_p) w(i, j) = extra_weight(rng);
  return WeightedDigraph<double>(std::move(w));
}

inline Vxd random_state(std::mt19937_64& rng, Eigen::Index n, double bound) {
  std::uniform_real_distribution<double> coord(-bound, bound);
  Vxd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = coord(rng);
  return x;
}

/// Monotone protocol drawn from the families with a known positive sector
/// bound; k selects the family round-robin.
inline consensus::Protocol<double> random_monotone_protocol(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> linear_gain(0.75, 2.0), sine_gain(1.75, 3.0);
  switch (k % 3) {
    case 0: return consensus::Protocol<double>::linear(linear_gain(rng));
    case 1: return consensus::Protocol<double>::linear_plus_sine(sine_gain(rng));
    default: return consensus::Protocol<double>::piecewise_power_root();
  }
}

namespace detail {

inline double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                              double fa, double fm, double fb, double whole, double tol,
                              int depth) {
  const double m = (a + b) / 2;
  const double flm = f((a + m) / 2), frm = f((m + b) / 2);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [0, a], written here so protocol
/// antiderivatives are checked against something the library never uses.
/// The range is pre-split into nine panels before the adaptive recursion:
/// a single panel can terminate immediately when the probe points happen to
/// line up with a cubic (a piecewise response with h(0) = 0 does exactly
/// that), and the uneven pre-split breaks any such alignment.
inline double integral_reference(const std::function<double(double)>& f, double a,
                                 double tol = 1e-11) {
  if (a == 0.0) return 0.0;
  const int panels = 9;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a * k / panels, hi = a * (k + 1) / panels;
    const double flo = f(lo), fhi = f(hi), fm = f((lo + hi) / 2);
    const double whole = (hi - lo) / 6 * (flo + 4 * fm + fhi);
    total += detail::simpson_recurse(f, lo, hi, flo, fm, fhi, whole, tol / panels, 48);
  }
  return total;
}

}  // namespace testsupport
