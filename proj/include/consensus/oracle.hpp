#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/protocol.hpp"
#include "consensus/types.hpp"

// Slow reference implementations used to cross-check the main code paths.
// Everything here is written in the most transparent way available, on
// purpose: transitive closure instead of component analysis, textbook
// elimination instead of a decomposition, first-order stepping instead of
// a higher-order scheme.

namespace consensus::oracle {

struct ReachabilityMatrix {
  BoolGrid reach;  // reach(i, j): information starting at j can arrive at i

  bool all_reachable() const { return reach.all(); }
};

/// Transitive closure of the positive support by repeated relaxation.
template <class F>
ReachabilityMatrix reachability(const WeightedDigraph<F>& g) {
  const auto n = g.size();
  BoolGrid r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      r(i, j) = i == j || g.weights(i, j) > F(0);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (r(i, k))
        for (Eigen::Index j = 0; j < n; ++j)
          if (r(k, j)) r(i, j) = true;
  return ReachabilityMatrix{std::move(r)};
}

/// Basis of the null space of m by full-pivot Gaussian elimination.
/// Entries below tol * max initial magnitude are treated as zero.
template <class Derived, class F = typename Derived::Scalar>
std::vector<Vx<F>> nullspace_bruteforce(const Eigen::MatrixBase<Derived>& input,
                                        F tol = F(1e-9)) {
  Mx<F> m = input;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  const F scale = std::max(F(1), m.cwiseAbs().maxCoeff());
  const F cutoff = tol * scale;

  std::vector<Eigen::Index> col_of(cols);
  for (Eigen::Index j = 0; j < cols; ++j) col_of[j] = j;

  Eigen::Index rank = 0;
  for (; rank < std::min(rows, cols); ++rank) {
    // Full pivoting: largest remaining entry.
    Eigen::Index pr = rank, pc = rank;
    F best = F(0);
    for (Eigen::Index i = rank; i < rows; ++i)
      for (Eigen::Index j = rank; j < cols; ++j) {
        const F mag = m(i, j) < F(0) ? -m(i, j) : m(i, j);
        if (mag > best) {
          best = mag;
          pr = i;
          pc = j;
        }
      }
    if (best <= cutoff) break;
    m.row(rank).swap(m.row(pr));
    m.col(rank).swap(m.col(pc));
    std::swap(col_of[rank], col_of[pc]);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == rank) continue;
      const F f = m(i, rank) / m(rank, rank);
      m.row(i) -= f * m.row(rank);
      m(i, rank) = F(0);
    }
  }

  std::vector<Vx<F>> basis;
  for (Eigen::Index free = rank; free < cols; ++free) {
    Vx<F> v = Vx<F>::Zero(cols);
    v(col_of[free]) = F(1);
    for (Eigen::Index i = 0; i < rank; ++i)
      v(col_of[i]) = -m(i, free) / m(i, i);
    v /= v.norm();
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Plain forward Euler at a fixed fine step, as an integration reference.
template <class F>
Vx<F> euler_reference(const Laplacian<F>& lap, const Protocol<F>& p, Vx<F> x, F dt_fine,
                      F t_end) {
  if (!(dt_fine > F(0)))
    throw InvariantViolation("euler_reference: step must be positive");
  if (!(t_end >= F(0)))
    throw InvariantViolation("euler_reference: horizon must be non-negative");
  const auto steps = static_cast<std::int64_t>(
      std::llround(static_cast<double>(t_end / dt_fine)));
  for (std::int64_t k = 0; k < steps; ++k) {
    x += dt_fine * derivative(lap, p, x);
    if (!x.allFinite())
      throw NonFiniteState("euler_reference: non-finite state component");
  }
  return x;
}

}  // namespace consensus::oracle
