#pragma once

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "consensus/errors.hpp"
#include "consensus/types.hpp"

namespace consensus {

// Edge conventions: weights(i, j) > 0 means node i listens to node j, so
// information flows j -> i. "Listening orientation" below means the arc
// i -> j drawn from listener to source; reachability statements are phrased
// in flow orientation unless noted.

template <class F = double>
struct WeightedDigraph {
  Mx<F> weights;  // weights(i, j) = a_ij >= 0, zero diagonal

  WeightedDigraph() = default;
  explicit WeightedDigraph(Mx<F> w) : weights(std::move(w)) { validate(); }

  Eigen::Index size() const { return weights.rows(); }

  void validate() const {
    if (weights.rows() != weights.cols() || weights.rows() < 1)
      throw InvariantViolation("digraph: weight matrix must be square and non-empty");
    if (!weights.allFinite())
      throw InvariantViolation("digraph: weights must be finite");
    if ((weights.array() < F(0)).any())
      throw InvariantViolation("digraph: weights must be non-negative");
    if ((weights.diagonal().array() != F(0)).any())
      throw InvariantViolation("digraph: self-loop weights must be zero");
  }
};

template <class F = double>
struct Laplacian {
  Mx<F> entries;  // diag(row sums of A) - A

  Laplacian() = default;
  explicit Laplacian(Mx<F> m) : entries(std::move(m)) { validate(); }

  Eigen::Index size() const { return entries.rows(); }

  void validate() const {
    if (entries.rows() != entries.cols() || entries.rows() < 1)
      throw InvariantViolation("laplacian: matrix must be square and non-empty");
    if (!entries.allFinite())
      throw InvariantViolation("laplacian: entries must be finite");
    const auto n = entries.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (entries(i, i) < F(0))
        throw InvariantViolation("laplacian: diagonal entries must be non-negative");
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && entries(i, j) > F(0))
          throw InvariantViolation("laplacian: off-diagonal entries must be non-positive");
    }
    // Row sums vanish up to the rounding accumulated while forming them.
    const F scale = std::max(F(1), entries.cwiseAbs().maxCoeff());
    const F slack = F(4096) * std::numeric_limits<F>::epsilon() * scale;
    if ((entries.rowwise().sum().cwiseAbs().array() > slack).any())
      throw InvariantViolation("laplacian: row sums must vanish");
  }
};

template <class F = double>
struct LeftEigenvector {
  Vx<F> xi;  // positive entries, sums to one
  F tol = F(1e-9);

  Eigen::Index size() const { return xi.size(); }
};

struct ConnectivityReport {
  bool strongly_connected = false;
  bool has_spanning_tree = false;        // some root reaches every node in flow orientation
  std::vector<int> root_candidates;      // ascending; empty when no spanning tree exists
  int scc_count = 0;
};

/// L = D - A with D the diagonal of row sums of the weight matrix.
template <class F>
Laplacian<F> build_laplacian(const WeightedDigraph<F>& g) {
  Mx<F> m = -g.weights;
  m.diagonal() = g.weights.rowwise().sum();
  return Laplacian<F>{std::move(m)};
}

namespace detail {

// Tarjan's strongly connected components over the positive support of the
// weight matrix, traversed in listening orientation (i -> j when a_ij > 0).
// SCCs agree between the two orientations, so the choice only matters when
// we later classify components as sinks or sources.
template <class F>
class SccFinder {
 public:
  explicit SccFinder(const Mx<F>& w) : w_(w), n_(static_cast<int>(w.rows())) {
    index_.assign(n_, -1);
    low_.assign(n_, 0);
    on_stack_.assign(n_, false);
    comp_.assign(n_, -1);
    for (int v = 0; v < n_; ++v)
      if (index_[v] < 0) visit(v);
  }

  int count() const { return count_; }
  const std::vector<int>& component() const { return comp_; }

 private:
  void visit(int v) {
    index_[v] = low_[v] = next_index_++;
    stack_.push_back(v);
    on_stack_[v] = true;
    for (int u = 0; u < n_; ++u) {
      if (w_(v, u) <= F(0)) continue;
      if (index_[u] < 0) {
        visit(u);
        low_[v] = std::min(low_[v], low_[u]);
      } else if (on_stack_[u]) {
        low_[v] = std::min(low_[v], index_[u]);
      }
    }
    if (low_[v] == index_[v]) {
      for (;;) {
        const int u = stack_.back();
        stack_.pop_back();
        on_stack_[u] = false;
        comp_[u] = count_;
        if (u == v) break;
      }
      ++count_;
    }
  }

  const Mx<F>& w_;
  int n_;
  int next_index_ = 0;
  int count_ = 0;
  std::vector<int> index_, low_, comp_;
  std::vector<char> on_stack_;
  std::vector<int> stack_;
};

}  // namespace detail

/// Strong connectivity and spanning-tree structure of the positive support.
///
/// A node r roots a spanning tree when every node can be reached from r in
/// flow orientation, i.e. every node reaches r in listening orientation.
/// Such roots exist iff the SCC condensation has exactly one sink component
/// (in listening orientation), and they are exactly that component's members.
template <class F>
ConnectivityReport connectivity(const WeightedDigraph<F>& g) {
  const detail::SccFinder<F> scc(g.weights);
  const int n = static_cast<int>(g.size());
  const auto& comp = scc.component();

  std::vector<char> has_out_edge(scc.count(), 0);  // cross-component, listening orientation
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (g.weights(i, j) > F(0) && comp[i] != comp[j]) has_out_edge[comp[i]] = 1;

  int sink = -1, sink_count = 0;
  for (int c = 0; c < scc.count(); ++c)
    if (!has_out_edge[c]) {
      sink = c;
      ++sink_count;
    }

  ConnectivityReport report;
  report.scc_count = scc.count();
  report.strongly_connected = scc.count() == 1;
  report.has_spanning_tree = sink_count == 1;
  if (report.has_spanning_tree)
    for (int i = 0; i < n; ++i)
      if (comp[i] == sink) report.root_candidates.push_back(i);
  return report;
}

/// Number of singular values of m at or below tol * max row sum norm.
template <class F>
Eigen::Index rank_defect(const Mx<F>& m, F tol = F(1e-9)) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InvariantViolation("rank_defect: matrix must be square and non-empty");
  const F scale = m.cwiseAbs().rowwise().sum().maxCoeff();
  if (scale == F(0)) return m.rows();
  const Eigen::JacobiSVD<Mx<F>> svd(m);
  const Eigen::Index rank = (svd.singularValues().array() > tol * scale).count();
  return m.rows() - rank;
}

template <class F>
Eigen::Index rank_defect(const Laplacian<F>& lap, F tol = F(1e-9)) {
  return rank_defect(lap.entries, tol);
}

/// Normalized positive left null vector of L: xi^T L = 0, sum xi = 1.
///
/// Solves L^T xi = 0 with the last balance equation replaced by the
/// normalization row 1^T xi = 1. For a strongly connected graph this system
/// is nonsingular: any vector it maps to zero lies in the one-dimensional
/// null space of L^T and has zero entry sum, hence vanishes.
template <class F>
LeftEigenvector<F> left_eigenvector(const Laplacian<F>& lap, F tol = F(1e-9)) {
  const Eigen::Index n = lap.size();
  Mx<F> support = -lap.entries;
  support.diagonal().setZero();
  if (!connectivity(WeightedDigraph<F>{std::move(support)}).strongly_connected)
    throw NotStronglyConnected("left_eigenvector: graph is not strongly connected");
  if (rank_defect(lap, tol) != 1)
    throw DegenerateNullspace("left_eigenvector: null space of L^T is not one-dimensional");

  Mx<F> sys = lap.entries.transpose();
  sys.row(n - 1).setOnes();
  Vx<F> rhs = Vx<F>::Zero(n);
  rhs(n - 1) = F(1);
  Vx<F> xi = sys.partialPivLu().solve(rhs);
  xi /= xi.sum();

  const F scale = std::max(F(1), lap.entries.cwiseAbs().rowwise().sum().maxCoeff());
  const F residual = (lap.entries.transpose() * xi).cwiseAbs().maxCoeff();
  if (!(residual <= tol * scale))
    throw DegenerateNullspace("left_eigenvector: residual of L^T xi exceeds tolerance");
  if (!(xi.array() > tol).all())
    throw NonPositiveEntry("left_eigenvector: entry at or below tolerance");
  return LeftEigenvector<F>{std::move(xi), tol};
}

template <class F>
LeftEigenvector<F> left_eigenvector(const WeightedDigraph<F>& g, F tol = F(1e-9)) {
  return left_eigenvector(build_laplacian(g), tol);
}

}  // namespace consensus
