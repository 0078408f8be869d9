#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "consensus/oracle.hpp"
#include "support.hpp"

using namespace consensus;
using testsupport::make_rng;

namespace {

WeightedDigraph<double> ring_with_chord() {
  Mxd a(3, 3);
  a << 0, 1, 1,
       0, 0, 1,
       1, 0, 0;
  return WeightedDigraph<double>(a);
}

}  // namespace

TEST_CASE("reachability closure on the three-node ring with chord") {
  const auto r = oracle::reachability(ring_with_chord());
  // Every pair connects: enumerating paths by hand gives the full closure.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(r.reach(i, j));
  CHECK(r.all_reachable());
}

TEST_CASE("reachability on a two-node chain is one-directional") {
  Mxd a = Mxd::Zero(2, 2);
  a(0, 1) = 1.0;  // node 0 listens to node 1, so information flows 1 -> 0
  const auto r = oracle::reachability(WeightedDigraph<double>(a));
  CHECK(r.reach(0, 0));
  CHECK(r.reach(1, 1));
  CHECK(r.reach(0, 1));
  CHECK_FALSE(r.reach(1, 0));
  CHECK_FALSE(r.all_reachable());
}

TEST_CASE("reachability keeps disjoint cycles separate") {
  Mxd a = Mxd::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 1.0;
  const auto r = oracle::reachability(WeightedDigraph<double>(a));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(r.reach(i, j) == (i / 2 == j / 2));
}

TEST_CASE("reachability on a directed four-cycle is complete") {
  Mxd a = Mxd::Zero(4, 4);
  for (int k = 0; k < 4; ++k) a((k + 1) % 4, k) = 0.5;
  CHECK(oracle::reachability(WeightedDigraph<double>(a)).all_reachable());
}

TEST_CASE("nullspace of the zero matrix is everything") {
  const auto basis = oracle::nullspace_bruteforce(Mxd::Zero(2, 2));
  REQUIRE(basis.size() == 2);
  for (const auto& v : basis) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("nullspace of the identity is trivial") {
  CHECK(oracle::nullspace_bruteforce(Mxd::Identity(3, 3).eval()).empty());
}

TEST_CASE("nullspace of the all-ones 2x2 matrix") {
  Mxd m(2, 2);
  m << 1, 1,
       1, 1;
  const auto basis = oracle::nullspace_bruteforce(m);
  REQUIRE(basis.size() == 1);
  const Vxd& v = basis[0];
  CHECK(std::abs(v(0) + v(1)) <= 1e-14);            // direction (1, -1)
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("nullspace directions of the ring-with-chord balance matrix") {
  Mxd lap(3, 3);
  lap << 2, -1, -1,
         0, 1, -1,
        -1, 0, 1;

  // Right null space is the agreement line.
  const auto right = oracle::nullspace_bruteforce(lap);
  REQUIRE(right.size() == 1);
  const Vxd ones = Vxd::Ones(3) / std::sqrt(3.0);
  CHECK(std::abs(right[0].dot(ones)) == doctest::Approx(1.0).epsilon(1e-12));

  // Left null space must line up with the weight vector (1, 1, 2).
  const Mxd lt = lap.transpose();
  const auto left = oracle::nullspace_bruteforce(lt);
  REQUIRE(left.size() == 1);
  Vxd expected(3);
  expected << 1, 1, 2;
  expected /= expected.norm();
  CHECK(std::abs(left[0].dot(expected)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nullspace dimension matches construction on random low-rank matrices") {
  auto rng = make_rng(701);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const int rank = trial % n;
    Mxd m = Mxd::Zero(n, n);
    for (int r = 0; r < rank; ++r) {
      Vxd u(n), v(n);
      for (int i = 0; i < n; ++i) {
        u(i) = entry(rng);
        v(i) = entry(rng);
      }
      m += u * v.transpose();
    }
    const auto basis = oracle::nullspace_bruteforce(m);
    CHECK(basis.size() == static_cast<size_t>(n - rank));
    for (const auto& v : basis)
      CHECK((m * v).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("euler reference advances one hand-checked step") {
  const Laplacian<double> lap = build_laplacian(ring_with_chord());
  const auto p = Protocol<double>::linear(1.0);
  Vxd x0(3);
  x0 << 1, 2, 3;
  // dx/dt at x0 is (3, 1, -2); one step of 0.1 lands exactly here.
  const Vxd x1 = oracle::euler_reference(lap, p, x0, 0.1, 0.1);
  CHECK(x1(0) == 1.3);
  CHECK(x1(1) == 2.1);
  CHECK(x1(2) == 2.8);
}

TEST_CASE("euler reference with zero horizon returns the start") {
  const Laplacian<double> lap = build_laplacian(ring_with_chord());
  const auto p = Protocol<double>::piecewise_power_root();
  Vxd x0(3);
  x0 << -0.4, 4, 0.8;
  CHECK((oracle::euler_reference(lap, p, x0, 1e-3, 0.0) - x0).norm() == 0.0);
}

TEST_CASE("euler reference rejects bad arguments and overflow") {
  const Laplacian<double> lap = build_laplacian(ring_with_chord());
  const auto p = Protocol<double>::linear(1.0);
  Vxd x0(3);
  x0 << 1, 2, 3;
  CHECK_THROWS_AS(oracle::euler_reference(lap, p, x0, 0.0, 1.0), InvariantViolation);
  CHECK_THROWS_AS(oracle::euler_reference(lap, p, x0, 1e-3, -1.0), InvariantViolation);
  // A wildly unstable step size doubles the state until it leaves the floats.
  CHECK_THROWS_AS(oracle::euler_reference(lap, p, x0, 1e6, 1e9), NonFiniteState);
}
