#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "soccp/lp.hpp"
#include "soccp/sampling.hpp"

using namespace soccp;

namespace {

Vec make(std::initializer_list<double> vals) {
  Vec v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("equality system") {
  LpFeasibility lp(2);
  lp.add_eq(make({1, 1}), 2);
  lp.add_eq(make({1, -1}), 0);
  auto r = lp.solve();
  REQUIRE(r.feasible);
  CHECK(r.point(0) == doctest::Approx(1));
  CHECK(r.point(1) == doctest::Approx(1));
}

TEST_CASE("infeasible equalities") {
  LpFeasibility lp(2);
  lp.add_eq(make({1, 1}), 2);
  lp.add_eq(make({1, 1}), 3);
  CHECK_FALSE(lp.solve().feasible);
}

TEST_CASE("inequalities with negative rhs") {
  LpFeasibility lp(2);
  lp.add_ineq(make({1, 0}), -1);   // x <= -1
  lp.add_ineq(make({-1, 0}), 5);   // x >= -5
  lp.add_eq(make({0, 1}), 3);
  auto r = lp.solve();
  REQUIRE(r.feasible);
  CHECK(r.point(0) <= -1 + 1e-9);
  CHECK(r.point(1) == doctest::Approx(3));
}

TEST_CASE("cone slice: nonzero element detection") {
  // cone {x : x1 + x2 = 0, x1 <= 0} contains nonzeros; slices at x_j = +/-1
  LpFeasibility base(2);
  auto run = [&](int j, double s) {
    LpFeasibility lp(2);
    lp.add_eq(make({1, 1}), 0);
    lp.add_ineq(make({1, 0}), 0);
    lp.fix_var(j, s);
    return lp.solve().feasible;
  };
  CHECK_FALSE(run(0, 1.0));
  CHECK(run(0, -1.0));
  CHECK(run(1, 1.0));
  CHECK_FALSE(run(1, -1.0));
}

TEST_CASE("trivial cone: only zero") {
  for (int j = 0; j < 2; ++j) {
    for (double s : {1.0, -1.0}) {
      LpFeasibility lp(2);
      lp.add_ineq(make({1, 0}), 0);
      lp.add_ineq(make({-1, 0}), 0);
      lp.add_ineq(make({0, 1}), 0);
      lp.add_ineq(make({0, -1}), 0);
      lp.fix_var(j, s);
      CHECK_FALSE(lp.solve().feasible);
    }
  }
}

TEST_CASE("degenerate rows and duplicates") {
  LpFeasibility lp(3);
  lp.add_eq(make({0, 0, 0}), 0);
  lp.add_eq(make({1, 2, 3}), 6);
  lp.add_eq(make({1, 2, 3}), 6);
  lp.add_ineq(make({0, 0, 0}), 0);
  auto r = lp.solve();
  REQUIRE(r.feasible);
  CHECK(make({1, 2, 3}).dot(r.point) == doctest::Approx(6));

  LpFeasibility bad(3);
  bad.add_eq(make({0, 0, 0}), 1);
  CHECK_FALSE(bad.solve().feasible);
}

TEST_CASE("random feasible systems round-trip") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + static_cast<int>(rng.next() % 5);
    int me = 1 + static_cast<int>(rng.next() % 3);
    int mi = static_cast<int>(rng.next() % 4);
    Vec x0 = rng.gauss_vec(n);
    LpFeasibility lp(n);
    for (int i = 0; i < me; ++i) {
      Vec row = rng.gauss_vec(n);
      lp.add_eq(row, row.dot(x0));
    }
    for (int i = 0; i < mi; ++i) {
      Vec row = rng.gauss_vec(n);
      lp.add_ineq(row, row.dot(x0) + std::abs(rng.gauss()));
    }
    auto r = lp.solve();
    CHECK(r.feasible);
  }
}

TEST_CASE("random infeasible sandwiches") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.next() % 4);
    Vec row = rng.gauss_vec(n);
    LpFeasibility lp(n);
    lp.add_ineq(row, -1.0);        // row.x <= -1
    lp.add_ineq(Vec(-row), -1.0);  // row.x >= 1
    CHECK_FALSE(lp.solve().feasible);
  }
}
