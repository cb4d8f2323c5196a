#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "soccp/comp_set.hpp"
#include "soccp/sampling.hpp"

using namespace soccp;

namespace {

Vec make(std::initializer_list<double> vals) {
  Vec v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

Vec zero(int m) { return Vec::Zero(m); }

struct PairGen {
  Vec x, y;
  CompCase tag;
};

// Draws an exact member of Omega in the requested case (margins ~O(1)).
PairGen gen_pair(CompCase tag, int m, SplitMix64& rng) {
  PairGen g;
  g.tag = tag;
  switch (tag) {
    case CompCase::XZeroYInt: {
      Vec y = rng.gauss_vec(m);
      y(0) = tail_norm(y) + 0.3 + std::abs(rng.gauss());
      g.x = zero(m);
      g.y = y;
      return g;
    }
    case CompCase::XIntYZero: {
      auto s = gen_pair(CompCase::XZeroYInt, m, rng);
      g.x = s.y;
      g.y = s.x;
      return g;
    }
    case CompCase::BothBoundary: {
      REQUIRE(m >= 2);
      Vec x = rng.gauss_vec(m);
      while (tail_norm(x) < 0.3) x = rng.gauss_vec(m);
      x(0) = tail_norm(x);
      double k = 0.2 + 2.0 * rng.uniform();
      g.x = x;
      g.y = k * reflect(x);
      return g;
    }
    case CompCase::XBoundaryYZero: {
      REQUIRE(m >= 2);
      Vec x = rng.gauss_vec(m);
      while (tail_norm(x) < 0.3) x = rng.gauss_vec(m);
      x(0) = tail_norm(x);
      g.x = x;
      g.y = zero(m);
      return g;
    }
    case CompCase::XZeroYBoundary: {
      auto s = gen_pair(CompCase::XBoundaryYZero, m, rng);
      g.x = s.y;
      g.y = s.x;
      return g;
    }
    case CompCase::BothZero:
      g.x = zero(m);
      g.y = zero(m);
      return g;
  }
  return g;
}

// Draws a tangent direction of Omega at (x, y) from the case formulas.
std::pair<Vec, Vec> gen_tangent(const PairGen& g, SplitMix64& rng) {
  int m = static_cast<int>(g.x.size());
  switch (g.tag) {
    case CompCase::XZeroYInt:
      return {zero(m), rng.gauss_vec(m)};
    case CompCase::XIntYZero:
      return {rng.gauss_vec(m), zero(m)};
    case CompCase::BothBoundary: {
      Vec d = rng.gauss_vec(m);
      Vec x2bar = g.x.tail(m - 1) / tail_norm(g.x);
      d(0) = x2bar.dot(d.tail(m - 1));
      double k = g.y(0) / g.x(0);
      double kappa = rng.gauss();
      Vec w = kappa * reflect(g.x) + k * reflect(d);
      return {d, w};
    }
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(g.x);
      if (rng.uniform() < 0.5) {
        // d in T_K(x), w = 0
        Vec d = rng.gauss_vec(m);
        double ip = d.dot(xh);
        if (ip < 0) d -= (ip / xh.squaredNorm()) * xh * (1.0 + rng.uniform());
        return {d, zero(m)};
      }
      Vec d = rng.gauss_vec(m);
      d -= (d.dot(xh) / xh.squaredNorm()) * xh;  // d perp xhat
      Vec w = std::abs(rng.gauss()) * xh;
      return {d, w};
    }
    case CompCase::XZeroYBoundary: {
      PairGen flip{g.y, g.x, CompCase::XBoundaryYZero};
      auto [w, d] = gen_tangent(flip, rng);
      return {d, w};
    }
    case CompCase::BothZero: {
      double pick = rng.uniform();
      if (pick < 0.25) {
        Vec d = rng.gauss_vec(m);
        d(0) = tail_norm(d) + std::abs(rng.gauss());
        return {d, zero(m)};
      }
      if (pick < 0.5) {
        Vec w = rng.gauss_vec(m);
        w(0) = tail_norm(w) + std::abs(rng.gauss());
        return {zero(m), w};
      }
      if (pick < 0.75 && m >= 2) {
        Vec d = rng.gauss_vec(m);
        while (tail_norm(d) < 0.3) d = rng.gauss_vec(m);
        d(0) = tail_norm(d);
        return {d, Vec(std::abs(rng.gauss()) * reflect(d))};
      }
      if (m == 1 && pick < 0.75) {
        Vec d(1);
        d << std::abs(rng.gauss());
        return {d, zero(1)};
      }
      return {zero(m), zero(m)};
    }
  }
  return {zero(m), zero(m)};
}

// m = 2 tangent membership written from the simplified two-dimensional
// case list (drops the R x alignment condition at boundary pairs).
bool tangent_m2_specialized(const Vec& x, const Vec& y, const Vec& d, const Vec& w,
                            double tol = kDefaultTol) {
  auto cls = classify_pair(x, y, tol);
  double sd = rel_scale(tol, d.norm());
  double sw = rel_scale(tol, w.norm());
  switch (cls.tag) {
    case CompCase::XZeroYInt:
      return d.norm() <= sd;
    case CompCase::XIntYZero:
      return w.norm() <= sw;
    case CompCase::BothBoundary:
      return std::abs(d.dot(y)) <= rel_scale(tol, d.norm() * y.norm()) &&
             std::abs(w.dot(x)) <= rel_scale(tol, w.norm() * x.norm());
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      if (d.norm() <= sd && yh.dot(w) >= -rel_scale(tol, w.norm() * y.norm()))
        return true;
      return (d.norm() <= sd || is_nonneg_multiple(d, yh, tol)) &&
             std::abs(w.dot(yh)) <= rel_scale(tol, w.norm() * y.norm());
    }
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      if (w.norm() <= sw && xh.dot(d) >= -rel_scale(tol, d.norm() * x.norm()))
        return true;
      return std::abs(d.dot(xh)) <= rel_scale(tol, d.norm() * x.norm()) &&
             (w.norm() <= sw || is_nonneg_multiple(w, xh, tol));
    }
    case CompCase::BothZero:
      return in_omega(d, w, tol);
  }
  return false;
}

const CompCase kAllCases[] = {CompCase::XZeroYInt,      CompCase::XIntYZero,
                              CompCase::BothBoundary,   CompCase::XBoundaryYZero,
                              CompCase::XZeroYBoundary, CompCase::BothZero};

bool case_valid(CompCase c, int m) {
  if (m >= 2) return true;
  return c == CompCase::XZeroYInt || c == CompCase::XIntYZero ||
         c == CompCase::BothZero;
}

}  // namespace

TEST_CASE("omega membership") {
  CHECK(in_omega(make({1, 1, 0}), make({2, -2, 0})));
  CHECK(in_omega(make({1, 0, 0}), make({0, 0, 0})));
  CHECK_FALSE(in_omega(make({1, 1, 0}), make({1, 1, 0})));
  CHECK_THROWS_AS(in_omega(make({1, 0}), make({1, 0, 0})), DimensionError);
}

TEST_CASE("pair classification") {
  CHECK(classify_pair(zero(3), make({1, 0, 0})).tag == CompCase::XZeroYInt);
  auto bb = classify_pair(make({1, 1, 0}), make({2, -2, 0}));
  CHECK(bb.tag == CompCase::BothBoundary);
  CHECK(*bb.k_ratio == doctest::Approx(2));
  CHECK(classify_pair(zero(3), zero(3)).tag == CompCase::BothZero);
  Vec xs(1), ys(1);
  xs << 0.4;
  ys << 0.0;
  CHECK(classify_pair(xs, ys).tag == CompCase::XIntYZero);
  CHECK_THROWS_AS(classify_pair(make({1, 1, 0}), make({1, 1, 0})), NotInOmegaError);
}

TEST_CASE("tangent cone: frozen examples") {
  // at the origin the tangent cone is Omega itself
  CHECK(tangent_contains(zero(3), zero(3), make({1, 1, 0}), make({1, -1, 0})));
  CHECK(tangent_contains(zero(3), zero(3), zero(3), zero(3)));
  // x = 0, y boundary: d in R+ yhat, w perp yhat
  CHECK(tangent_contains(zero(3), make({1, 1, 0}), make({1, -1, 0}), make({0, 0, 5})));
  // x = 0, y interior: requires d = 0
  CHECK_FALSE(tangent_contains(zero(3), make({1, 0, 0}), make({1, 0, 0}), make({0.2, 1, 7})));
  // x interior, y = 0: any d with w = 0
  CHECK(tangent_contains(make({2, 1, 0}), zero(3), make({-3, 1, 4}), zero(3)));
  CHECK(tangent_contains_oracle(make({2, 1, 0}), zero(3), make({-3, 1, 4}), zero(3)));
}

TEST_CASE("tangent formula agrees with the projection characterization") {
  SplitMix64 rng(2024);
  int checked = 0;
  for (int m : {1, 2, 3, 5}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 120; ++i) {
        auto pg = gen_pair(c, m, rng);
        auto [d, w] = gen_tangent(pg, rng);
        CAPTURE(m);
        CAPTURE(static_cast<int>(c));
        bool a = tangent_contains(pg.x, pg.y, d, w);
        bool b = tangent_contains_oracle(pg.x, pg.y, d, w);
        CHECK(a == b);
        CHECK(a);  // constructed members must be accepted
        ++checked;
        // perturbed tuples: agreement regardless of membership
        Vec d2 = d + 0.4 * rng.gauss_vec(m);
        Vec w2 = w + 0.4 * rng.gauss_vec(m);
        CHECK(tangent_contains(pg.x, pg.y, d2, w2) ==
              tangent_contains_oracle(pg.x, pg.y, d2, w2));
        ++checked;
      }
    }
  }
  CHECK(checked >= 4000);
}

TEST_CASE("tangent formula m=2 specialization") {
  SplitMix64 rng(77);
  for (CompCase c : kAllCases) {
    for (int i = 0; i < 150; ++i) {
      auto pg = gen_pair(c, 2, rng);
      auto [d, w] = gen_tangent(pg, rng);
      CHECK(tangent_m2_specialized(pg.x, pg.y, d, w) == tangent_contains(pg.x, pg.y, d, w));
      Vec d2 = d + 0.4 * rng.gauss_vec(2);
      Vec w2 = w + 0.4 * rng.gauss_vec(2);
      CHECK(tangent_m2_specialized(pg.x, pg.y, d2, w2) ==
            tangent_contains(pg.x, pg.y, d2, w2));
    }
  }
}

TEST_CASE("regular normal cone: frozen examples") {
  // x = 0, y interior: u arbitrary, v = 0
  CHECK(regular_normal_contains(zero(3), make({2, 1, 0}), make({5, -3, 2}), zero(3)));
  CHECK_FALSE(regular_normal_contains(zero(3), make({2, 1, 0}), zero(3), make({0, 0, 1})));
  // origin: both multipliers in -K
  CHECK(regular_normal_contains(zero(3), zero(3), make({-1, 0, 0}), make({-1, 0, 0})));
  CHECK_FALSE(regular_normal_contains(zero(3), zero(3), make({1, 0, 0}), zero(3)));
}

TEST_CASE("limiting normal cone: frozen examples") {
  // x boundary, y = 0: u = 0, v arbitrary
  CHECK(limiting_normal_contains(make({1, 1, 0}), zero(3), zero(3), make({3, 1, -2})));
  // u in R_- xhat, <v, xhat> <= 0
  CHECK(limiting_normal_contains(make({1, 1, 0}), zero(3), make({-1, 1, 0}), make({0, 0, 1})));
  // x = 0, y boundary: u perp yhat with v in R_- yhat
  CHECK(limiting_normal_contains(zero(3), make({1, 1, 0}), make({1, 1, 0}), make({-1, 1, 0})));
  // regular cone is contained in the limiting cone
  SplitMix64 rng(31);
  for (int m : {1, 2, 3, 5}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 60; ++i) {
        auto pg = gen_pair(c, m, rng);
        Vec u = rng.gauss_vec(m), v = rng.gauss_vec(m);
        if (regular_normal_contains(pg.x, pg.y, u, v))
          CHECK(limiting_normal_contains(pg.x, pg.y, u, v));
      }
    }
  }
}

TEST_CASE("limiting normal cone agrees with the coderivative route") {
  // (u,v) in N_Omega(x,y) iff -v in D*Pi_K(x-y)(-u-v)
  SplitMix64 rng(555);
  for (int m : {1, 2, 3, 5}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 120; ++i) {
        auto pg = gen_pair(c, m, rng);
        Vec u = rng.gauss_vec(m), v = rng.gauss_vec(m);
        bool algebra = limiting_normal_contains(pg.x, pg.y, u, v);
        bool codr = in_limiting_coderivative(Vec(pg.x - pg.y), Vec(-u - v), Vec(-v));
        CAPTURE(m);
        CAPTURE(static_cast<int>(c));
        CHECK(algebra == codr);
      }
    }
  }
}

TEST_CASE("directional normal cone: frozen examples") {
  // origin with any tangent direction reduces to the limiting cone at it
  auto r1 = directional_normal_contains(zero(3), zero(3), make({1, 1, 0}),
                                        make({2, -2, 0}), make({0.3, 0.3, 0}),
                                        make({1, 1, 1}));
  CHECK(r1.direction_in_tangent);
  CHECK(r1.member == limiting_normal_contains(make({1, 1, 0}), make({2, -2, 0}),
                                              make({0.3, 0.3, 0}), make({1, 1, 1})));
  // case x boundary, y=0: interior tangent direction forces u = 0
  auto r2 = directional_normal_contains(make({1, 1, 0}), zero(3), make({1, 0, 0}),
                                        zero(3), zero(3), make({7, 3, -2}));
  CHECK(r2.member);
  auto r3 = directional_normal_contains(make({1, 1, 0}), zero(3), make({1, 0, 0}),
                                        zero(3), make({1, 0, 0}), make({7, 3, -2}));
  CHECK_FALSE(r3.member);
  CHECK(r3.direction_in_tangent);
  // third branch: d perp xhat, w in R+ xhat
  auto r4 = directional_normal_contains(make({1, 1, 0}), zero(3), make({0, 0, 1}),
                                        make({2, -2, 0}), make({3, -3, 0}),
                                        make({0, 0, 4}));
  CHECK(r4.member);
  // direction outside the tangent cone is flagged
  auto r5 = directional_normal_contains(zero(3), make({2, 1, 0}), make({1, 0, 0}),
                                        zero(3), zero(3), zero(3));
  CHECK_FALSE(r5.member);
  CHECK_FALSE(r5.direction_in_tangent);
}

TEST_CASE("directional normals: subset of limiting, zero-direction identity") {
  SplitMix64 rng(888);
  for (int m : {1, 2, 3}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 80; ++i) {
        auto pg = gen_pair(c, m, rng);
        auto [d, w] = gen_tangent(pg, rng);
        Vec u = rng.gauss_vec(m), v = rng.gauss_vec(m);
        auto dm = directional_normal_contains(pg.x, pg.y, d, w, u, v);
        if (dm.member) CHECK(limiting_normal_contains(pg.x, pg.y, u, v));
        // N(z; 0) = N(z)
        auto z0 = directional_normal_contains(pg.x, pg.y, zero(m), zero(m), u, v);
        CHECK(z0.member == limiting_normal_contains(pg.x, pg.y, u, v));
      }
    }
  }
}

TEST_CASE("directional rep pieces match the membership algebra") {
  SplitMix64 rng(4321);
  for (int m : {1, 2, 3}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 60; ++i) {
        auto pg = gen_pair(c, m, rng);
        auto [d, w] = gen_tangent(pg, rng);
        auto rep = directional_normal_rep(pg.x, pg.y, d, w);
        REQUIRE(rep.direction_in_tangent);
        for (int t = 0; t < 12; ++t) {
          Vec lam = rng.gauss_vec(2 * m);
          bool in_pieces = rep.contains(lam);
          auto dm = directional_normal_contains(pg.x, pg.y, d, w,
                                                Vec(lam.head(m)), Vec(lam.tail(m)));
          if (in_pieces) CHECK(dm.member);
          // finite reps (no families) must be complete
          if (rep.families.empty() && dm.member) CHECK(in_pieces);
        }
      }
    }
  }
}

TEST_CASE("cone rule at the origin: directional = limiting at the direction") {
  SplitMix64 rng(606);
  for (int m : {2, 3}) {
    for (int i = 0; i < 100; ++i) {
      auto pg = gen_pair(CompCase::BothZero, m, rng);
      auto [d, w] = gen_tangent(pg, rng);
      if (d.norm() + w.norm() < 1e-9) continue;
      Vec u = rng.gauss_vec(m), v = rng.gauss_vec(m);
      auto dm = directional_normal_contains(pg.x, pg.y, d, w, u, v);
      CHECK(dm.member == limiting_normal_contains(d, w, u, v));
    }
  }
}

TEST_CASE("product operations") {
  std::vector<std::pair<Vec, Vec>> blocks = {{zero(2), zero(2)},
                                             {make({1.0}), make({0.0})}};
  std::vector<std::pair<Vec, Vec>> dirs = {{make({1, 0}), make({0, 0})},
                                           {make({0.5}), make({0.0})}};
  CHECK(product_tangent_contains(blocks, dirs));
  std::vector<std::pair<Vec, Vec>> bad = {{make({1, 0}), make({0, 0})},
                                          {make({0.5}), make({1.0})}};
  CHECK_FALSE(product_tangent_contains(blocks, bad));

  std::vector<std::pair<Vec, Vec>> mults = {{make({0, 0}), make({1, 2})},
                                            {make({0.0}), make({3.0})}};
  CHECK(product_directional_normal_contains(blocks, dirs, mults));
  std::vector<std::pair<Vec, Vec>> mbad = {{make({1, 0}), make({1, 2})},
                                           {make({0.0}), make({3.0})}};
  CHECK_FALSE(product_directional_normal_contains(blocks, dirs, mbad));
  // single-block product equals the direct test
  SplitMix64 rng(14);
  for (int i = 0; i < 50; ++i) {
    auto pg = gen_pair(CompCase::BothBoundary, 3, rng);
    auto [d, w] = gen_tangent(pg, rng);
    Vec u = rng.gauss_vec(3), v = rng.gauss_vec(3);
    bool direct = directional_normal_contains(pg.x, pg.y, d, w, u, v).member;
    bool via_product =
        product_directional_normal_contains({{pg.x, pg.y}}, {{d, w}}, {{u, v}});
    CHECK(direct == via_product);
  }
}

TEST_CASE("distance to Omega") {
  // scalar blocks have a closed form
  Vec xs(1), ys(1);
  xs << 0.3;
  ys << 0.4;
  auto b1 = distance_to_omega(xs, ys);
  CHECK(b1.best_found == doctest::Approx(0.3));
  // members are at distance zero
  SplitMix64 rng(1000);
  for (int m : {1, 2, 3}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      auto pg = gen_pair(c, m, rng);
      auto br = distance_to_omega(pg.x, pg.y);
      CHECK(br.best_found < 1e-7);
    }
  }
  // frozen regression: the symmetric infeasible pair in R^3
  auto b2 = distance_to_omega(make({1, 1, 0}), make({1, 1, 0}));
  CHECK(b2.natural_bound == doctest::Approx(2.0));
  CHECK(b2.best_found == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(b2.best_found <= b2.natural_bound + 1e-12);
  // bracket holds on random pairs
  for (int i = 0; i < 100; ++i) {
    Vec x = rng.gauss_vec(3), y = rng.gauss_vec(3);
    auto br = distance_to_omega(x, y);
    CHECK(br.best_found <= br.natural_bound + 1e-9);
  }
}

TEST_CASE("geometric derivability: accepted directions are realizable") {
  SplitMix64 rng(2718);
  for (int m : {2, 3}) {
    for (CompCase c : kAllCases) {
      if (!case_valid(c, m)) continue;
      for (int i = 0; i < 25; ++i) {
        auto pg = gen_pair(c, m, rng);
        auto [d, w] = gen_tangent(pg, rng);
        REQUIRE(tangent_contains(pg.x, pg.y, d, w));
        double prev_ratio = 1e100;
        for (double t : {1e-2, 1e-3, 1e-4}) {
          auto br = distance_to_omega(Vec(pg.x + t * d), Vec(pg.y + t * w), 3);
          double ratio = br.best_found / t;
          CHECK(ratio <= prev_ratio * 1.10 + 1e-9);
          prev_ratio = ratio;
        }
      }
    }
  }
}
