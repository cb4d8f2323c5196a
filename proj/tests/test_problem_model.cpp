#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "soccp/problem_model.hpp"
#include "soccp/sampling.hpp"

using namespace soccp;

namespace {

const std::string kData = SOCCP_DATA_DIR "/instances/";

Vec make(std::initializer_list<double> vals) {
  Vec v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("loading the bundled corpus") {
  auto ex = load_instance_file(kData + "ex41.json");
  CHECK(ex.n == 2);
  CHECK(ex.lambda_structure.blocks.size() == 1);
  CHECK(ex.lambda_structure.blocks[0].type == LambdaBlock::Type::Soc);
  CHECK(ex.soc_dims == std::vector<int>{1});
  CHECK(residual(ex, ex.z_star).distance == doctest::Approx(0));

  auto so = load_instance_file(kData + "soscms_example.json");
  CHECK(so.F.kind == MapSpec::Kind::Quadratic);
  CHECK(residual(so, so.z_star).distance == doctest::Approx(0));
  for (const auto& f :
       {"ex41_lambda.json", "gsq.json", "affine_licq.json", "mpec_biactive.json",
        "soc3_int_zero.json", "rank_deficient.json", "ex41_final.json"}) {
    CHECK_NOTHROW(load_instance_file(kData + f));
  }
}

TEST_CASE("load errors are descriptive") {
  CHECK_THROWS_AS(load_instance_json("{not json"), LoadError);
  CHECK_THROWS_AS(load_instance_json("{\"n\": 2}"), LoadError);
  // dimension mismatch between soc_dims and G
  std::string bad = R"({
    "name": "bad", "n": 1,
    "maps": {"F": {}, "G": {"kind":"affine","A":[[1]],"b":[0]},
             "H": {"kind":"affine","A":[[1]],"b":[0]}},
    "lambda_structure": [], "soc_dims": [2], "z_star": [0]})";
  CHECK_THROWS_WITH_AS(load_instance_json(bad),
                       doctest::Contains("soc_dims"), LoadError);
  // infeasible reference point
  std::string infeas = R"({
    "name": "infeas", "n": 1,
    "maps": {"F": {"kind":"affine","A":[[1]],"b":[-1]}, "G": {}, "H": {}},
    "lambda_structure": [{"type":"eq","dim":1}], "soc_dims": [], "z_star": [0]})";
  CHECK_THROWS_WITH_AS(load_instance_json(infeas),
                       doctest::Contains("infeasible"), LoadError);
  // asymmetric quadratic term
  std::string asym = R"({
    "name": "asym", "n": 2,
    "maps": {"F": {"kind":"quadratic","A":[[0,0]],"b":[0],"Q":[[[0,1],[0,0]]]},
             "G": {}, "H": {}},
    "lambda_structure": [{"type":"ineq","dim":1}], "soc_dims": [], "z_star": [0,0]})";
  CHECK_THROWS_WITH_AS(load_instance_json(asym),
                       doctest::Contains("symmetric"), LoadError);
}

TEST_CASE("map evaluation") {
  MapSpec id;
  id.A = Mat::Identity(2, 2);
  id.b = Vec::Zero(2);
  Vec z = make({0.3, -0.7});
  auto e = eval_map(id, z);
  CHECK((e.value - z).norm() == doctest::Approx(0));
  CHECK((e.jacobian - Mat::Identity(2, 2)).norm() == doctest::Approx(0));

  MapSpec q;
  q.kind = MapSpec::Kind::Quadratic;
  q.A = Mat::Zero(1, 2);
  q.b = Vec::Zero(1);
  q.Q = {2.0 * Mat::Identity(2, 2)};
  auto eq = eval_map(q, make({1, 1}));
  CHECK(eq.value(0) == doctest::Approx(2));
  CHECK((eq.jacobian - make({2, 2}).transpose()).norm() == doctest::Approx(0));

  // g1 = z1 - z2^2 at the origin
  MapSpec g1;
  g1.kind = MapSpec::Kind::Quadratic;
  g1.A = (Mat(1, 2) << 1, 0).finished();
  g1.b = Vec::Zero(1);
  g1.Q = {(Mat(2, 2) << 0, 0, 0, -2).finished()};
  auto eg = eval_map(g1, make({0, 0}));
  CHECK(eg.value(0) == doctest::Approx(0));
  CHECK(eg.jacobian(0, 0) == doctest::Approx(1));
  CHECK(eg.jacobian(0, 1) == doctest::Approx(0));

  CHECK_THROWS_AS(eval_map(g1, make({1})), DimensionError);
}

TEST_CASE("jacobians match central differences") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + static_cast<int>(rng.next() % 3);
    int out = 1 + static_cast<int>(rng.next() % 3);
    MapSpec map;
    map.kind = MapSpec::Kind::Quadratic;
    map.A = Mat::NullaryExpr(out, n, [&](int, int) { return rng.gauss(); });
    map.b = rng.gauss_vec(out);
    for (int i = 0; i < out; ++i) {
      Mat qm = Mat::NullaryExpr(n, n, [&](int, int) { return rng.gauss(); });
      map.Q.push_back(0.5 * (qm + qm.transpose()));
    }
    Vec z = rng.gauss_vec(n);
    auto e = eval_map(map, z);
    for (int j = 0; j < n; ++j) {
      double h = 1e-6;
      Vec ej = Vec::Zero(n);
      ej(j) = 1.0;
      Vec fd = (eval_map(map, Vec(z + h * ej)).value -
                eval_map(map, Vec(z - h * ej)).value) /
               (2 * h);
      CHECK((fd - e.jacobian.col(j)).norm() <
            1e-6 * std::max(1.0, e.jacobian.col(j).norm()));
    }
  }
}

TEST_CASE("hessian quadratic form") {
  MapSpec aff;
  aff.A = Mat::Identity(3, 3);
  aff.b = Vec::Zero(3);
  CHECK(eval_hessian_form(aff, make({1, 2, 3}), make({4, 5, 6}), Vec::Zero(3)) == 0);

  MapSpec g1;
  g1.kind = MapSpec::Kind::Quadratic;
  g1.A = (Mat(1, 2) << 1, 0).finished();
  g1.b = Vec::Zero(1);
  g1.Q = {(Mat(2, 2) << 0, 0, 0, -2).finished()};
  Vec lam(1);
  lam << 1.0;
  CHECK(eval_hessian_form(g1, lam, make({0, 1}), Vec::Zero(2)) == doctest::Approx(-2));

  MapSpec q;
  q.kind = MapSpec::Kind::Quadratic;
  q.A = Mat::Zero(1, 2);
  q.b = Vec::Zero(1);
  q.Q = {2.0 * Mat::Identity(2, 2)};
  CHECK(eval_hessian_form(q, lam, make({1, 0}), Vec::Zero(2)) == doctest::Approx(2));
}

TEST_CASE("residual evaluation on the 2d conic instance") {
  auto ex = load_instance_file(kData + "ex41.json");
  CHECK(residual(ex, make({0, 0})).distance == doctest::Approx(0));
  // along the feasible ray
  CHECK(residual(ex, make({0.5, 0})).distance == doctest::Approx(0));
  // z = (0, -t): cone distance t/sqrt(2) plus pair distance t
  double t = 0.25;
  auto r = residual(ex, make({0, -t}));
  CHECK(r.distance == doctest::Approx(t / std::sqrt(2.0) + t).epsilon(1e-6));
  // z = (0, +t): the pair (0, t) is complementary, only the cone part remains
  auto r2 = residual(ex, make({0, t}));
  CHECK(r2.distance == doctest::Approx(t / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("residual: zero iff feasible, natural bracket") {
  auto so = load_instance_file(kData + "soc3_int_zero.json");
  SplitMix64 rng(3);
  int nonzero = 0;
  for (int i = 0; i < 60; ++i) {
    Vec z = rng.gauss_vec(3);
    auto r = residual(so, z);
    CHECK(r.distance >= -1e-12);
    bool feas = r.natural <= 1e-10;
    if (!feas) ++nonzero;
    if (feas) CHECK(r.distance <= 1e-8);
    CHECK(r.distance <= std::sqrt(2.0) * r.natural + 1e-9);
  }
  CHECK(nonzero > 0);
}

TEST_CASE("active index sets") {
  auto so = load_instance_file(kData + "soscms_example.json");
  auto act = so.active_sets();
  CHECK(act.I_g == std::vector<int>{0, 1});
  auto mp = load_instance_file(kData + "mpec_biactive.json");
  auto am = mp.active_sets();
  CHECK(am.I_phi == std::vector<int>{0});
  CHECK(am.I_psi == std::vector<int>{0});
}

TEST_CASE("instance serialization round-trip") {
  auto ex = load_instance_file(kData + "soscms_example.json");
  auto back = load_instance_json(instance_to_json(ex));
  CHECK(back.n == ex.n);
  CHECK(back.F.kind == ex.F.kind);
  CHECK((back.F.A - ex.F.A).norm() == doctest::Approx(0));
  CHECK((back.z_star - ex.z_star).norm() == doctest::Approx(0));
}
