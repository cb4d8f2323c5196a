#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "soccp/soc_core.hpp"
#include "soccp/types.hpp"

namespace soccp {

// Position of a pair (x, y) inside the complementarity set
// Omega = {(x, y) : K ni x perp y in K}.
enum class CompCase {
  XZeroYInt,
  XIntYZero,
  BothBoundary,
  XBoundaryYZero,
  XZeroYBoundary,
  BothZero,
};

const char* to_string(CompCase c);

struct PairClassification {
  CompCase tag;
  // y = k_ratio * reflect(x) in the BothBoundary case.
  std::optional<double> k_ratio;
};

// One polyhedral piece {lam : eq*lam = 0, ineq*lam <= 0} of a cone union,
// optionally intersected with -K constraints on coordinate ranges (only
// emitted for ranges of length >= 3; smaller cones are lowered to rows).
struct ConePiece {
  int dim = 0;
  Mat eq;
  Mat ineq;
  std::vector<std::pair<int, int>> neg_soc;  // (offset, length)
  std::string label;
  bool sampled = false;  // piece came from sampling a parametric family

  explicit ConePiece(int dimension = 0, std::string lab = "")
      : dim(dimension), eq(0, dimension), ineq(0, dimension), label(std::move(lab)) {}

  void add_eq_row(const Vec& row);
  void add_ineq_row(const Vec& row);
  // lam[off..off+len) = 0
  void add_zero_range(int off, int len);
  // <lam[off..off+len), dir> = 0
  void add_perp(int off, const Vec& dir);
  // lam range parallel to dir (both signs)
  void add_parallel(int off, const Vec& dir);
  // <lam range, dir> <= 0
  void add_halfspace(int off, const Vec& dir);
  // lam range in R_- dir
  void add_neg_ray(int off, const Vec& dir);
  // lam range in -K (lowered to rows for len <= 2)
  void add_neg_cone(int off, int len);

  bool contains(const Vec& lam, double tol = kDefaultTol) const;
};

// A sphere-parameterized family of pieces (the xi in C branches at the
// origin); instantiated at concrete parameter values by the callers.
struct ParametricFamily {
  std::string label;
  int sphere_dim = 0;
  std::function<std::vector<ConePiece>(const Vec& xi_tail)> instantiate;
};

struct ConeUnionRep {
  int dim = 0;
  std::vector<ConePiece> pieces;
  std::vector<ParametricFamily> families;
  bool direction_in_tangent = true;

  bool contains(const Vec& lam, double tol = kDefaultTol) const;
};

struct DirectionalMembership {
  bool member = false;
  bool direction_in_tangent = true;
};

struct DistanceBracket {
  double best_found = 0.0;    // distance to the best feasible pair found
  double natural_bound = 0.0; // sqrt(2) * ||x - Pi_K(x - y)||
};

bool in_omega(const Vec& x, const Vec& y, double tol = kDefaultTol);

PairClassification classify_pair(const Vec& x, const Vec& y,
                                 double tol = kDefaultTol);

// Explicit six-case tangent cone formula.
bool tangent_contains(const Vec& x, const Vec& y, const Vec& d, const Vec& w,
                      double tol = kDefaultTol);

// Independent characterization Pi'_K(x - y; d - w) = d.
bool tangent_contains_oracle(const Vec& x, const Vec& y, const Vec& d,
                             const Vec& w, double tol = kDefaultTol);

bool regular_normal_contains(const Vec& x, const Vec& y, const Vec& u,
                             const Vec& v, double tol = kDefaultTol);

bool limiting_normal_contains(const Vec& x, const Vec& y, const Vec& u,
                              const Vec& v, double tol = kDefaultTol);

DirectionalMembership directional_normal_contains(const Vec& x, const Vec& y,
                                                  const Vec& d, const Vec& w,
                                                  const Vec& u, const Vec& v,
                                                  double tol = kDefaultTol);

// Finite-union representation of the limiting normal cone at (x, y); the
// parametric families are nonempty only at the origin with m >= 3.
ConeUnionRep limiting_normal_rep(const Vec& x, const Vec& y,
                                 double tol = kDefaultTol);

// Finite-union representation of the directional normal cone.
ConeUnionRep directional_normal_rep(const Vec& x, const Vec& y, const Vec& d,
                                    const Vec& w, double tol = kDefaultTol);

bool product_tangent_contains(const std::vector<std::pair<Vec, Vec>>& blocks,
                              const std::vector<std::pair<Vec, Vec>>& directions,
                              double tol = kDefaultTol);

bool product_directional_normal_contains(
    const std::vector<std::pair<Vec, Vec>>& blocks,
    const std::vector<std::pair<Vec, Vec>>& directions,
    const std::vector<std::pair<Vec, Vec>>& multipliers,
    double tol = kDefaultTol);

// Certified bracket around d_Omega(x, y). best_found comes from a multistart
// projected-gradient descent over the parameterization
// s -> (Pi_K(s), Pi_K(s) - s); it never exceeds natural_bound.
DistanceBracket distance_to_omega(const Vec& x, const Vec& y,
                                  std::uint64_t seed = 0);

}  // namespace soccp
