#pragma once

#include "soccp/types.hpp"

namespace soccp {

// Region of a point relative to the second-order cone K = {z : z1 >= ||z2||}
// and its negative. For m = 1 the boundary tags never occur.
enum class ConeRegion {
  InteriorK,
  BoundaryKNonzero,
  Zero,
  InteriorNegK,
  BoundaryNegKNonzero,
  Outside,
};

const char* to_string(ConeRegion r);

// Spectral decomposition z = lambda1*c1 + lambda2*c2 with
// lambda_{1,2} = z1 -/+ ||z2|| and c_{1,2} = (1, -/+ zbar2)/2.
struct SpectralDecomposition {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vec c1;
  Vec c2;
  // Set when z2 = 0 and the first canonical basis direction was chosen.
  bool tie_broken = false;
};

// Reflection (z1, -z2) about the axis of the cone.
Vec reflect(const Vec& z);

// ||z2|| for z = (z1, z2).
double tail_norm(const Vec& z);

// lambda1 = z1 - ||z2||, lambda2 = z1 + ||z2||.
double spectral_lambda1(const Vec& z);
double spectral_lambda2(const Vec& z);

// z in K within relative tolerance.
bool in_cone(const Vec& z, double tol = kDefaultTol);
// z in -K within relative tolerance.
bool in_neg_cone(const Vec& z, double tol = kDefaultTol);
// z in bd K \ {0} within relative tolerance.
bool on_boundary_nonzero(const Vec& z, double tol = kDefaultTol);

// r = t*dir for some t >= 0 (dir must be nonzero).
bool is_nonneg_multiple(const Vec& r, const Vec& dir, double tol = kDefaultTol);
// r = t*dir for some t <= 0.
bool is_nonpos_multiple(const Vec& r, const Vec& dir, double tol = kDefaultTol);
// r = t*dir for some t in R.
bool is_multiple(const Vec& r, const Vec& dir, double tol = kDefaultTol);

ConeRegion classify_point(const Vec& z, double tol = kClassifyTol);

// Requires m >= 2; the spectral machinery degenerates on the half-line.
SpectralDecomposition spectral(const Vec& z);

// Metric projection onto K.
Vec project_soc(const Vec& z);

// Directional derivative h -> Pi'_K(z; h). Case dispatch follows
// classify_point(z, tol).
Vec project_soc_dir_deriv(const Vec& z, const Vec& h, double tol = kClassifyTol);

// Jacobian of the projection where it exists (interior of K, interior of -K,
// or outside both cones). Throws NotDifferentiableError otherwise.
Mat jacobian_proj(const Vec& z, double tol = kClassifyTol);

// A generalized-Jacobian element of the projection, defined everywhere
// (used by descent loops that may touch nondifferentiable points).
Mat jacobian_proj_element(const Vec& z, double tol = kClassifyTol);

// x_star in D^*hat Pi_K(z)(u_star): regular coderivative membership.
bool in_regular_coderivative(const Vec& z, const Vec& u_star, const Vec& x_star,
                             double tol = kDefaultTol);

// x_star in D^* Pi_K(z)(u_star): limiting coderivative membership. The
// parametric families at z = 0 are resolved algebraically.
bool in_limiting_coderivative(const Vec& z, const Vec& u_star, const Vec& x_star,
                              double tol = kDefaultTol);

// Is there a unit vector w with A w = r? (Used to close the sphere-quantified
// branches of the coderivative at the origin.)
bool sphere_affine_feasible(const Mat& A, const Vec& r, double tol = kDefaultTol);

}  // namespace soccp
