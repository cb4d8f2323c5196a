#include "soccp/soc_core.hpp"

#include <cmath>

namespace soccp {

const char* to_string(ConeRegion r) {
  switch (r) {
    case ConeRegion::InteriorK: return "interior_K";
    case ConeRegion::BoundaryKNonzero: return "boundary_K";
    case ConeRegion::Zero: return "zero";
    case ConeRegion::InteriorNegK: return "interior_negK";
    case ConeRegion::BoundaryNegKNonzero: return "boundary_negK";
    case ConeRegion::Outside: return "outside";
  }
  return "?";
}

Vec reflect(const Vec& z) {
  Vec r = z;
  r.tail(z.size() - 1) *= -1.0;
  return r;
}

double tail_norm(const Vec& z) {
  return z.size() > 1 ? z.tail(z.size() - 1).norm() : 0.0;
}

double spectral_lambda1(const Vec& z) { return z(0) - tail_norm(z); }
double spectral_lambda2(const Vec& z) { return z(0) + tail_norm(z); }

bool in_cone(const Vec& z, double tol) {
  return spectral_lambda1(z) >= -rel_scale(tol, z.norm());
}

bool in_neg_cone(const Vec& z, double tol) {
  return spectral_lambda2(z) <= rel_scale(tol, z.norm());
}

bool on_boundary_nonzero(const Vec& z, double tol) {
  double nz = z.norm();
  return nz > rel_scale(tol, nz) &&
         std::abs(spectral_lambda1(z)) <= rel_scale(tol, nz);
}

bool is_nonneg_multiple(const Vec& r, const Vec& dir, double tol) {
  double nd2 = dir.squaredNorm();
  if (nd2 <= 0.0) throw DimensionError("is_nonneg_multiple: zero direction");
  double scale = rel_scale(tol, r.norm());
  double t = r.dot(dir) / nd2;
  if (t < -scale / std::sqrt(nd2)) return false;
  return (r - std::max(t, 0.0) * dir).norm() <= scale;
}

bool is_nonpos_multiple(const Vec& r, const Vec& dir, double tol) {
  return is_nonneg_multiple(r, Vec(-dir), tol);
}

bool is_multiple(const Vec& r, const Vec& dir, double tol) {
  double nd2 = dir.squaredNorm();
  if (nd2 <= 0.0) throw DimensionError("is_multiple: zero direction");
  double t = r.dot(dir) / nd2;
  return (r - t * dir).norm() <= rel_scale(tol, r.norm());
}

ConeRegion classify_point(const Vec& z, double tol) {
  if (z.size() < 1) throw DimensionError("classify_point: empty vector");
  double nz = z.norm();
  if (nz <= tol) return ConeRegion::Zero;
  double s = rel_scale(tol, nz);
  double t = tail_norm(z);
  if (std::abs(z(0) - t) <= s && z.size() > 1 && t > s)
    return ConeRegion::BoundaryKNonzero;
  if (std::abs(z(0) + t) <= s && z.size() > 1 && t > s)
    return ConeRegion::BoundaryNegKNonzero;
  if (z(0) > t) return ConeRegion::InteriorK;
  if (z(0) < -t) return ConeRegion::InteriorNegK;
  return ConeRegion::Outside;
}

SpectralDecomposition spectral(const Vec& z) {
  int m = static_cast<int>(z.size());
  if (m < 2)
    throw DimensionError("spectral: requires m >= 2, got m = " + std::to_string(m));
  SpectralDecomposition d;
  double t = tail_norm(z);
  d.lambda1 = z(0) - t;
  d.lambda2 = z(0) + t;
  Vec zbar2(m - 1);
  if (t == 0.0) {
    zbar2.setZero();
    zbar2(0) = 1.0;
    d.tie_broken = true;
  } else {
    zbar2 = z.tail(m - 1) / t;
  }
  d.c1.resize(m);
  d.c2.resize(m);
  d.c1(0) = 0.5;
  d.c2(0) = 0.5;
  d.c1.tail(m - 1) = -0.5 * zbar2;
  d.c2.tail(m - 1) = 0.5 * zbar2;
  return d;
}

Vec project_soc(const Vec& z) {
  int m = static_cast<int>(z.size());
  if (m == 1) {
    Vec p(1);
    p(0) = std::max(z(0), 0.0);
    return p;
  }
  SpectralDecomposition d = spectral(z);
  return std::max(d.lambda1, 0.0) * d.c1 + std::max(d.lambda2, 0.0) * d.c2;
}

Vec project_soc_dir_deriv(const Vec& z, const Vec& h, double tol) {
  if (z.size() != h.size())
    throw DimensionError("project_soc_dir_deriv: dim mismatch");
  switch (classify_point(z, tol)) {
    case ConeRegion::InteriorK:
      return h;
    case ConeRegion::InteriorNegK:
      return Vec::Zero(z.size());
    case ConeRegion::Outside:
      return jacobian_proj(z, tol) * h;
    case ConeRegion::BoundaryKNonzero: {
      SpectralDecomposition d = spectral(z);
      double a = std::min(d.c1.dot(h), 0.0);
      return h - 2.0 * a * d.c1;
    }
    case ConeRegion::BoundaryNegKNonzero: {
      SpectralDecomposition d = spectral(z);
      double a = std::max(d.c2.dot(h), 0.0);
      return 2.0 * a * d.c2;
    }
    case ConeRegion::Zero:
      return project_soc(h);
  }
  return h;
}

Mat jacobian_proj(const Vec& z, double tol) {
  int m = static_cast<int>(z.size());
  switch (classify_point(z, tol)) {
    case ConeRegion::InteriorK:
      return Mat::Identity(m, m);
    case ConeRegion::InteriorNegK:
      return Mat::Zero(m, m);
    case ConeRegion::Outside: {
      double t = tail_norm(z);
      double mu = z(0) / t;
      Vec w = z.tail(m - 1) / t;
      Mat J = 0.5 * (1.0 + mu) * Mat::Identity(m, m);
      J(0, 0) += 0.5 * (-mu);
      J.block(0, 1, 1, m - 1) += 0.5 * w.transpose();
      J.block(1, 0, m - 1, 1) += 0.5 * w;
      J.block(1, 1, m - 1, m - 1) += 0.5 * (-mu) * (w * w.transpose());
      return J;
    }
    default:
      throw NotDifferentiableError(
          "jacobian_proj: projection not differentiable at this point");
  }
}

Mat jacobian_proj_element(const Vec& z, double tol) {
  int m = static_cast<int>(z.size());
  switch (classify_point(z, tol)) {
    case ConeRegion::InteriorK:
    case ConeRegion::BoundaryKNonzero:
      return Mat::Identity(m, m);
    case ConeRegion::InteriorNegK:
    case ConeRegion::BoundaryNegKNonzero:
      return Mat::Zero(m, m);
    case ConeRegion::Outside:
      return jacobian_proj(z, tol);
    case ConeRegion::Zero:
      return 0.5 * Mat::Identity(m, m);
  }
  return Mat::Identity(m, m);
}

namespace {

// Membership in the B-subdifferential image at z = 0: x = B u for some
// B = 0, I, or (1/2)[[1, w^T],[w, 2aI + (1-2a)ww^T]] with ||w|| = 1, a in [0,1].
bool in_bsub_image_origin(const Vec& u, const Vec& x, double tol) {
  int m = static_cast<int>(u.size());
  double scale = rel_scale(tol, u.norm() + x.norm());
  if (x.norm() <= scale) return true;
  if ((x - u).norm() <= scale) return true;
  if (m == 1) return false;

  double u1 = u(0);
  Vec u2 = u.tail(m - 1);
  double x1 = x(0);
  Vec x2 = x.tail(m - 1);

  if (m == 2) {
    // For m = 2 the alpha parameter drops out and w = +/-1.
    for (double w : {1.0, -1.0}) {
      if (std::abs(x1 - 0.5 * (u1 + w * u2(0))) <= scale &&
          std::abs(x2(0) - 0.5 * (u1 * w + u2(0))) <= scale)
        return true;
    }
    return false;
  }

  double s = 2.0 * x1 - u1;  // forced value of w^T u2
  double nu2 = u2.norm();
  if (std::abs(s) > nu2 + scale) return false;

  if (nu2 <= scale) {
    // u2 = 0: x = (u1/2, (u1/2) w).
    return std::abs(x1 - 0.5 * u1) <= scale &&
           std::abs(x2.norm() - 0.5 * std::abs(u1)) <= scale;
  }

  // Near-parallel w = sign(s) * u2/||u2||.
  if (std::abs(std::abs(s) - nu2) <= scale && std::abs(s) > scale) {
    double gamma = x2.dot(u2) / (nu2 * nu2);
    if ((x2 - gamma * u2).norm() <= scale) {
      double rhs = 0.5 * s * (u1 + s) / (nu2 * nu2);
      // gamma = alpha(1 - s^2/||u2||^2) + rhs collapses to gamma = rhs here.
      if (std::abs(gamma - rhs) <= scale) return true;
    }
  }

  double denom = nu2 * nu2 - s * s;
  if (denom > scale * scale) {
    double alpha = (x2.dot(u2) - 0.5 * s * (u1 + s)) / denom;
    if (alpha >= -tol && alpha <= 1.0 + tol) {
      double beta = 0.5 * (u1 + (1.0 - 2.0 * alpha) * s);
      Vec r = x2 - alpha * u2;
      if (std::abs(beta) <= scale) {
        if (r.norm() <= scale) return true;
      } else if (std::abs(r.norm() - std::abs(beta)) <= scale) {
        Vec w = r / beta;
        if (std::abs(w.dot(u2) - s) <= scale) return true;
      }
    }
  }
  return false;
}

// Branch {x* : u* - x* in R+ xi, <x*, xi> >= 0 for some xi in C},
// C = {(1, w)/2 : ||w|| = 1}, resolved without sampling the sphere.
bool in_xi_ray_branch(const Vec& u, const Vec& x, double tol) {
  if (u.size() == 1) return false;  // C is empty on the half-line
  double scale = rel_scale(tol, u.norm() + x.norm());
  Vec r = u - x;
  if (r.norm() <= scale) {
    // xi free: need <x, xi> >= 0 for some xi, i.e. x1 + ||x2|| >= 0.
    return spectral_lambda2(x) >= -scale;
  }
  // r must be a positive multiple of some (1, w), i.e. r in bd K \ {0}.
  if (r(0) <= scale) return false;
  if (std::abs(spectral_lambda1(r)) > scale) return false;
  return x.dot(r) >= -scale * r.norm();
}

}  // namespace

bool in_regular_coderivative(const Vec& z, const Vec& u_star, const Vec& x_star,
                             double tol) {
  if (z.size() != u_star.size() || z.size() != x_star.size())
    throw DimensionError("in_regular_coderivative: dim mismatch");
  double scale = rel_scale(tol, u_star.norm() + x_star.norm());
  switch (classify_point(z, tol)) {
    case ConeRegion::InteriorK:
      return (x_star - u_star).norm() <= scale;
    case ConeRegion::InteriorNegK:
      return x_star.norm() <= scale;
    case ConeRegion::Outside:
      return (x_star - jacobian_proj(z, tol).transpose() * u_star).norm() <= scale;
    case ConeRegion::BoundaryKNonzero: {
      SpectralDecomposition d = spectral(z);
      Vec r = u_star - x_star;
      bool ray = r.norm() <= scale || is_nonneg_multiple(r, d.c1, tol);
      return ray && x_star.dot(d.c1) >= -scale;
    }
    case ConeRegion::BoundaryNegKNonzero: {
      SpectralDecomposition d = spectral(z);
      bool ray = x_star.norm() <= scale || is_nonneg_multiple(x_star, d.c2, tol);
      return ray && (u_star - x_star).dot(d.c2) >= -scale;
    }
    case ConeRegion::Zero:
      return in_cone(x_star, tol) && in_cone(Vec(u_star - x_star), tol);
  }
  return false;
}

bool in_limiting_coderivative(const Vec& z, const Vec& u_star, const Vec& x_star,
                              double tol) {
  if (z.size() != u_star.size() || z.size() != x_star.size())
    throw DimensionError("in_limiting_coderivative: dim mismatch");
  int m = static_cast<int>(z.size());
  double scale = rel_scale(tol, u_star.norm() + x_star.norm());
  switch (classify_point(z, tol)) {
    case ConeRegion::InteriorK:
    case ConeRegion::InteriorNegK:
    case ConeRegion::Outside:
      return in_regular_coderivative(z, u_star, x_star, tol);
    case ConeRegion::BoundaryKNonzero: {
      if ((x_star - u_star).norm() <= scale) return true;  // B-element I
      if (m >= 2) {
        SpectralDecomposition d = spectral(z);
        Vec zbar2 = 2.0 * d.c2.tail(m - 1);
        Vec bu = u_star;
        bu(0) += 0.5 * (-u_star(0) + zbar2.dot(u_star.tail(m - 1)));
        bu.tail(m - 1) +=
            0.5 * (u_star(0) * zbar2 - zbar2.dot(u_star.tail(m - 1)) * zbar2);
        if ((x_star - bu).norm() <= scale) return true;
      }
      return in_regular_coderivative(z, u_star, x_star, tol);
    }
    case ConeRegion::BoundaryNegKNonzero: {
      if (x_star.norm() <= scale) return true;  // B-element O
      if (m >= 2) {
        SpectralDecomposition d = spectral(z);
        Vec zbar2 = 2.0 * d.c2.tail(m - 1);
        Vec bu(m);
        bu(0) = 0.5 * (u_star(0) + zbar2.dot(u_star.tail(m - 1)));
        bu.tail(m - 1) =
            0.5 * (u_star(0) * zbar2 + zbar2.dot(u_star.tail(m - 1)) * zbar2);
        if ((x_star - bu).norm() <= scale) return true;
      }
      return in_regular_coderivative(z, u_star, x_star, tol);
    }
    case ConeRegion::Zero: {
      if (in_bsub_image_origin(u_star, x_star, tol)) return true;
      if (in_cone(x_star, tol) && in_cone(Vec(u_star - x_star), tol)) return true;
      if (in_xi_ray_branch(u_star, x_star, tol)) return true;
      // eta branch: x* in R+ eta, <u* - x*, eta> >= 0.
      if (m >= 2) {
        if (x_star.norm() <= scale) {
          if (spectral_lambda2(u_star) >= -scale) return true;
        } else if (x_star(0) > scale &&
                   std::abs(spectral_lambda1(x_star)) <= scale) {
          if ((u_star - x_star).dot(x_star) >= -scale * x_star.norm()) return true;
        }
      }
      return false;
    }
  }
  return false;
}

bool sphere_affine_feasible(const Mat& A, const Vec& r, double tol) {
  int p = static_cast<int>(A.cols());
  if (p == 0) return false;
  double scale = rel_scale(tol, r.norm() + A.norm());
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  cod.setThreshold(1e-12);
  Vec w0 = cod.solve(r);
  if ((A * w0 - r).norm() > scale) return false;
  double n0 = w0.norm();
  if (std::abs(n0 - 1.0) <= tol * 10.0) return true;
  if (n0 < 1.0) return cod.rank() < p;
  return false;
}

}  // namespace soccp
