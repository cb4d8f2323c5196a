#include "soccp/comp_set.hpp"

#include <cmath>

#include "soccp/sampling.hpp"

namespace soccp {

const char* to_string(CompCase c) {
  switch (c) {
    case CompCase::XZeroYInt: return "x_zero_y_int";
    case CompCase::XIntYZero: return "x_int_y_zero";
    case CompCase::BothBoundary: return "both_boundary";
    case CompCase::XBoundaryYZero: return "x_boundary_y_zero";
    case CompCase::XZeroYBoundary: return "x_zero_y_boundary";
    case CompCase::BothZero: return "both_zero";
  }
  return "?";
}

namespace {

Mat refl_matrix(int m) {
  Vec d = -Vec::Ones(m);
  d(0) = 1.0;
  return d.asDiagonal();
}

Vec embed(int dim, int off, const Vec& v) {
  Vec row = Vec::Zero(dim);
  row.segment(off, v.size()) = v;
  return row;
}

void append_row(Mat& m, const Vec& row) {
  m.conservativeResize(m.rows() + 1, Eigen::NoChange);
  m.row(m.rows() - 1) = row;
}

}  // namespace

void ConePiece::add_eq_row(const Vec& row) { append_row(eq, row); }
void ConePiece::add_ineq_row(const Vec& row) { append_row(ineq, row); }

void ConePiece::add_zero_range(int off, int len) {
  for (int i = 0; i < len; ++i) {
    Vec row = Vec::Zero(dim);
    row(off + i) = 1.0;
    add_eq_row(row);
  }
}

void ConePiece::add_perp(int off, const Vec& dir) {
  add_eq_row(embed(dim, off, dir));
}

void ConePiece::add_parallel(int off, const Vec& dir) {
  int len = static_cast<int>(dir.size());
  Mat p = Mat::Identity(len, len) - dir * dir.transpose() / dir.squaredNorm();
  for (int i = 0; i < len; ++i) {
    Vec row = Vec::Zero(dim);
    row.segment(off, len) = p.row(i);
    add_eq_row(row);
  }
}

void ConePiece::add_halfspace(int off, const Vec& dir) {
  add_ineq_row(embed(dim, off, dir));
}

void ConePiece::add_neg_ray(int off, const Vec& dir) {
  add_parallel(off, dir);
  add_halfspace(off, dir);
}

void ConePiece::add_neg_cone(int off, int len) {
  if (len == 1) {
    Vec row = Vec::Zero(dim);
    row(off) = 1.0;
    add_ineq_row(row);
  } else if (len == 2) {
    Vec r1 = Vec::Zero(dim), r2 = Vec::Zero(dim);
    r1(off) = 1.0;
    r1(off + 1) = 1.0;
    r2(off) = 1.0;
    r2(off + 1) = -1.0;
    add_ineq_row(r1);
    add_ineq_row(r2);
  } else {
    neg_soc.emplace_back(off, len);
  }
}

bool ConePiece::contains(const Vec& lam, double tol) const {
  double scale = rel_scale(tol, lam.norm());
  if (eq.rows() > 0) {
    for (int i = 0; i < eq.rows(); ++i) {
      double rn = std::max(eq.row(i).norm(), 1.0);
      if (std::abs(eq.row(i).dot(lam)) > scale * rn) return false;
    }
  }
  for (int i = 0; i < ineq.rows(); ++i) {
    double rn = std::max(ineq.row(i).norm(), 1.0);
    if (ineq.row(i).dot(lam) > scale * rn) return false;
  }
  for (const auto& [off, len] : neg_soc) {
    Vec seg = lam.segment(off, len);
    if (!in_neg_cone(seg, tol)) return false;
  }
  return true;
}

bool ConeUnionRep::contains(const Vec& lam, double tol) const {
  for (const auto& p : pieces)
    if (p.contains(lam, tol)) return true;
  return false;
}

bool in_omega(const Vec& x, const Vec& y, double tol) {
  if (x.size() != y.size()) throw DimensionError("in_omega: dim mismatch");
  double scale = rel_scale(tol, std::sqrt(x.squaredNorm() + y.squaredNorm()));
  return (x - project_soc(x - y)).norm() <= scale;
}

PairClassification classify_pair(const Vec& x, const Vec& y, double tol) {
  if (!in_omega(x, y, tol))
    throw NotInOmegaError("classify_pair: pair is not in the complementarity set");
  ConeRegion rx = classify_point(x, tol);
  ConeRegion ry = classify_point(y, tol);
  if (rx == ConeRegion::Zero && ry == ConeRegion::Zero)
    return {CompCase::BothZero, std::nullopt};
  if (rx == ConeRegion::Zero && ry == ConeRegion::InteriorK)
    return {CompCase::XZeroYInt, std::nullopt};
  if (rx == ConeRegion::InteriorK && ry == ConeRegion::Zero)
    return {CompCase::XIntYZero, std::nullopt};
  if (rx == ConeRegion::Zero && ry == ConeRegion::BoundaryKNonzero)
    return {CompCase::XZeroYBoundary, std::nullopt};
  if (rx == ConeRegion::BoundaryKNonzero && ry == ConeRegion::Zero)
    return {CompCase::XBoundaryYZero, std::nullopt};
  if (rx == ConeRegion::BoundaryKNonzero && ry == ConeRegion::BoundaryKNonzero)
    return {CompCase::BothBoundary, y(0) / x(0)};
  throw NotInOmegaError("classify_pair: inconsistent region pair " +
                        std::string(to_string(rx)) + "/" + to_string(ry));
}

namespace {

bool perp(const Vec& a, const Vec& b, double tol) {
  return std::abs(a.dot(b)) <= rel_scale(tol, a.norm() * b.norm());
}

// d in T_K(x) for x in bd K \ {0}:  -d1 + xbar2' d2 <= 0, i.e. <d, xhat> >= 0.
bool in_tangent_bd(const Vec& x, const Vec& d, double tol) {
  return reflect(x).dot(d) >= -rel_scale(tol, x.norm() * d.norm());
}

}  // namespace

bool tangent_contains(const Vec& x, const Vec& y, const Vec& d, const Vec& w,
                      double tol) {
  auto cls = classify_pair(x, y, tol);
  double sd = rel_scale(tol, d.norm());
  double sw = rel_scale(tol, w.norm());
  switch (cls.tag) {
    case CompCase::XZeroYInt:
      return d.norm() <= sd;
    case CompCase::XIntYZero:
      return w.norm() <= sw;
    case CompCase::BothBoundary: {
      if (!perp(d, y, tol) || !perp(w, x, tol)) return false;
      Vec r = x(0) * reflect(w) - y(0) * d;
      Vec res = r - (r.dot(x) / x.squaredNorm()) * x;
      return res.norm() <= rel_scale(tol, x.norm() * (d.norm() + w.norm()));
    }
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      if (d.norm() <= sd && in_tangent_bd(y, w, tol)) return true;
      return (d.norm() <= sd || is_nonneg_multiple(d, yh, tol)) && perp(w, yh, tol);
    }
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      if (w.norm() <= sw && in_tangent_bd(x, d, tol)) return true;
      return perp(d, xh, tol) && (w.norm() <= sw || is_nonneg_multiple(w, xh, tol));
    }
    case CompCase::BothZero:
      return in_omega(d, w, tol);
  }
  return false;
}

bool tangent_contains_oracle(const Vec& x, const Vec& y, const Vec& d,
                             const Vec& w, double tol) {
  if (!in_omega(x, y, tol))
    throw NotInOmegaError("tangent_contains_oracle: pair not in the set");
  Vec dd = project_soc_dir_deriv(x - y, d - w);
  return (dd - d).norm() <= rel_scale(tol, d.norm());
}

bool regular_normal_contains(const Vec& x, const Vec& y, const Vec& u,
                             const Vec& v, double tol) {
  auto cls = classify_pair(x, y, tol);
  double su = rel_scale(tol, u.norm());
  double sv = rel_scale(tol, v.norm());
  switch (cls.tag) {
    case CompCase::XZeroYInt:
      return v.norm() <= sv;
    case CompCase::XIntYZero:
      return u.norm() <= su;
    case CompCase::BothBoundary: {
      if (!perp(u, x, tol) || !perp(v, y, tol)) return false;
      Vec r = x(0) * reflect(u) + y(0) * v;
      Vec res = r - (r.dot(x) / x.squaredNorm()) * x;
      return res.norm() <= rel_scale(tol, x.norm() * (u.norm() + v.norm()));
    }
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      // u in yhat-polar, v in R_- yhat
      return u.dot(yh) <= rel_scale(tol, u.norm() * yh.norm()) &&
             (v.norm() <= sv || is_nonpos_multiple(v, yh, tol));
    }
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      return (u.norm() <= su || is_nonpos_multiple(u, xh, tol)) &&
             v.dot(xh) <= rel_scale(tol, v.norm() * xh.norm());
    }
    case CompCase::BothZero:
      return in_neg_cone(u, tol) && in_neg_cone(v, tol);
  }
  return false;
}

namespace {

// Branch of N_Omega(0,0): u perp xi, v perp xihat, alpha*uhat+(1-alpha)*v in
// R xi for some alpha in [0,1], xi = (1, w), ||w|| = 1. Eliminating (w, alpha)
// leaves two equations linear in alpha:
//   alpha*a + (1-alpha)*c = 0,  alpha*c + (1-alpha)*b = 0
// with a = u1^2-||u2||^2, b = v1^2-||v2||^2, c = <u,v>; the unit-norm
// condition on w is implied. The beta = 0 case reduces to a sphere-affine
// feasibility test.
bool origin_branch_f(const Vec& u, const Vec& v, double tol) {
  int m = static_cast<int>(u.size());
  if (m < 2) return false;
  double s1 = rel_scale(tol, u.norm() + v.norm());
  double s2 = rel_scale(tol, u.squaredNorm() + v.squaredNorm());
  double a = u(0) * u(0) - u.tail(m - 1).squaredNorm();
  double b = v(0) * v(0) - v.tail(m - 1).squaredNorm();
  double c = u.dot(v);

  auto l1 = [&](double al) { return al * a + (1.0 - al) * c; };
  auto l2 = [&](double al) { return al * c + (1.0 - al) * b; };
  auto beta = [&](double al) { return al * u(0) + (1.0 - al) * v(0); };

  std::vector<double> cand = {0.0, 1.0, 0.5};
  double denom = (a - c) * (a - c) + (c - b) * (c - b);
  if (denom > 0) cand.push_back(-(c * (a - c) + b * (c - b)) / denom);
  if (std::abs(a - c) > s2) cand.push_back(c / (c - a));
  if (std::abs(b - c) > s2) cand.push_back(b / (b - c));

  Mat A(2, m - 1);
  A.row(0) = u.tail(m - 1).transpose();
  A.row(1) = v.tail(m - 1).transpose();
  Vec rhs(2);
  rhs << -u(0), v(0);

  for (double al : cand) {
    if (al < -tol || al > 1.0 + tol) continue;
    double alc = std::min(std::max(al, 0.0), 1.0);
    if (std::abs(l1(alc)) > s2 || std::abs(l2(alc)) > s2) continue;
    if (std::abs(beta(alc)) > s1) return true;
    // beta = 0: need the full vector alpha*uhat + (1-alpha)*v = 0 plus a
    // sphere point w solving the two perpendicularity equations.
    Vec r = alc * reflect(u) + (1.0 - alc) * v;
    if (r.norm() <= s1 && sphere_affine_feasible(A, rhs, tol)) return true;
  }
  return false;
}

bool limiting_origin_contains(const Vec& u, const Vec& v, double tol) {
  int m = static_cast<int>(u.size());
  double su = rel_scale(tol, u.norm());
  double sv = rel_scale(tol, v.norm());
  if (in_neg_cone(u, tol) && in_neg_cone(v, tol)) return true;
  if (v.norm() <= sv) return true;
  if (u.norm() <= su) return true;
  if (m < 2) return false;
  // u in R_- xi, v in xi-polar for some xi in C
  double sij = rel_scale(tol, u.norm() * v.norm());
  if (u.norm() <= su && spectral_lambda1(v) <= sv) return true;
  if (u(0) < -su && std::abs(spectral_lambda2(u)) <= su && u.dot(v) >= -sij)
    return true;
  // symmetric branch
  if (v.norm() <= sv && spectral_lambda1(u) <= su) return true;
  if (v(0) < -sv && std::abs(spectral_lambda2(v)) <= sv && u.dot(v) >= -sij)
    return true;
  return origin_branch_f(u, v, tol);
}

}  // namespace

bool limiting_normal_contains(const Vec& x, const Vec& y, const Vec& u,
                              const Vec& v, double tol) {
  auto cls = classify_pair(x, y, tol);
  double su = rel_scale(tol, u.norm());
  double sv = rel_scale(tol, v.norm());
  switch (cls.tag) {
    case CompCase::XZeroYInt:
    case CompCase::XIntYZero:
    case CompCase::BothBoundary:
      return regular_normal_contains(x, y, u, v, tol);
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      if (v.norm() <= sv) return true;
      if (perp(u, yh, tol) && is_multiple(v, yh, tol)) return true;
      return u.dot(yh) <= rel_scale(tol, u.norm() * yh.norm()) &&
             is_nonpos_multiple(v, yh, tol);
    }
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      if (u.norm() <= su) return true;
      if (is_multiple(u, xh, tol) && perp(v, xh, tol)) return true;
      return is_nonpos_multiple(u, xh, tol) &&
             v.dot(xh) <= rel_scale(tol, v.norm() * xh.norm());
    }
    case CompCase::BothZero:
      return limiting_origin_contains(u, v, tol);
  }
  return false;
}

DirectionalMembership directional_normal_contains(const Vec& x, const Vec& y,
                                                  const Vec& d, const Vec& w,
                                                  const Vec& u, const Vec& v,
                                                  double tol) {
  if (!in_omega(x, y, tol))
    throw NotInOmegaError("directional_normal_contains: pair not in the set");
  if (!tangent_contains(x, y, d, w, tol)) return {false, false};
  auto cls = classify_pair(x, y, tol);
  switch (cls.tag) {
    case CompCase::XZeroYInt:
    case CompCase::XIntYZero:
    case CompCase::BothBoundary:
      return {limiting_normal_contains(x, y, u, v, tol), true};
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      if (w.norm() <= rel_scale(tol, w.norm() + d.norm())) {
        double g = xh.dot(d);
        if (g > rel_scale(tol, x.norm() * d.norm()))
          return {u.norm() <= rel_scale(tol, u.norm() + v.norm()), true};
        return {limiting_normal_contains(x, y, u, v, tol), true};
      }
      // d perp xhat, w in R+ xhat \ {0}
      return {is_multiple(u, xh, tol) && perp(v, xh, tol), true};
    }
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      if (d.norm() <= rel_scale(tol, w.norm() + d.norm())) {
        double g = yh.dot(w);
        if (g > rel_scale(tol, y.norm() * w.norm()))
          return {v.norm() <= rel_scale(tol, u.norm() + v.norm()), true};
        return {limiting_normal_contains(x, y, u, v, tol), true};
      }
      return {is_multiple(v, yh, tol) && perp(u, yh, tol), true};
    }
    case CompCase::BothZero:
      return {limiting_normal_contains(d, w, u, v, tol), true};
  }
  return {false, true};
}

namespace {

// Pieces of N_Omega(x, 0) for x in bd K \ {0} (u coordinates first).
std::vector<ConePiece> pieces_bdx_yzero(int m, const Vec& xh) {
  std::vector<ConePiece> ps;
  ConePiece p1(2 * m, "bdx_y0/u_zero");
  p1.add_zero_range(0, m);
  ps.push_back(p1);
  ConePiece p2(2 * m, "bdx_y0/u_line_xhat");
  p2.add_parallel(0, xh);
  p2.add_perp(m, xh);
  ps.push_back(p2);
  ConePiece p3(2 * m, "bdx_y0/regular");
  p3.add_neg_ray(0, xh);
  p3.add_halfspace(m, xh);
  ps.push_back(p3);
  return ps;
}

std::vector<ConePiece> pieces_xzero_bdy(int m, const Vec& yh) {
  std::vector<ConePiece> ps;
  ConePiece p1(2 * m, "x0_bdy/v_zero");
  p1.add_zero_range(m, m);
  ps.push_back(p1);
  ConePiece p2(2 * m, "x0_bdy/v_line_yhat");
  p2.add_perp(0, yh);
  p2.add_parallel(m, yh);
  ps.push_back(p2);
  ConePiece p3(2 * m, "x0_bdy/regular");
  p3.add_halfspace(0, yh);
  p3.add_neg_ray(m, yh);
  ps.push_back(p3);
  return ps;
}

ConePiece piece_both_boundary(int m, const Vec& x, const Vec& y) {
  ConePiece p(2 * m, "both_bd");
  p.add_perp(0, x);
  p.add_perp(m, y);
  // x1*uhat + y1*v in R x
  Mat proj = Mat::Identity(m, m) - x * x.transpose() / x.squaredNorm();
  Mat block = proj * (x(0) * refl_matrix(m));
  Mat blockv = proj * (y(0) * Mat::Identity(m, m));
  for (int i = 0; i < m; ++i) {
    Vec row = Vec::Zero(2 * m);
    row.head(m) = block.row(i);
    row.segment(m, m) = blockv.row(i);
    p.add_eq_row(row);
  }
  return p;
}

// xi = (1, t) for a unit tail t.
Vec xi_of(const Vec& tail) {
  Vec xi(tail.size() + 1);
  xi(0) = 1.0;
  xi.tail(tail.size()) = tail;
  return xi;
}

std::vector<ConePiece> origin_xi_pieces(int m, const Vec& tail, bool sampled) {
  std::vector<ConePiece> ps;
  Vec xi = xi_of(tail);
  Vec xih = reflect(xi);
  {
    ConePiece p(2 * m, "origin/xi_ray_u");
    p.sampled = sampled;
    p.add_neg_ray(0, xi);
    p.add_halfspace(m, xi);
    ps.push_back(p);
  }
  {
    ConePiece p(2 * m, "origin/xi_ray_v");
    p.sampled = sampled;
    p.add_halfspace(0, xi);
    p.add_neg_ray(m, xi);
    ps.push_back(p);
  }
  if (m == 2) {
    // The R xi condition is implied by the two perpendicularities.
    ConePiece p(2 * m, "origin/xi_perp");
    p.sampled = sampled;
    p.add_perp(0, xi);
    p.add_perp(m, xih);
    ps.push_back(p);
  } else {
    Mat proj = Mat::Identity(m, m) - xi * xi.transpose() / xi.squaredNorm();
    for (int k = 0; k <= 8; ++k) {
      double alpha = k / 8.0;
      ConePiece p(2 * m, "origin/xi_perp_a" + std::to_string(k));
      p.sampled = sampled;
      p.add_perp(0, xi);
      p.add_perp(m, xih);
      Mat bu = proj * (alpha * refl_matrix(m));
      Mat bv = proj * ((1.0 - alpha) * Mat::Identity(m, m));
      for (int i = 0; i < m; ++i) {
        Vec row = Vec::Zero(2 * m);
        row.head(m) = bu.row(i);
        row.segment(m, m) = bv.row(i);
        p.add_eq_row(row);
      }
      ps.push_back(p);
    }
  }
  return ps;
}

ConeUnionRep limiting_origin_rep(int m) {
  ConeUnionRep rep;
  rep.dim = 2 * m;
  if (m == 1) {
    ConePiece pa(2, "origin/neg_neg");
    pa.add_neg_cone(0, 1);
    pa.add_neg_cone(1, 1);
    ConePiece pb(2, "origin/v_zero");
    pb.add_zero_range(1, 1);
    ConePiece pc(2, "origin/u_zero");
    pc.add_zero_range(0, 1);
    rep.pieces = {pa, pb, pc};
    return rep;
  }
  ConePiece pa(2 * m, "origin/neg_neg");
  pa.add_neg_cone(0, m);
  pa.add_neg_cone(m, m);
  ConePiece pb(2 * m, "origin/v_zero");
  pb.add_zero_range(m, m);
  ConePiece pc(2 * m, "origin/u_zero");
  pc.add_zero_range(0, m);
  rep.pieces = {pa, pb, pc};
  if (m == 2) {
    for (double t : {1.0, -1.0}) {
      Vec tail(1);
      tail << t;
      for (auto& p : origin_xi_pieces(m, tail, false)) rep.pieces.push_back(p);
    }
  } else {
    ParametricFamily fam;
    fam.label = "origin/xi";
    fam.sphere_dim = m - 1;
    fam.instantiate = [m](const Vec& tail) { return origin_xi_pieces(m, tail, true); };
    rep.families.push_back(fam);
  }
  return rep;
}

}  // namespace

ConeUnionRep limiting_normal_rep(const Vec& x, const Vec& y, double tol) {
  int m = static_cast<int>(x.size());
  auto cls = classify_pair(x, y, tol);
  ConeUnionRep rep;
  rep.dim = 2 * m;
  switch (cls.tag) {
    case CompCase::XZeroYInt: {
      ConePiece p(2 * m, "x0_yint");
      p.add_zero_range(m, m);
      rep.pieces = {p};
      return rep;
    }
    case CompCase::XIntYZero: {
      ConePiece p(2 * m, "xint_y0");
      p.add_zero_range(0, m);
      rep.pieces = {p};
      return rep;
    }
    case CompCase::BothBoundary:
      rep.pieces = {piece_both_boundary(m, x, y)};
      return rep;
    case CompCase::XBoundaryYZero:
      rep.pieces = pieces_bdx_yzero(m, reflect(x));
      return rep;
    case CompCase::XZeroYBoundary:
      rep.pieces = pieces_xzero_bdy(m, reflect(y));
      return rep;
    case CompCase::BothZero:
      return limiting_origin_rep(m);
  }
  return rep;
}

ConeUnionRep directional_normal_rep(const Vec& x, const Vec& y, const Vec& d,
                                    const Vec& w, double tol) {
  int m = static_cast<int>(x.size());
  if (!in_omega(x, y, tol))
    throw NotInOmegaError("directional_normal_rep: pair not in the set");
  if (!tangent_contains(x, y, d, w, tol)) {
    ConeUnionRep rep;
    rep.dim = 2 * m;
    rep.direction_in_tangent = false;
    return rep;
  }
  auto cls = classify_pair(x, y, tol);
  switch (cls.tag) {
    case CompCase::XZeroYInt:
    case CompCase::XIntYZero:
    case CompCase::BothBoundary:
      return limiting_normal_rep(x, y, tol);
    case CompCase::XBoundaryYZero: {
      Vec xh = reflect(x);
      if (w.norm() <= rel_scale(tol, w.norm() + d.norm())) {
        if (xh.dot(d) > rel_scale(tol, x.norm() * d.norm())) {
          ConeUnionRep rep;
          rep.dim = 2 * m;
          ConePiece p(2 * m, "bdx_y0/dir_int");
          p.add_zero_range(0, m);
          rep.pieces = {p};
          return rep;
        }
        return limiting_normal_rep(x, y, tol);
      }
      ConeUnionRep rep;
      rep.dim = 2 * m;
      ConePiece p(2 * m, "bdx_y0/dir_ray");
      p.add_parallel(0, xh);
      p.add_perp(m, xh);
      rep.pieces = {p};
      return rep;
    }
    case CompCase::XZeroYBoundary: {
      Vec yh = reflect(y);
      if (d.norm() <= rel_scale(tol, w.norm() + d.norm())) {
        if (yh.dot(w) > rel_scale(tol, y.norm() * w.norm())) {
          ConeUnionRep rep;
          rep.dim = 2 * m;
          ConePiece p(2 * m, "x0_bdy/dir_int");
          p.add_zero_range(m, m);
          rep.pieces = {p};
          return rep;
        }
        return limiting_normal_rep(x, y, tol);
      }
      ConeUnionRep rep;
      rep.dim = 2 * m;
      ConePiece p(2 * m, "x0_bdy/dir_ray");
      p.add_perp(0, yh);
      p.add_parallel(m, yh);
      rep.pieces = {p};
      return rep;
    }
    case CompCase::BothZero:
      return limiting_normal_rep(d, w, tol);
  }
  ConeUnionRep rep;
  rep.dim = 2 * m;
  return rep;
}

bool product_tangent_contains(const std::vector<std::pair<Vec, Vec>>& blocks,
                              const std::vector<std::pair<Vec, Vec>>& directions,
                              double tol) {
  if (blocks.size() != directions.size())
    throw DimensionError("product_tangent_contains: block count mismatch");
  for (size_t i = 0; i < blocks.size(); ++i)
    if (!tangent_contains(blocks[i].first, blocks[i].second, directions[i].first,
                          directions[i].second, tol))
      return false;
  return true;
}

bool product_directional_normal_contains(
    const std::vector<std::pair<Vec, Vec>>& blocks,
    const std::vector<std::pair<Vec, Vec>>& directions,
    const std::vector<std::pair<Vec, Vec>>& multipliers, double tol) {
  if (blocks.size() != directions.size() || blocks.size() != multipliers.size())
    throw DimensionError("product_directional_normal_contains: count mismatch");
  for (size_t i = 0; i < blocks.size(); ++i) {
    auto r = directional_normal_contains(
        blocks[i].first, blocks[i].second, directions[i].first,
        directions[i].second, multipliers[i].first, multipliers[i].second, tol);
    if (!r.member) return false;
  }
  return true;
}

DistanceBracket distance_to_omega(const Vec& x, const Vec& y, std::uint64_t seed) {
  if (x.size() != y.size()) throw DimensionError("distance_to_omega: dim mismatch");
  int m = static_cast<int>(x.size());
  DistanceBracket out;
  out.natural_bound = std::sqrt(2.0) * (x - project_soc(x - y)).norm();

  if (m == 1) {
    double a = x(0), b = y(0);
    double d1 = std::hypot(std::min(a, 0.0), b);
    double d2 = std::hypot(a, std::min(b, 0.0));
    out.best_found = std::min(d1, d2);
    out.natural_bound = std::max(out.natural_bound, out.best_found);
    return out;
  }

  auto objective = [&](const Vec& s, Vec* grad) {
    Vec p = project_soc(s);
    Vec r1 = p - x;
    Vec r2 = p - s - y;
    if (grad) {
      Mat J = jacobian_proj_element(s);
      *grad = 2.0 * (J.transpose() * r1 + (J - Mat::Identity(m, m)).transpose() * r2);
    }
    return r1.squaredNorm() + r2.squaredNorm();
  };

  std::vector<Vec> starts = {x - y, x, Vec(-y), project_soc(x - y)};
  SplitMix64 rng(seed * 0x9e3779b97f4a7c15ULL + 12345);
  double mag = std::max({1.0, x.norm(), y.norm()});
  for (int i = 0; i < 4; ++i) starts.push_back(mag * rng.gauss_vec(m));

  double best = std::numeric_limits<double>::infinity();
  for (Vec s : starts) {
    Vec g(m);
    double f = objective(s, &g);
    for (int it = 0; it < 200; ++it) {
      double gn2 = g.squaredNorm();
      if (gn2 <= 1e-24 * std::max(1.0, f)) break;
      double t = 1.0;
      bool moved = false;
      while (t > 1e-14) {
        Vec s2 = s - t * g;
        double f2 = objective(s2, nullptr);
        if (f2 <= f - 1e-4 * t * gn2) {
          s = s2;
          f = f2;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      objective(s, &g);
    }
    best = std::min(best, f);
  }
  out.best_found = std::sqrt(std::max(best, 0.0));
  // The start s = x - y evaluates the Moreau pair, so this never triggers;
  // kept as a guard for the bracket invariant.
  out.best_found = std::min(out.best_found, out.natural_bound);
  return out;
}

}  // namespace soccp
