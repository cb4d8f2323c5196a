#include "soccp/cq_checker.hpp"

#include <cmath>
#include <functional>

#include "soccp/lp.hpp"
#include "soccp/sampling.hpp"

namespace soccp {

const char* to_string(CqStatus s) {
  switch (s) {
    case CqStatus::Violated: return "violated";
    case CqStatus::Certified: return "certified";
    case CqStatus::InconclusiveSampled: return "inconclusive_sampled";
    case CqStatus::NotImplemented: return "not_implemented";
  }
  return "?";
}

Mat stacked_jacobian(const ProblemInstance& inst) {
  int l = inst.F.out_dim();
  int m = inst.total_soc_dim();
  Mat P(l + 2 * m, inst.n);
  if (l > 0) P.topRows(l) = eval_map(inst.F, inst.z_star).jacobian;
  if (m > 0) {
    P.middleRows(l, m) = eval_map(inst.G, inst.z_star).jacobian;
    P.middleRows(l + m, m) = eval_map(inst.H, inst.z_star).jacobian;
  }
  return P;
}

namespace {

constexpr int kXiSamples = 64;   // sphere samples per parametric family
constexpr int kCutRounds = 16;   // cutting-plane refinement rounds
constexpr int kComboCap = 40000;
constexpr double kLpTol = 1e-9;
constexpr double kActTol = 1e-6;

Vec embed_row(int dim, const std::vector<int>& coords, const Vec& local) {
  Vec row = Vec::Zero(dim);
  for (int j = 0; j < local.size(); ++j) row(coords[j]) += local(j);
  return row;
}

ConePiece lift_piece(const ConePiece& local, const std::vector<int>& coords,
                     int total) {
  ConePiece g(total, local.label);
  g.sampled = local.sampled;
  for (int i = 0; i < local.eq.rows(); ++i)
    g.add_eq_row(embed_row(total, coords, local.eq.row(i)));
  for (int i = 0; i < local.ineq.rows(); ++i)
    g.add_ineq_row(embed_row(total, coords, local.ineq.row(i)));
  for (auto [off, len] : local.neg_soc) {
    int goff = coords[off];
    for (int j = 1; j < len; ++j)
      if (coords[off + j] != goff + j)
        throw std::logic_error("lift_piece: non-contiguous cone segment");
    g.neg_soc.emplace_back(goff, len);
  }
  return g;
}

std::vector<ConePiece> lift_all(const std::vector<ConePiece>& ps,
                                const std::vector<int>& coords, int total) {
  std::vector<ConePiece> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(lift_piece(p, coords, total));
  return out;
}

ConePiece merge_pieces(int total, const std::vector<const ConePiece*>& parts) {
  ConePiece out(total);
  bool first = true;
  for (const auto* p : parts) {
    for (int i = 0; i < p->eq.rows(); ++i) out.add_eq_row(p->eq.row(i));
    for (int i = 0; i < p->ineq.rows(); ++i) out.add_ineq_row(p->ineq.row(i));
    for (auto seg : p->neg_soc) out.neg_soc.push_back(seg);
    out.sampled = out.sampled || p->sampled;
    if (!p->label.empty()) {
      if (!first) out.label += " * ";
      out.label += p->label;
      first = false;
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Nonzero element search in {lam != 0 : kernel lam = 0, lam in piece} via
// coordinate-fixed slice LPs. -K segments enter through supporting cuts and
// candidates are re-verified exactly, so emptiness conclusions stay sound.
// --------------------------------------------------------------------------

std::vector<Vec> initial_cut_dirs(int len, std::uint64_t seed) {
  std::vector<Vec> qs;
  for (int i = 0; i < len - 1; ++i) {
    Vec q = Vec::Zero(len - 1);
    q(i) = 1.0;
    qs.push_back(q);
    qs.push_back(Vec(-q));
  }
  for (int k = 0; k < 8; ++k) qs.push_back(sphere_point(k + 1, len - 1, seed));
  return qs;
}

struct NonzeroSearch {
  bool found = false;
  Vec lambda;
  bool unresolved = false;
};

NonzeroSearch find_nonzero(const Mat& kernel, const ConePiece& piece,
                           const std::vector<int>& slice_coords,
                           std::uint64_t seed) {
  NonzeroSearch out;
  int total = piece.dim;
  std::vector<std::vector<Vec>> base_cuts;
  for (auto [off, len] : piece.neg_soc) {
    (void)off;
    base_cuts.push_back(initial_cut_dirs(len, seed));
  }

  for (int j : slice_coords) {
    for (double s : {1.0, -1.0}) {
      auto cuts = base_cuts;
      for (int round = 0; round < kCutRounds; ++round) {
        LpFeasibility lp(total);
        for (int i = 0; i < kernel.rows(); ++i) lp.add_eq(kernel.row(i), 0.0);
        for (int i = 0; i < piece.eq.rows(); ++i) lp.add_eq(piece.eq.row(i), 0.0);
        for (int i = 0; i < piece.ineq.rows(); ++i)
          lp.add_ineq(piece.ineq.row(i), 0.0);
        for (size_t b = 0; b < piece.neg_soc.size(); ++b) {
          auto [off, len] = piece.neg_soc[b];
          for (const Vec& q : cuts[b]) {
            Vec row = Vec::Zero(total);
            row(off) = 1.0;
            row.segment(off + 1, len - 1) = q;
            lp.add_ineq(row, 0.0);
          }
        }
        lp.fix_var(j, s);
        auto r = lp.solve(kLpTol);
        if (!r.feasible) break;
        bool ok = true;
        for (size_t b = 0; b < piece.neg_soc.size(); ++b) {
          auto [off, len] = piece.neg_soc[b];
          Vec seg = r.point.segment(off, len);
          if (!in_neg_cone(seg, 1e-9)) {
            ok = false;
            double tn = seg.tail(len - 1).norm();
            if (tn > 1e-14)
              cuts[b].push_back(Vec(seg.tail(len - 1) / tn));
            else
              cuts[b].push_back(sphere_point(round + 17, len - 1, seed + 1));
          }
        }
        if (ok) {
          out.found = true;
          out.lambda = r.point / r.point.lpNorm<Eigen::Infinity>();
          return out;
        }
        if (round + 1 == kCutRounds) out.unresolved = true;
      }
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Block model.
// --------------------------------------------------------------------------

struct Branch {
  std::string tag;
  std::vector<Vec> weq, wineq;
  std::vector<DirectionPattern::SocConstraint> wsoc;
  bool wdep = false;
  std::vector<ConePiece> pieces;
  std::function<std::vector<ConePiece>(const Vec& w)> pieces_at;
  bool sampled_family = false;
};

struct BlockInfo {
  enum Kind { Eq, IneqRow, VecPair, SocPair, SocCone };
  Kind kind = Eq;
  std::string name;
  int lambda_block = -1;
  int soc_pair = -1;
  std::vector<int> coords;
  std::vector<Branch> branches;
  std::vector<ConePiece> nnamcq_pieces;
  bool nnamcq_sampled = false;
  Vec base_x, base_y;
  Mat Rg, Rh;
  bool active = true;
};

struct BlockModel {
  int n = 0, l = 0, mtot = 0, total = 0;
  Mat P;       // stacked Jacobian, one row per multiplier coordinate
  Mat kernel;  // P^T: rows of the stationarity system over lambda
  std::vector<BlockInfo> blocks;
};

void add_k2_rows(std::vector<Vec>& rows, const Mat& R) {
  rows.push_back(Vec(-R.row(0) + R.row(1)));
  rows.push_back(Vec(-R.row(0) - R.row(1)));
}

// Limiting pieces of N_Omega(d, 0) for d on the boundary: u-side branches.
std::vector<ConePiece> ray_pieces_xbd(const Vec& dhat, int m, const std::string& nm) {
  std::vector<ConePiece> ps;
  ConePiece p1(2 * m, nm + "/u0");
  p1.add_zero_range(0, m);
  ps.push_back(p1);
  ConePiece p2(2 * m, nm + "/u_line");
  p2.add_parallel(0, dhat);
  p2.add_perp(m, dhat);
  ps.push_back(p2);
  ConePiece p3(2 * m, nm + "/u_ray");
  p3.add_neg_ray(0, dhat);
  p3.add_halfspace(m, dhat);
  ps.push_back(p3);
  return ps;
}

std::vector<ConePiece> ray_pieces_ybd(const Vec& dhat, int m, const std::string& nm) {
  std::vector<ConePiece> ps;
  ConePiece p1(2 * m, nm + "/v0");
  p1.add_zero_range(m, m);
  ps.push_back(p1);
  ConePiece p2(2 * m, nm + "/v_line");
  p2.add_perp(0, dhat);
  p2.add_parallel(m, dhat);
  ps.push_back(p2);
  ConePiece p3(2 * m, nm + "/v_ray");
  p3.add_halfspace(0, dhat);
  p3.add_neg_ray(m, dhat);
  ps.push_back(p3);
  return ps;
}

ConePiece both_bd_piece(const Vec& d, const Vec& w, int m, const std::string& nm) {
  ConePiece local(2 * m, nm + "/both_bd");
  local.add_perp(0, d);
  local.add_perp(m, w);
  Mat refl = Mat::Identity(m, m);
  refl.diagonal().tail(m - 1).setConstant(-1.0);
  Mat proj = Mat::Identity(m, m) - d * d.transpose() / d.squaredNorm();
  Mat bu = proj * (d(0) * refl);
  Mat bv = proj * (w(0) * Mat::Identity(m, m));
  for (int i = 0; i < m; ++i) {
    Vec row = Vec::Zero(2 * m);
    row.head(m) = bu.row(i);
    row.segment(m, m) = bv.row(i);
    local.add_eq_row(row);
  }
  return local;
}

void add_soc_pair_branches(BlockInfo& blk, int total, const CheckOptions& opt) {
  const Vec x = blk.base_x, y = blk.base_y;
  const Mat &Rg = blk.Rg, &Rh = blk.Rh;
  int m = static_cast<int>(x.size());
  auto cls = classify_pair(x, y, opt.tol);

  auto rep = limiting_normal_rep(x, y, opt.tol);
  blk.nnamcq_pieces = lift_all(rep.pieces, blk.coords, total);
  blk.nnamcq_sampled = !rep.families.empty();
  for (const auto& fam : rep.families) {
    for (int k = 0; k < kXiSamples; ++k) {
      Vec tail = sphere_point(k + 1, fam.sphere_dim, opt.seed);
      for (auto& p : lift_all(fam.instantiate(tail), blk.coords, total))
        blk.nnamcq_pieces.push_back(p);
    }
  }

  auto pc_u0 = [&]() {
    ConePiece local(2 * m, blk.name + "/u0");
    local.add_zero_range(0, m);
    return lift_piece(local, blk.coords, total);
  };
  auto pc_v0 = [&]() {
    ConePiece local(2 * m, blk.name + "/v0");
    local.add_zero_range(m, m);
    return lift_piece(local, blk.coords, total);
  };

  switch (cls.tag) {
    case CompCase::XZeroYInt: {
      Branch br;
      br.tag = blk.name + "/x0_yint";
      for (int i = 0; i < m; ++i) br.weq.push_back(Rg.row(i));
      br.pieces = blk.nnamcq_pieces;
      blk.branches = {br};
      return;
    }
    case CompCase::XIntYZero: {
      Branch br;
      br.tag = blk.name + "/xint_y0";
      for (int i = 0; i < m; ++i) br.weq.push_back(Rh.row(i));
      br.pieces = blk.nnamcq_pieces;
      blk.branches = {br};
      return;
    }
    case CompCase::BothBoundary: {
      Branch br;
      br.tag = blk.name + "/both_bd";
      br.weq.push_back(Vec(y.transpose() * Rg));
      br.weq.push_back(Vec(x.transpose() * Rh));
      Mat refl = Mat::Identity(m, m);
      refl.diagonal().tail(m - 1).setConstant(-1.0);
      Mat proj = Mat::Identity(m, m) - x * x.transpose() / x.squaredNorm();
      Mat rows = proj * (x(0) * refl * Rh - y(0) * Rg);
      for (int i = 0; i < m; ++i) br.weq.push_back(rows.row(i));
      br.pieces = blk.nnamcq_pieces;
      blk.branches = {br};
      return;
    }
    case CompCase::XBoundaryYZero:
    case CompCase::XZeroYBoundary: {
      bool flipped = cls.tag == CompCase::XZeroYBoundary;
      const Vec& bd_pt = flipped ? y : x;
      const Mat& Rbd = flipped ? Rh : Rg;  // image moves along T_K(bd_pt)
      const Mat& Rz = flipped ? Rg : Rh;   // image leaves the zero component
      Vec xh = reflect(bd_pt);
      Vec trow = xh.transpose() * Rbd;
      Branch b1;
      b1.tag = blk.name + "/dir_int";
      b1.wineq.push_back(Vec(-trow));
      for (int i = 0; i < m; ++i) b1.weq.push_back(Rz.row(i));
      b1.pieces = {flipped ? pc_v0() : pc_u0()};
      Branch b2;
      b2.tag = blk.name + "/dir_bd";
      b2.weq.push_back(trow);
      for (int i = 0; i < m; ++i) b2.weq.push_back(Rz.row(i));
      b2.pieces = blk.nnamcq_pieces;
      Branch b3;
      b3.tag = blk.name + "/dir_ray";
      b3.weq.push_back(trow);
      Mat projh = Mat::Identity(m, m) - xh * xh.transpose() / xh.squaredNorm();
      Mat rows = projh * Rz;
      for (int i = 0; i < m; ++i) b3.weq.push_back(rows.row(i));
      b3.wineq.push_back(Vec(-(xh.transpose() * Rz)));
      {
        ConePiece local(2 * m, blk.name + "/ray_piece");
        if (!flipped) {
          local.add_parallel(0, xh);
          local.add_perp(m, xh);
        } else {
          local.add_perp(0, xh);
          local.add_parallel(m, xh);
        }
        b3.pieces = {lift_piece(local, blk.coords, total)};
      }
      blk.branches = {b1, b2, b3};
      return;
    }
    case CompCase::BothZero:
      break;
  }

  if (m == 1) {
    Branch b1;
    b1.tag = blk.name + "/dG_pos";
    b1.wineq.push_back(Vec(-Rg.row(0)));
    b1.weq.push_back(Rh.row(0));
    b1.pieces = {pc_u0()};
    Branch b2;
    b2.tag = blk.name + "/dH_pos";
    b2.weq.push_back(Rg.row(0));
    b2.wineq.push_back(Vec(-Rh.row(0)));
    b2.pieces = {pc_v0()};
    Branch b3;
    b3.tag = blk.name + "/d_zero";
    b3.weq.push_back(Rg.row(0));
    b3.weq.push_back(Rh.row(0));
    b3.pieces = blk.nnamcq_pieces;
    blk.branches = {b1, b2, b3};
    return;
  }

  Branch bz;
  bz.tag = blk.name + "/d_zero";
  for (int i = 0; i < m; ++i) bz.weq.push_back(Rg.row(i));
  for (int i = 0; i < m; ++i) bz.weq.push_back(Rh.row(i));
  bz.pieces = blk.nnamcq_pieces;
  bz.sampled_family = blk.nnamcq_sampled;
  blk.branches.push_back(bz);

  auto coords = blk.coords;
  std::string nm = blk.name;

  if (m == 2) {
    Vec rays[2] = {(Vec(2) << 1, 1).finished(), (Vec(2) << 1, -1).finished()};
    auto ray_rows = [&](std::vector<Vec>& weq, std::vector<Vec>& wineq,
                        const Mat& R, const Vec& ray) {
      Vec perp(2);
      perp << ray(1), -ray(0);
      weq.push_back(Vec(perp.transpose() * R));
      wineq.push_back(Vec(-R.row(0)));
    };
    Branch bg;
    bg.tag = blk.name + "/dG_inK";
    add_k2_rows(bg.wineq, Rg);
    for (int i = 0; i < 2; ++i) bg.weq.push_back(Rh.row(i));
    bg.pieces = {pc_u0()};
    Branch bh;
    bh.tag = blk.name + "/dH_inK";
    add_k2_rows(bh.wineq, Rh);
    for (int i = 0; i < 2; ++i) bh.weq.push_back(Rg.row(i));
    bh.pieces = {pc_v0()};
    blk.branches.push_back(bg);
    blk.branches.push_back(bh);
    for (int rg = 0; rg < 2; ++rg) {
      Vec dray = rays[rg];
      Vec dhat = reflect(dray);
      Branch b5;
      b5.tag = blk.name + "/dG_ray" + std::to_string(rg);
      ray_rows(b5.weq, b5.wineq, Rg, dray);
      for (int i = 0; i < 2; ++i) b5.weq.push_back(Rh.row(i));
      b5.pieces = lift_all(ray_pieces_xbd(dhat, m, nm), coords, total);
      blk.branches.push_back(b5);
      Branch b6;
      b6.tag = blk.name + "/dH_ray" + std::to_string(rg);
      ray_rows(b6.weq, b6.wineq, Rh, dray);
      for (int i = 0; i < 2; ++i) b6.weq.push_back(Rg.row(i));
      b6.pieces = lift_all(ray_pieces_ybd(dhat, m, nm), coords, total);
      blk.branches.push_back(b6);
      Branch b4;
      b4.tag = blk.name + "/bd_pair" + std::to_string(rg);
      ray_rows(b4.weq, b4.wineq, Rg, dray);
      ray_rows(b4.weq, b4.wineq, Rh, dhat);
      b4.pieces = {lift_piece(both_bd_piece(dray, dhat, m, nm), coords, total)};
      blk.branches.push_back(b4);
    }
    return;
  }

  // m >= 3
  Branch bg;
  bg.tag = blk.name + "/dG_inK";
  bg.wsoc.push_back({Rg, false});
  for (int i = 0; i < m; ++i) bg.weq.push_back(Rh.row(i));
  bg.pieces = {pc_u0()};
  Branch bh;
  bh.tag = blk.name + "/dH_inK";
  bh.wsoc.push_back({Rh, false});
  for (int i = 0; i < m; ++i) bh.weq.push_back(Rg.row(i));
  bh.pieces = {pc_v0()};
  blk.branches.push_back(bg);
  blk.branches.push_back(bh);

  Mat RgC = Rg, RhC = Rh;
  Branch b5;
  b5.tag = blk.name + "/dG_bd";
  b5.wsoc.push_back({Rg, true});
  for (int i = 0; i < m; ++i) b5.weq.push_back(Rh.row(i));
  b5.wdep = true;
  b5.pieces_at = [RgC, coords, total, nm, m](const Vec& w) {
    Vec d = RgC * w;
    return lift_all(ray_pieces_xbd(reflect(d), m, nm), coords, total);
  };
  blk.branches.push_back(b5);
  Branch b6;
  b6.tag = blk.name + "/dH_bd";
  b6.wsoc.push_back({Rh, true});
  for (int i = 0; i < m; ++i) b6.weq.push_back(Rg.row(i));
  b6.wdep = true;
  b6.pieces_at = [RhC, coords, total, nm, m](const Vec& w) {
    Vec d = RhC * w;
    return lift_all(ray_pieces_ybd(reflect(d), m, nm), coords, total);
  };
  blk.branches.push_back(b6);
  Branch b4;
  b4.tag = blk.name + "/bd_pair";
  b4.wsoc.push_back({Rg, true});
  b4.wsoc.push_back({Rh, true});
  b4.wdep = true;
  b4.pieces_at = [RgC, RhC, coords, total, nm, m](const Vec& w) {
    Vec d = RgC * w, dw = RhC * w;
    if (std::abs(d.dot(dw)) > 1e-7 * std::max(1.0, d.norm() * dw.norm()))
      return std::vector<ConePiece>{};
    return std::vector<ConePiece>{
        lift_piece(both_bd_piece(d, dw, m, nm), coords, total)};
  };
  blk.branches.push_back(b4);
}

BlockModel build_blocks(const ProblemInstance& inst, const CheckOptions& opt) {
  BlockModel bm;
  bm.n = inst.n;
  bm.l = inst.F.out_dim();
  bm.mtot = inst.total_soc_dim();
  bm.total = bm.l + 2 * bm.mtot;
  bm.P = stacked_jacobian(inst);
  bm.kernel = bm.P.transpose();
  Vec fv = bm.l > 0 ? eval_map(inst.F, inst.z_star).value : Vec();
  Vec gv = bm.mtot > 0 ? eval_map(inst.G, inst.z_star).value : Vec();
  Vec hv = bm.mtot > 0 ? eval_map(inst.H, inst.z_star).value : Vec();

  for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
    const auto& lb = inst.lambda_structure.blocks[b];
    int off = inst.lambda_offset(static_cast<int>(b));
    switch (lb.type) {
      case LambdaBlock::Type::EqZero: {
        BlockInfo blk;
        blk.kind = BlockInfo::Eq;
        blk.name = "L" + std::to_string(b) + ":eq";
        blk.lambda_block = static_cast<int>(b);
        for (int i = 0; i < lb.dim; ++i) blk.coords.push_back(off + i);
        blk.nnamcq_pieces = {ConePiece(bm.total, blk.name)};
        Branch br;
        br.tag = blk.name;
        for (int i = 0; i < lb.dim; ++i) br.weq.push_back(bm.P.row(off + i));
        br.pieces = blk.nnamcq_pieces;
        blk.branches = {br};
        bm.blocks.push_back(std::move(blk));
        break;
      }
      case LambdaBlock::Type::IneqNonpos: {
        for (int i = 0; i < lb.dim; ++i) {
          BlockInfo blk;
          blk.kind = BlockInfo::IneqRow;
          blk.name = "L" + std::to_string(b) + ":g" + std::to_string(i);
          blk.lambda_block = static_cast<int>(b);
          blk.coords = {off + i};
          blk.active = std::abs(fv(off + i)) <= kActTol;
          Vec grad = bm.P.row(off + i);
          ConePiece zero_piece(bm.total, blk.name + "/zero");
          zero_piece.add_zero_range(off + i, 1);
          if (!blk.active) {
            blk.nnamcq_pieces = {zero_piece};
            Branch br;
            br.tag = blk.name + "/inactive";
            br.pieces = blk.nnamcq_pieces;
            blk.branches = {br};
          } else {
            ConePiece nonneg(bm.total, blk.name + "/nonneg");
            Vec row = Vec::Zero(bm.total);
            row(off + i) = -1.0;
            nonneg.add_ineq_row(row);
            blk.nnamcq_pieces = {nonneg};
            Branch strict;
            strict.tag = blk.name + "/slack";
            strict.wineq.push_back(grad);
            strict.pieces = {zero_piece};
            Branch tight;
            tight.tag = blk.name + "/tight";
            tight.weq.push_back(grad);
            tight.pieces = {nonneg};
            blk.branches = {strict, tight};
          }
          bm.blocks.push_back(std::move(blk));
        }
        break;
      }
      case LambdaBlock::Type::VecComp: {
        for (int i = 0; i < lb.dim; ++i) {
          BlockInfo blk;
          blk.kind = BlockInfo::VecPair;
          blk.name = "L" + std::to_string(b) + ":pair" + std::to_string(i);
          blk.lambda_block = static_cast<int>(b);
          int cu = off + 2 * i, cv = off + 2 * i + 1;
          blk.coords = {cu, cv};
          blk.base_x = fv.segment(cu, 1);
          blk.base_y = fv.segment(cv, 1);
          blk.Rg = bm.P.row(cu);
          blk.Rh = bm.P.row(cv);
          double phi = fv(cu), psi = fv(cv);
          ConePiece pu0(bm.total, blk.name + "/u0");
          pu0.add_zero_range(cu, 1);
          ConePiece pv0(bm.total, blk.name + "/v0");
          pv0.add_zero_range(cv, 1);
          if (phi > kActTol) {
            blk.nnamcq_pieces = {pu0};
            Branch br;
            br.tag = blk.name + "/phi_pos";
            br.weq.push_back(blk.Rh.row(0));
            br.pieces = blk.nnamcq_pieces;
            blk.branches = {br};
          } else if (psi > kActTol) {
            blk.nnamcq_pieces = {pv0};
            Branch br;
            br.tag = blk.name + "/psi_pos";
            br.weq.push_back(blk.Rg.row(0));
            br.pieces = blk.nnamcq_pieces;
            blk.branches = {br};
          } else {
            ConePiece pneg(bm.total, blk.name + "/neg_neg");
            Vec r1 = Vec::Zero(bm.total), r2 = Vec::Zero(bm.total);
            r1(cu) = 1.0;
            r2(cv) = 1.0;
            pneg.add_ineq_row(r1);
            pneg.add_ineq_row(r2);
            blk.nnamcq_pieces = {pneg, pu0, pv0};
            Branch b1;
            b1.tag = blk.name + "/dphi";
            b1.wineq.push_back(Vec(-blk.Rg.row(0)));
            b1.weq.push_back(blk.Rh.row(0));
            b1.pieces = {pu0};
            Branch b2;
            b2.tag = blk.name + "/dpsi";
            b2.weq.push_back(blk.Rg.row(0));
            b2.wineq.push_back(Vec(-blk.Rh.row(0)));
            b2.pieces = {pv0};
            Branch b3;
            b3.tag = blk.name + "/dzero";
            b3.weq.push_back(blk.Rg.row(0));
            b3.weq.push_back(blk.Rh.row(0));
            b3.pieces = blk.nnamcq_pieces;
            blk.branches = {b1, b2, b3};
          }
          bm.blocks.push_back(std::move(blk));
        }
        break;
      }
      case LambdaBlock::Type::SocComp: {
        BlockInfo blk;
        blk.kind = BlockInfo::SocPair;
        blk.name = "L" + std::to_string(b) + ":soccomp";
        blk.lambda_block = static_cast<int>(b);
        int m = lb.dim;
        for (int j = 0; j < 2 * m; ++j) blk.coords.push_back(off + j);
        blk.base_x = fv.segment(off, m);
        blk.base_y = fv.segment(off + m, m);
        blk.Rg = bm.P.middleRows(off, m);
        blk.Rh = bm.P.middleRows(off + m, m);
        add_soc_pair_branches(blk, bm.total, opt);
        bm.blocks.push_back(std::move(blk));
        break;
      }
      case LambdaBlock::Type::Soc: {
        BlockInfo blk;
        blk.kind = BlockInfo::SocCone;
        blk.name = "L" + std::to_string(b) + ":soc";
        blk.lambda_block = static_cast<int>(b);
        int m = lb.dim;
        for (int j = 0; j < m; ++j) blk.coords.push_back(off + j);
        blk.base_x = fv.segment(off, m);
        Mat R = bm.P.middleRows(off, m);
        blk.Rg = R;
        ConeRegion reg = classify_point(blk.base_x, opt.tol);
        ConePiece zero_piece(bm.total, blk.name + "/0");
        zero_piece.add_zero_range(off, m);
        if (reg == ConeRegion::InteriorK) {
          blk.nnamcq_pieces = {zero_piece};
          Branch br;
          br.tag = blk.name + "/int";
          br.pieces = blk.nnamcq_pieces;
          blk.branches = {br};
        } else if (reg == ConeRegion::BoundaryKNonzero) {
          Vec xh = reflect(blk.base_x);
          ConePiece ray(m, blk.name + "/ray");
          ray.add_neg_ray(0, xh);
          ConePiece gray = lift_piece(ray, blk.coords, bm.total);
          blk.nnamcq_pieces = {gray};
          Vec trow = xh.transpose() * R;
          Branch slack;
          slack.tag = blk.name + "/t_int";
          slack.wineq.push_back(Vec(-trow));
          slack.pieces = {zero_piece};
          Branch tight;
          tight.tag = blk.name + "/t_bd";
          tight.weq.push_back(trow);
          tight.pieces = {gray};
          blk.branches = {slack, tight};
        } else if (reg == ConeRegion::Zero) {
          ConePiece negk_local(m, blk.name + "/negK");
          negk_local.add_neg_cone(0, m);
          ConePiece negk = lift_piece(negk_local, blk.coords, bm.total);
          blk.nnamcq_pieces = {negk};
          if (m == 1) {
            Branch pos;
            pos.tag = blk.name + "/d_pos";
            pos.wineq.push_back(Vec(-R.row(0)));
            pos.pieces = {zero_piece};
            Branch zero;
            zero.tag = blk.name + "/d_zero";
            zero.weq.push_back(R.row(0));
            zero.pieces = {negk};
            blk.branches = {pos, zero};
          } else if (m == 2) {
            Branch in;
            in.tag = blk.name + "/d_inK";
            add_k2_rows(in.wineq, R);
            in.pieces = {zero_piece};
            blk.branches.push_back(in);
            Vec rays[2] = {(Vec(2) << 1, 1).finished(), (Vec(2) << 1, -1).finished()};
            for (int rix = 0; rix < 2; ++rix) {
              Branch bd;
              bd.tag = blk.name + "/d_ray" + std::to_string(rix);
              Vec perp(2);
              perp << rays[rix](1), -rays[rix](0);
              bd.weq.push_back(Vec(perp.transpose() * R));
              bd.wineq.push_back(Vec(-R.row(0)));
              ConePiece local(m, blk.name + "/ray" + std::to_string(rix));
              local.add_neg_ray(0, reflect(rays[rix]));
              bd.pieces = {lift_piece(local, blk.coords, bm.total)};
              blk.branches.push_back(bd);
            }
            Branch zero;
            zero.tag = blk.name + "/d_zero";
            for (int i = 0; i < 2; ++i) zero.weq.push_back(R.row(i));
            zero.pieces = {negk};
            blk.branches.push_back(zero);
          } else {
            Branch in;
            in.tag = blk.name + "/d_inK";
            in.wsoc.push_back({R, false});
            in.pieces = {zero_piece};
            Branch bd;
            bd.tag = blk.name + "/d_bd";
            bd.wsoc.push_back({R, true});
            bd.wdep = true;
            auto coords = blk.coords;
            int total = bm.total;
            std::string nm = blk.name;
            Mat RC = R;
            bd.pieces_at = [RC, coords, total, nm, m](const Vec& w) {
              Vec dir = RC * w;
              ConePiece local(m, nm + "/ray_at_w");
              local.add_neg_ray(0, reflect(dir));
              return std::vector<ConePiece>{lift_piece(local, coords, total)};
            };
            Branch zero;
            zero.tag = blk.name + "/d_zero";
            for (int i = 0; i < m; ++i) zero.weq.push_back(R.row(i));
            zero.pieces = {negk};
            blk.branches = {in, bd, zero};
          }
        } else {
          throw LoadError("soc block of Lambda is infeasible at z_star");
        }
        bm.blocks.push_back(std::move(blk));
        break;
      }
    }
  }

  for (size_t i = 0; i < inst.soc_dims.size(); ++i) {
    BlockInfo blk;
    blk.kind = BlockInfo::SocPair;
    blk.name = "S" + std::to_string(i);
    blk.soc_pair = static_cast<int>(i);
    int m = inst.soc_dims[i];
    int offg = bm.l + inst.soc_offset(static_cast<int>(i));
    int offh = offg + bm.mtot;
    for (int j = 0; j < m; ++j) blk.coords.push_back(offg + j);
    for (int j = 0; j < m; ++j) blk.coords.push_back(offh + j);
    blk.base_x = gv.segment(offg - bm.l, m);
    blk.base_y = hv.segment(offg - bm.l, m);
    blk.Rg = bm.P.middleRows(offg, m);
    blk.Rh = bm.P.middleRows(offh, m);
    add_soc_pair_branches(blk, bm.total, opt);
    bm.blocks.push_back(std::move(blk));
  }
  return bm;
}

// --------------------------------------------------------------------------
// Piece-combination enumeration: full product over exact pieces, then each
// sampled piece combined with exact pieces of the remaining blocks.
// --------------------------------------------------------------------------

struct ComboResult {
  bool violated = false;
  Vec lambda;
  std::string labels;
  bool unresolved = false;
  int combos = 0;
};

ComboResult check_combos(const BlockModel& bm,
                         const std::vector<std::vector<const ConePiece*>>& lists,
                         const std::vector<int>& conclusion,
                         const Vec* hessian_row, std::uint64_t seed) {
  ComboResult out;
  size_t nb = lists.size();
  std::vector<std::vector<const ConePiece*>> exact(nb), sampled(nb);
  for (size_t b = 0; b < nb; ++b) {
    for (const auto* p : lists[b])
      (p->sampled ? sampled[b] : exact[b]).push_back(p);
    if (exact[b].empty() && sampled[b].empty()) return out;  // empty cone
  }

  auto run_piece = [&](const std::vector<const ConePiece*>& parts) -> bool {
    ConePiece merged = merge_pieces(bm.total, parts);
    if (hessian_row) merged.add_ineq_row(*hessian_row);
    ++out.combos;
    auto r = find_nonzero(bm.kernel, merged, conclusion, seed);
    if (r.found) {
      out.violated = true;
      out.lambda = r.lambda;
      out.labels = merged.label;
      return true;
    }
    out.unresolved = out.unresolved || r.unresolved;
    return false;
  };

  // exact product
  std::vector<size_t> idx(nb, 0);
  bool overflow = false;
  long long count = 1;
  for (size_t b = 0; b < nb; ++b) {
    if (exact[b].empty()) { count = 0; break; }
    count *= static_cast<long long>(exact[b].size());
    if (count > kComboCap) { overflow = true; break; }
  }
  if (overflow) {
    out.unresolved = true;
    return out;
  }
  if (count > 0) {
    std::vector<const ConePiece*> parts(nb);
    std::function<bool(size_t)> rec = [&](size_t b) -> bool {
      if (b == nb) return run_piece(parts);
      for (const auto* p : exact[b]) {
        parts[b] = p;
        if (rec(b + 1)) return true;
      }
      return false;
    };
    if (rec(0)) return out;
  }

  // sampled hunting: one sampled piece at a time
  for (size_t sb = 0; sb < nb; ++sb) {
    if (sampled[sb].empty()) continue;
    bool others_ok = true;
    for (size_t b = 0; b < nb; ++b)
      if (b != sb && exact[b].empty()) others_ok = false;
    if (!others_ok) continue;
    std::vector<const ConePiece*> parts(nb);
    std::function<bool(size_t)> rec = [&](size_t b) -> bool {
      if (b == nb) return run_piece(parts);
      if (b == sb) {
        for (const auto* p : sampled[sb]) {
          parts[b] = p;
          if (rec(b + 1)) return true;
        }
        return false;
      }
      for (const auto* p : exact[b]) {
        parts[b] = p;
        if (rec(b + 1)) return true;
      }
      return false;
    };
    if (rec(0)) return out;
  }
  return out;
}

// --------------------------------------------------------------------------
// Direction-pattern processing.
// --------------------------------------------------------------------------

struct PatternData {
  std::vector<int> branch_of_block;
  std::vector<std::string> tags;
  std::vector<Vec> weq, wineq;
  std::vector<DirectionPattern::SocConstraint> wsoc;
  bool any_wdep = false;
  bool any_sampled = false;
};

std::vector<PatternData> enumerate_patterns(const BlockModel& bm,
                                            const std::vector<int>& block_subset) {
  std::vector<PatternData> out;
  long long count = 1;
  for (int b : block_subset) {
    count *= static_cast<long long>(bm.blocks[b].branches.size());
    if (count > kComboCap) throw std::runtime_error("pattern enumeration overflow");
  }
  std::vector<int> idx(block_subset.size(), 0);
  while (true) {
    PatternData p;
    p.branch_of_block.assign(bm.blocks.size(), -1);
    for (size_t k = 0; k < block_subset.size(); ++k) {
      const auto& blk = bm.blocks[block_subset[k]];
      const auto& br = blk.branches[idx[k]];
      p.branch_of_block[block_subset[k]] = idx[k];
      p.tags.push_back(br.tag);
      for (const auto& r : br.weq) p.weq.push_back(r);
      for (const auto& r : br.wineq) p.wineq.push_back(r);
      for (const auto& s : br.wsoc) p.wsoc.push_back(s);
      p.any_wdep = p.any_wdep || br.wdep;
      p.any_sampled = p.any_sampled || br.sampled_family;
      for (const auto& pc : br.pieces)
        if (pc.sampled) p.any_sampled = true;
    }
    out.push_back(std::move(p));
    int k = static_cast<int>(block_subset.size()) - 1;
    while (k >= 0) {
      if (++idx[k] < static_cast<int>(bm.blocks[block_subset[k]].branches.size()))
        break;
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

Mat rows_to_mat(const std::vector<Vec>& rows, int n) {
  Mat m(static_cast<int>(rows.size()), n);
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<int>(i)) = rows[i];
  return m;
}

bool pattern_accepts(const PatternData& p, const Vec& w, double tol) {
  double s = rel_scale(tol, w.norm());
  for (const auto& r : p.weq)
    if (std::abs(r.dot(w)) > s * std::max(1.0, r.norm())) return false;
  for (const auto& r : p.wineq)
    if (r.dot(w) > s * std::max(1.0, r.norm())) return false;
  for (const auto& c : p.wsoc) {
    Vec img = c.R * w;
    if (c.boundary) {
      if (classify_point(img, tol) != ConeRegion::BoundaryKNonzero) return false;
    } else {
      if (!in_cone(img, tol)) return false;
    }
  }
  return true;
}

// Slice LP search for a nonzero direction in the pattern cone (outer
// relaxation of the cone constraints); used both as an emptiness certificate
// and as a witness generator.
struct WSearch {
  bool certified_empty = true;
  bool exact_found = false;
  Vec w;
};

WSearch find_direction(const PatternData& p, int n, std::uint64_t seed) {
  WSearch out;
  std::vector<std::vector<Vec>> cuts(p.wsoc.size());
  for (size_t c = 0; c < p.wsoc.size(); ++c)
    cuts[c] = initial_cut_dirs(static_cast<int>(p.wsoc[c].R.rows()), seed);
  for (int j = 0; j < n; ++j) {
    for (double s : {1.0, -1.0}) {
      auto cl = cuts;
      for (int round = 0; round < kCutRounds; ++round) {
        LpFeasibility lp(n);
        for (const auto& r : p.weq) lp.add_eq(r, 0.0);
        for (const auto& r : p.wineq) lp.add_ineq(r, 0.0);
        for (size_t c = 0; c < p.wsoc.size(); ++c) {
          const Mat& R = p.wsoc[c].R;
          for (const Vec& q : cl[c]) {
            // K is the intersection of {z1 - q'z2 >= 0}; emit -(Rw)1 + q'(Rw)2 <= 0
            Vec row = -R.row(0);
            row += q.transpose() * R.bottomRows(R.rows() - 1);
            lp.add_ineq(row, 0.0);
          }
        }
        lp.fix_var(j, s);
        auto r = lp.solve(kLpTol);
        if (!r.feasible) break;
        out.certified_empty = false;
        if (pattern_accepts(p, r.point, 1e-7)) {
          out.exact_found = true;
          out.w = r.point / r.point.norm();
          return out;
        }
        bool refined = false;
        for (size_t c = 0; c < p.wsoc.size(); ++c) {
          Vec img = p.wsoc[c].R * r.point;
          if (!in_cone(img, 1e-9)) {
            double tn = img.tail(img.size() - 1).norm();
            if (tn > 1e-14) {
              cl[c].push_back(Vec(img.tail(img.size() - 1) / tn));
              refined = true;
            }
          }
        }
        if (!refined) break;  // candidate violates only boundary-type rows
      }
    }
  }
  return out;
}

std::vector<int> all_blocks(const BlockModel& bm) {
  std::vector<int> v(bm.blocks.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
  return v;
}

std::vector<int> all_coords(const BlockModel& bm) {
  std::vector<int> v(bm.total);
  for (int i = 0; i < bm.total; ++i) v[i] = i;
  return v;
}

// Affine span of the pattern cone: null space of the equality rows plus the
// implicit equalities among the inequality rows.
Mat pattern_span(const PatternData& p, int n, std::uint64_t seed) {
  std::vector<Vec> eqs = p.weq;
  for (size_t i = 0; i < p.wineq.size(); ++i) {
    PatternData q = p;
    q.wineq.push_back(Vec(-p.wineq[i]));  // r w >= 1 reachable?
    LpFeasibility lp(n);
    for (const auto& r : q.weq) lp.add_eq(r, 0.0);
    for (size_t k = 0; k < p.wineq.size(); ++k) lp.add_ineq(p.wineq[k], 0.0);
    for (const auto& c : p.wsoc) {
      const Mat& R = c.R;
      for (const Vec& cut : initial_cut_dirs(static_cast<int>(R.rows()), seed)) {
        Vec row = -R.row(0);
        row += cut.transpose() * R.bottomRows(R.rows() - 1);
        lp.add_ineq(row, 0.0);
      }
    }
    lp.add_ineq(p.wineq[i], -1.0);  // strictly negative value reachable?
    if (!lp.solve(kLpTol).feasible) eqs.push_back(p.wineq[i]);
  }
  if (eqs.empty()) return Mat::Identity(n, n);
  Mat A = rows_to_mat(eqs, n);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  cod.setThreshold(1e-10);
  return cod.kernel();
}

struct EngineResult {
  CqStatus status = CqStatus::Certified;
  std::optional<CqCertificate> certificate;
  int samples_used = 0;
  int pieces_examined = 0;
  int patterns_total = 0;
  int patterns_pruned = 0;
  std::string note;
};

// Core of the direction-based checks: for every per-block tangent-branch
// pattern, decide whether a nonzero multiplier survives the stationarity
// system against the pattern's directional normal cone pieces.
EngineResult run_direction_engine(
    const BlockModel& bm, const std::vector<int>& block_subset,
    const std::vector<int>& conclusion, const CheckOptions& opt,
    const std::function<Vec(const Vec&)>& hessian_row_at) {
  EngineResult res;
  if (conclusion.empty()) {
    res.note = "conclusion multiplier set is empty";
    return res;
  }
  auto patterns = enumerate_patterns(bm, block_subset);
  res.patterns_total = static_cast<int>(patterns.size());
  bool capped = false;
  std::string cap_note;

  for (const auto& pat : patterns) {
    WSearch ws = find_direction(pat, bm.n, opt.seed);
    if (ws.certified_empty) {
      ++res.patterns_pruned;
      continue;
    }
    Mat span = pattern_span(pat, bm.n, opt.seed);
    int dim = static_cast<int>(span.cols());
    if (dim == 0) {
      ++res.patterns_pruned;
      continue;
    }

    auto pieces_for = [&](const Vec* w) {
      std::vector<std::vector<const ConePiece*>> lists;
      std::vector<std::vector<ConePiece>> storage;
      for (int b : block_subset) {
        const auto& br = bm.blocks[b].branches[pat.branch_of_block[b]];
        if (br.wdep) {
          storage.push_back(br.pieces_at(*w));
        } else {
          storage.push_back(br.pieces);
        }
      }
      for (auto& v : storage) {
        std::vector<const ConePiece*> ptrs;
        for (auto& p : v) ptrs.push_back(&p);
        lists.push_back(ptrs);
      }
      return std::make_pair(std::move(storage), std::move(lists));
    };

    auto try_violation = [&](const Vec& w, bool exact_direction) -> bool {
      auto [storage, lists] = pieces_for(&w);
      Vec hrow;
      const Vec* hrow_ptr = nullptr;
      if (hessian_row_at) {
        hrow = hessian_row_at(w);
        if (hrow.lpNorm<Eigen::Infinity>() > 0) hrow_ptr = &hrow;
      }
      auto cr = check_combos(bm, lists, conclusion, hrow_ptr, opt.seed);
      res.pieces_examined += cr.combos;
      if (cr.violated && exact_direction) {
        CqCertificate cert;
        cert.w = w;
        cert.lambda = cr.lambda;
        cert.piece_labels = {cr.labels};
        res.certificate = cert;
        res.status = CqStatus::Violated;
        return true;
      }
      if (cr.unresolved) {
        capped = true;
        cap_note = "cut refinement exhausted in pattern " + pat.tags.front();
      }
      if (cr.violated && !exact_direction) {
        capped = true;
        cap_note = "multiplier found but no verified direction in pattern";
      }
      return false;
    };

    bool needs_direction = pat.any_wdep || hessian_row_at != nullptr;
    if (dim == 1) {
      // The span is a line: the pattern is one or two exact rays.
      Vec b0 = span.col(0).normalized();
      bool any_ray = false;
      for (double s : {1.0, -1.0}) {
        Vec ray = s * b0;
        if (!pattern_accepts(pat, ray, 1e-7)) continue;
        any_ray = true;
        if (try_violation(ray, true)) return res;
      }
      if (!any_ray) {
        ++res.patterns_pruned;
        continue;
      }
      if (pat.any_sampled) {
        capped = true;
        cap_note = "parametric normal-cone families sampled in " + pat.tags.front();
      }
      continue;
    }

    if (!needs_direction) {
      // Pieces do not vary over the pattern: one multiplier analysis covers
      // every direction; a violation needs a verified witness direction.
      auto [storage, lists] = pieces_for(nullptr);
      auto cr = check_combos(bm, lists, conclusion, nullptr, opt.seed);
      res.pieces_examined += cr.combos;
      if (cr.violated) {
        if (ws.exact_found) {
          CqCertificate cert;
          cert.w = ws.w;
          cert.lambda = cr.lambda;
          cert.piece_labels = {cr.labels};
          res.certificate = cert;
          res.status = CqStatus::Violated;
          return res;
        }
        capped = true;
        cap_note = "multiplier found but witness direction unverified in " +
                   pat.tags.front();
      }
      if (cr.unresolved) {
        capped = true;
        cap_note = "cut refinement exhausted in pattern " + pat.tags.front();
      }
      if (pat.any_sampled) {
        capped = true;
        cap_note = "parametric normal-cone families sampled in " + pat.tags.front();
      }
      continue;
    }

    // Direction-dependent pieces: deterministic low-discrepancy sampling of
    // the pattern within its span. Sound for violations only.
    int accepted = 0;
    for (std::uint64_t idx = 1; idx <= 60ULL * opt.n_dir_samples &&
                                accepted < opt.n_dir_samples;
         ++idx) {
      Vec s = sphere_point(idx, dim, opt.seed);
      Vec w = span * s;
      double nw = w.norm();
      if (nw < 1e-12) continue;
      w /= nw;
      if (!pattern_accepts(pat, w, 1e-7)) continue;
      ++accepted;
      ++res.samples_used;
      if (try_violation(w, true)) return res;
    }
    capped = true;
    cap_note = accepted > 0
                   ? "direction-dependent pattern sampled: " + pat.tags.front()
                   : "no samples accepted in pattern " + pat.tags.front();
  }

  if (capped) {
    res.status = CqStatus::InconclusiveSampled;
    res.note = cap_note;
  }
  return res;
}

std::vector<int> conclusion_complement(const BlockModel& bm,
                                       const std::vector<int>& keep_out_blocks) {
  std::vector<bool> excluded(bm.total, false);
  for (int b : keep_out_blocks)
    for (int c : bm.blocks[b].coords) excluded[c] = true;
  std::vector<int> out;
  for (int c = 0; c < bm.total; ++c)
    if (!excluded[c]) out.push_back(c);
  return out;
}

CqVerdict nnamcq_like(const ProblemInstance& inst, const BlockModel& bm,
                      const std::vector<int>& conclusion, const CheckOptions& opt,
                      const std::string& name) {
  CqVerdict v;
  v.condition_name = name;
  if (conclusion.empty()) {
    v.status = CqStatus::Certified;
    v.note = "conclusion multiplier set is empty";
    return v;
  }
  std::vector<std::vector<const ConePiece*>> lists;
  bool sampled_any = false;
  for (const auto& blk : bm.blocks) {
    std::vector<const ConePiece*> ptrs;
    for (const auto& p : blk.nnamcq_pieces) ptrs.push_back(&p);
    lists.push_back(ptrs);
    sampled_any = sampled_any || blk.nnamcq_sampled;
  }
  auto cr = check_combos(bm, lists, conclusion, nullptr, opt.seed);
  v.pieces_examined = cr.combos;
  if (cr.violated) {
    std::string why;
    if (!verify_certificate(inst, cr.lambda, nullptr, opt.tol, &why)) {
      v.status = CqStatus::InconclusiveSampled;
      v.note = "candidate multiplier failed re-verification: " + why;
      return v;
    }
    v.status = CqStatus::Violated;
    CqCertificate cert;
    cert.lambda = cr.lambda;
    cert.piece_labels = {cr.labels};
    v.certificate = cert;
    return v;
  }
  if (cr.unresolved || sampled_any) {
    v.status = CqStatus::InconclusiveSampled;
    v.note = cr.unresolved ? "cut refinement exhausted"
                           : "origin-case parametric families sampled";
    return v;
  }
  v.status = CqStatus::Certified;
  return v;
}

CqVerdict foscms_like(const ProblemInstance& inst, const BlockModel& bm,
                      const std::vector<int>& conclusion, const CheckOptions& opt,
                      const std::string& name,
                      const std::function<Vec(const Vec&)>& hessian_row_at) {
  CqVerdict v;
  v.condition_name = name;
  // The limiting-cone analysis dominates the directional one.
  CqVerdict nn = nnamcq_like(inst, bm, conclusion, opt, name);
  if (nn.status == CqStatus::Certified) {
    nn.note = "implied by the limiting-normal-cone analysis";
    return nn;
  }
  auto res = run_direction_engine(bm, all_blocks(bm), conclusion, opt,
                                  hessian_row_at);
  v.samples_used = res.samples_used;
  v.pieces_examined = res.pieces_examined;
  if (res.status == CqStatus::Violated) {
    std::string why;
    if (verify_certificate(inst, res.certificate->lambda, &res.certificate->w,
                           opt.tol, &why)) {
      v.status = CqStatus::Violated;
      v.certificate = res.certificate;
      return v;
    }
    v.status = CqStatus::InconclusiveSampled;
    v.note = "candidate certificate failed re-verification: " + why;
    return v;
  }
  v.status = res.status;
  v.note = res.note;
  if (v.status == CqStatus::Certified && res.patterns_total == res.patterns_pruned)
    v.note = "no nonzero critical direction";
  return v;
}

}  // namespace

CqVerdict check_nnamcq(const ProblemInstance& inst, const CheckOptions& opt) {
  auto bm = build_blocks(inst, opt);
  return nnamcq_like(inst, bm, all_coords(bm), opt, "nnamcq");
}

CriticalDirectionCone build_critical_directions(const ProblemInstance& inst,
                                                const CheckOptions& opt) {
  auto bm = build_blocks(inst, opt);
  auto patterns = enumerate_patterns(bm, all_blocks(bm));
  CriticalDirectionCone out;
  for (const auto& p : patterns) {
    WSearch ws = find_direction(p, bm.n, opt.seed);
    if (ws.certified_empty) {
      ++out.pruned_empty;
      continue;
    }
    DirectionPattern dp;
    dp.case_tags = p.tags;
    dp.w_eq = rows_to_mat(p.weq, bm.n);
    dp.w_ineq = rows_to_mat(p.wineq, bm.n);
    dp.w_soc = p.wsoc;
    out.patterns.push_back(std::move(dp));
  }
  return out;
}

CqVerdict check_foscms(const ProblemInstance& inst, const CheckOptions& opt) {
  auto bm = build_blocks(inst, opt);
  return foscms_like(inst, bm, all_coords(bm), opt, "foscms", nullptr);
}

CqVerdict check_split_foscms(const ProblemInstance& inst,
                             const SplitPartition& subsystem_one,
                             const CheckOptions& opt) {
  auto bm = build_blocks(inst, opt);
  int nlb = static_cast<int>(inst.lambda_structure.blocks.size());
  int nsp = static_cast<int>(inst.soc_dims.size());
  for (int b : subsystem_one.lambda_blocks)
    if (b < 0 || b >= nlb) throw PartitionError("invalid lambda block index");
  for (int s : subsystem_one.soc_pairs)
    if (s < 0 || s >= nsp) throw PartitionError("invalid soc pair index");
  std::vector<int> sub_blocks;
  for (size_t i = 0; i < bm.blocks.size(); ++i) {
    const auto& blk = bm.blocks[i];
    bool in_one = false;
    for (int b : subsystem_one.lambda_blocks)
      if (blk.lambda_block == b) in_one = true;
    for (int s : subsystem_one.soc_pairs)
      if (blk.soc_pair == s) in_one = true;
    if (in_one) sub_blocks.push_back(static_cast<int>(i));
  }
  auto conclusion = conclusion_complement(bm, sub_blocks);
  return foscms_like(inst, bm, conclusion, opt, "split_foscms", nullptr);
}

namespace {

// Equality/inequality subsystem of Lambda gathered into one view.
struct EqIneqSystem {
  std::vector<int> ineq_coords;  // F-row indices, with activity flags
  std::vector<bool> ineq_active;
  std::vector<int> eq_coords;
  Mat grad_act;  // gradients of active inequalities
  Mat grad_eq;
  bool all_affine = true;
  bool any = false;
};

EqIneqSystem gather_eq_ineq(const ProblemInstance& inst) {
  EqIneqSystem s;
  if (inst.F.out_dim() == 0) return s;
  Vec fv = eval_map(inst.F, inst.z_star).value;
  Mat J = eval_map(inst.F, inst.z_star).jacobian;
  std::vector<int> act;
  for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
    const auto& lb = inst.lambda_structure.blocks[b];
    int off = inst.lambda_offset(static_cast<int>(b));
    if (lb.type == LambdaBlock::Type::IneqNonpos) {
      for (int i = 0; i < lb.dim; ++i) {
        s.ineq_coords.push_back(off + i);
        s.ineq_active.push_back(std::abs(fv(off + i)) <= kActTol);
        if (s.ineq_active.back()) act.push_back(off + i);
        s.all_affine = s.all_affine && inst.F.row_is_affine(off + i);
        s.any = true;
      }
    } else if (lb.type == LambdaBlock::Type::EqZero) {
      for (int i = 0; i < lb.dim; ++i) {
        s.eq_coords.push_back(off + i);
        s.all_affine = s.all_affine && inst.F.row_is_affine(off + i);
        s.any = true;
      }
    }
  }
  s.grad_act.resize(static_cast<int>(act.size()), inst.n);
  for (size_t i = 0; i < act.size(); ++i) s.grad_act.row(static_cast<int>(i)) = J.row(act[i]);
  s.grad_eq.resize(static_cast<int>(s.eq_coords.size()), inst.n);
  for (size_t i = 0; i < s.eq_coords.size(); ++i)
    s.grad_eq.row(static_cast<int>(i)) = J.row(s.eq_coords[i]);
  return s;
}

int matrix_rank(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

// lambda != 0 with grad_act' lg + grad_eq' lh = 0, lg >= 0: the shared
// violation search of MFCQ and NNAMCQ for the eq/ineq subsystem.
NonzeroSearch eq_ineq_multiplier(const EqIneqSystem& s, int n, std::uint64_t seed,
                                 const Vec* hessian_row) {
  int na = static_cast<int>(s.grad_act.rows());
  int nh = static_cast<int>(s.grad_eq.rows());
  int total = na + nh;
  NonzeroSearch out;
  if (total == 0) return out;
  ConePiece piece(total, "eq_ineq");
  for (int i = 0; i < na; ++i) {
    Vec row = Vec::Zero(total);
    row(i) = -1.0;
    piece.add_ineq_row(row);
  }
  if (hessian_row) piece.add_ineq_row(*hessian_row);
  Mat kernel(n, total);
  if (na > 0) kernel.leftCols(na) = s.grad_act.transpose();
  if (nh > 0) kernel.rightCols(nh) = s.grad_eq.transpose();
  std::vector<int> slices(total);
  for (int i = 0; i < total; ++i) slices[i] = i;
  return find_nonzero(kernel, piece, slices, seed);
}

// Embeds an (active-ineq, eq) multiplier into the global stack.
Vec embed_eq_ineq_lambda(const ProblemInstance& inst, const EqIneqSystem& s,
                         const Vec& lam) {
  int l = inst.F.out_dim();
  int m = inst.total_soc_dim();
  Vec full = Vec::Zero(l + 2 * m);
  int k = 0;
  for (size_t i = 0; i < s.ineq_coords.size(); ++i)
    if (s.ineq_active[i]) full(s.ineq_coords[i]) = lam(k++);
  for (size_t i = 0; i < s.eq_coords.size(); ++i)
    full(s.eq_coords[i]) = lam(k++);
  return full;
}

Vec soscms_hessian_row(const ProblemInstance& inst, const EqIneqSystem& s,
                       const Vec& w) {
  int na = static_cast<int>(s.grad_act.rows());
  int nh = static_cast<int>(s.grad_eq.rows());
  Vec row = Vec::Zero(na + nh);
  if (inst.F.kind != MapSpec::Kind::Quadratic) return row;
  int k = 0;
  for (size_t i = 0; i < s.ineq_coords.size(); ++i)
    if (s.ineq_active[i]) row(k++) = -w.dot(inst.F.Q[s.ineq_coords[i]] * w);
  for (size_t i = 0; i < s.eq_coords.size(); ++i)
    row(k++) = -w.dot(inst.F.Q[s.eq_coords[i]] * w);
  return row;
}

}  // namespace

std::vector<CqVerdict> eq_ineq_ms_report(const ProblemInstance& inst,
                                         const CheckOptions& opt) {
  std::vector<CqVerdict> report;
  EqIneqSystem s = gather_eq_ineq(inst);
  int n = inst.n;

  {
    CqVerdict v;
    v.condition_name = "linear_cq";
    v.status = s.all_affine ? CqStatus::Certified : CqStatus::Violated;
    if (!s.all_affine) v.note = "subsystem has non-affine rows";
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "licq";
    Mat stacked(s.grad_act.rows() + s.grad_eq.rows(), n);
    stacked << s.grad_act, s.grad_eq;
    int r = matrix_rank(stacked);
    if (r == stacked.rows()) {
      v.status = CqStatus::Certified;
    } else {
      v.status = CqStatus::Violated;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(Mat(stacked.transpose()));
      cod.setThreshold(1e-10);
      Mat kern = cod.kernel();
      if (kern.cols() > 0) {
        CqCertificate cert;
        Vec dep = kern.col(0);
        cert.lambda = embed_eq_ineq_lambda(inst, s, Vec(dep / dep.lpNorm<Eigen::Infinity>()));
        v.certificate = cert;
      }
      v.note = "active gradients are linearly dependent";
    }
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "mfcq";
    bool h_indep = matrix_rank(s.grad_eq) == s.grad_eq.rows();
    bool descent = true;
    if (s.grad_act.rows() > 0 || s.grad_eq.rows() > 0) {
      LpFeasibility lp(n);
      for (int i = 0; i < s.grad_eq.rows(); ++i) lp.add_eq(s.grad_eq.row(i), 0.0);
      for (int i = 0; i < s.grad_act.rows(); ++i) lp.add_ineq(s.grad_act.row(i), -1.0);
      descent = lp.solve(kLpTol).feasible;
    }
    if (h_indep && descent) {
      v.status = CqStatus::Certified;
    } else {
      v.status = CqStatus::Violated;
      auto ms = eq_ineq_multiplier(s, n, opt.seed, nullptr);
      if (ms.found) {
        CqCertificate cert;
        cert.lambda = embed_eq_ineq_lambda(inst, s, ms.lambda);
        v.certificate = cert;
      } else {
        v.status = CqStatus::InconclusiveSampled;
        v.note = "violation expected but no multiplier certificate found";
      }
    }
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "nnamcq";
    auto ms = eq_ineq_multiplier(s, n, opt.seed, nullptr);
    if (ms.found) {
      v.status = CqStatus::Violated;
      CqCertificate cert;
      cert.lambda = embed_eq_ineq_lambda(inst, s, ms.lambda);
      v.certificate = cert;
    } else if (ms.unresolved) {
      v.status = CqStatus::InconclusiveSampled;
    } else {
      v.status = CqStatus::Certified;
    }
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "quasinormality";
    v.status = CqStatus::NotImplemented;
    v.note = "sequence-quantified condition; not finitely certifiable here";
    report.push_back(v);
    v.condition_name = "rcpld";
    v.note = "neighborhood-rank condition; not finitely certifiable here";
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "no_nonzero_direction";
    PatternData p;
    for (int i = 0; i < s.grad_eq.rows(); ++i) p.weq.push_back(s.grad_eq.row(i));
    for (int i = 0; i < s.grad_act.rows(); ++i) p.wineq.push_back(s.grad_act.row(i));
    auto ws = find_direction(p, n, opt.seed);
    if (ws.certified_empty) {
      v.status = CqStatus::Certified;
    } else if (ws.exact_found) {
      v.status = CqStatus::Violated;
      CqCertificate cert;
      cert.w = ws.w;
      cert.lambda = Vec::Zero(inst.F.out_dim() + 2 * inst.total_soc_dim());
      v.certificate = cert;
      v.note = "nonzero direction in the linearized cone";
    } else {
      v.status = CqStatus::InconclusiveSampled;
    }
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "soscms";
    // NNAMCQ already closes it; otherwise analyse per direction.
    if (report[3].status == CqStatus::Certified) {
      v.status = CqStatus::Certified;
      v.note = "implied by nnamcq";
    } else if (report[6].status == CqStatus::Certified) {
      v.status = CqStatus::Certified;
      v.note = "no nonzero direction in the linearized cone";
    } else {
      PatternData p;
      for (int i = 0; i < s.grad_eq.rows(); ++i) p.weq.push_back(s.grad_eq.row(i));
      for (int i = 0; i < s.grad_act.rows(); ++i) p.wineq.push_back(s.grad_act.row(i));
      Mat span = pattern_span(p, n, opt.seed);
      auto check_at = [&](const Vec& w) {
        Vec hrow = soscms_hessian_row(inst, s, w);
        return eq_ineq_multiplier(s, n, opt.seed, &hrow);
      };
      if (span.cols() == 1) {
        bool violated = false;
        Vec bad_w, bad_l;
        for (double sgn : {1.0, -1.0}) {
          Vec ray = sgn * span.col(0).normalized();
          if (!pattern_accepts(p, ray, 1e-7)) continue;
          auto ms = check_at(ray);
          if (ms.found) {
            violated = true;
            bad_w = ray;
            bad_l = ms.lambda;
            break;
          }
        }
        if (violated) {
          v.status = CqStatus::Violated;
          CqCertificate cert;
          cert.w = bad_w;
          cert.lambda = embed_eq_ineq_lambda(inst, s, bad_l);
          v.certificate = cert;
        } else {
          v.status = CqStatus::Certified;
          v.note = "direction cone is a single ray";
        }
      } else {
        bool violated = false;
        int accepted = 0;
        for (std::uint64_t idx = 1;
             idx <= 60ULL * opt.n_dir_samples && accepted < opt.n_dir_samples;
             ++idx) {
          Vec sdir = sphere_point(idx, static_cast<int>(span.cols()), opt.seed);
          Vec w = (span * sdir).normalized();
          if (!pattern_accepts(p, w, 1e-7)) continue;
          ++accepted;
          ++v.samples_used;
          auto ms = check_at(w);
          if (ms.found) {
            v.status = CqStatus::Violated;
            CqCertificate cert;
            cert.w = w;
            cert.lambda = embed_eq_ineq_lambda(inst, s, ms.lambda);
            v.certificate = cert;
            violated = true;
            break;
          }
        }
        if (!violated) {
          v.status = CqStatus::InconclusiveSampled;
          v.note = "direction cone sampled";
        }
      }
    }
    report.push_back(v);
  }
  return report;
}

namespace {

bool lambda_has_veccomp(const ProblemInstance& inst) {
  for (const auto& b : inst.lambda_structure.blocks)
    if (b.type == LambdaBlock::Type::VecComp) return true;
  return false;
}

// Blocks of the MPEC subsystem (eq, ineq, veccomp) in the block model.
std::vector<int> mpec_blocks(const ProblemInstance& inst, const BlockModel& bm) {
  std::vector<int> out;
  for (size_t i = 0; i < bm.blocks.size(); ++i) {
    int lb = bm.blocks[i].lambda_block;
    if (lb < 0) continue;
    auto t = inst.lambda_structure.blocks[lb].type;
    if (t == LambdaBlock::Type::EqZero || t == LambdaBlock::Type::IneqNonpos ||
        t == LambdaBlock::Type::VecComp)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

// Pins every multiplier outside the subsystem to zero so that the global
// stationarity system reduces to the subsystem's.
ConePiece pin_outside(const BlockModel& bm, const std::vector<int>& subset) {
  std::vector<bool> keep(bm.total, false);
  for (int b : subset)
    for (int c : bm.blocks[b].coords) keep[c] = true;
  ConePiece p(bm.total, "");
  for (int c = 0; c < bm.total; ++c)
    if (!keep[c]) p.add_zero_range(c, 1);
  return p;
}

}  // namespace

std::vector<CqVerdict> mpec_ms_report(const ProblemInstance& inst,
                                      const CheckOptions& opt) {
  std::vector<CqVerdict> report;
  auto bm = build_blocks(inst, opt);
  auto sub = mpec_blocks(inst, bm);
  EqIneqSystem eqs = gather_eq_ineq(inst);
  Vec fv = inst.F.out_dim() > 0 ? eval_map(inst.F, inst.z_star).value : Vec();
  Mat J = inst.F.out_dim() > 0 ? eval_map(inst.F, inst.z_star).jacobian : Mat();

  // gradients of the complementarity pairs by activity
  std::vector<int> phi_coords, psi_coords;
  std::vector<int> biactive_u, biactive_v;
  bool all_affine = eqs.all_affine;
  std::vector<Vec> extra_active_rows;
  for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
    const auto& lb = inst.lambda_structure.blocks[b];
    if (lb.type != LambdaBlock::Type::VecComp) continue;
    int off = inst.lambda_offset(static_cast<int>(b));
    for (int i = 0; i < lb.dim; ++i) {
      int cu = off + 2 * i, cv = off + 2 * i + 1;
      phi_coords.push_back(cu);
      psi_coords.push_back(cv);
      all_affine = all_affine && inst.F.row_is_affine(cu) && inst.F.row_is_affine(cv);
      bool phi0 = std::abs(fv(cu)) <= kActTol;
      bool psi0 = std::abs(fv(cv)) <= kActTol;
      if (phi0) extra_active_rows.push_back(J.row(cu));
      if (psi0) extra_active_rows.push_back(J.row(cv));
      if (phi0 && psi0) {
        biactive_u.push_back(cu);
        biactive_v.push_back(cv);
      }
    }
  }

  {
    CqVerdict v;
    v.condition_name = "mpec_linear_cq";
    v.status = all_affine ? CqStatus::Certified : CqStatus::Violated;
    if (!all_affine) v.note = "subsystem has non-affine rows";
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "mpec_licq";
    Mat stacked(eqs.grad_act.rows() + eqs.grad_eq.rows() +
                    static_cast<int>(extra_active_rows.size()),
                inst.n);
    int r = 0;
    for (int i = 0; i < eqs.grad_act.rows(); ++i) stacked.row(r++) = eqs.grad_act.row(i);
    for (int i = 0; i < eqs.grad_eq.rows(); ++i) stacked.row(r++) = eqs.grad_eq.row(i);
    for (const auto& row : extra_active_rows) stacked.row(r++) = row;
    if (matrix_rank(stacked) == stacked.rows()) {
      v.status = CqStatus::Certified;
    } else {
      v.status = CqStatus::Violated;
      v.note = "active gradients are linearly dependent";
    }
    report.push_back(v);
  }
  {
    // MPEC NNAMCQ: multiplier analysis over the subsystem blocks only, with
    // every multiplier outside the subsystem pinned to zero.
    std::vector<std::vector<const ConePiece*>> lists;
    std::vector<ConePiece> pin = {pin_outside(bm, sub)};
    std::vector<const ConePiece*> pinp = {&pin[0]};
    lists.push_back(pinp);
    for (int b : sub) {
      std::vector<const ConePiece*> ptrs;
      for (const auto& p : bm.blocks[b].nnamcq_pieces) ptrs.push_back(&p);
      lists.push_back(ptrs);
    }
    std::vector<int> sub_coords;
    for (int b : sub)
      for (int c : bm.blocks[b].coords) sub_coords.push_back(c);
    auto cr = check_combos(bm, lists, sub_coords, nullptr, opt.seed);
    CqVerdict v;
    v.condition_name = "mpec_nnamcq";
    v.pieces_examined = cr.combos;
    if (cr.violated) {
      v.status = CqStatus::Violated;
      CqCertificate cert;
      cert.lambda = cr.lambda;
      cert.piece_labels = {cr.labels};
      v.certificate = cert;
    } else if (cr.unresolved) {
      v.status = CqStatus::InconclusiveSampled;
    } else {
      v.status = CqStatus::Certified;
    }
    report.push_back(v);
  }
  {
    CqVerdict v;
    v.condition_name = "mpec_quasinormality";
    v.status = CqStatus::NotImplemented;
    v.note = "sequence-quantified condition; not finitely certifiable here";
    report.push_back(v);
  }
  {
    // L^MPEC(z*) = {0}
    CqVerdict v;
    v.condition_name = "mpec_kernel";
    bool any_nonzero = false;
    Vec witness;
    int n_patterns = 1 << biactive_u.size();
    for (int mask = 0; mask < n_patterns && !any_nonzero; ++mask) {
      PatternData p;
      for (int i = 0; i < eqs.grad_eq.rows(); ++i) p.weq.push_back(eqs.grad_eq.row(i));
      for (int i = 0; i < eqs.grad_act.rows(); ++i) p.wineq.push_back(eqs.grad_act.row(i));
      for (size_t i = 0; i < phi_coords.size(); ++i) {
        bool phi0 = std::abs(fv(phi_coords[i])) <= kActTol;
        bool psi0 = std::abs(fv(psi_coords[i])) <= kActTol;
        if (phi0 && psi0) continue;
        if (!psi0) p.weq.push_back(J.row(phi_coords[i]));  // psi > 0
        if (!phi0) p.weq.push_back(J.row(psi_coords[i]));
      }
      for (size_t k = 0; k < biactive_u.size(); ++k) {
        if (mask & (1 << k)) {
          p.weq.push_back(J.row(biactive_u[k]));
          p.wineq.push_back(Vec(-J.row(biactive_v[k])));
        } else {
          p.wineq.push_back(Vec(-J.row(biactive_u[k])));
          p.weq.push_back(J.row(biactive_v[k]));
        }
      }
      auto ws = find_direction(p, inst.n, opt.seed);
      if (!ws.certified_empty && ws.exact_found) {
        any_nonzero = true;
        witness = ws.w;
      } else if (!ws.certified_empty) {
        any_nonzero = true;  // linear pattern: LP point is exact
        witness = Vec();
      }
    }
    if (!any_nonzero) {
      v.status = CqStatus::Certified;
    } else {
      v.status = CqStatus::Violated;
      CqCertificate cert;
      if (witness.size() > 0) cert.w = witness;
      cert.lambda = Vec::Zero(bm.total);
      v.certificate = cert;
      v.note = "nonzero direction in the MPEC linearized cone";
    }
    report.push_back(v);
  }
  {
    // MPEC FOSCMS form: requires the eq/ineq part subregular.
    CqVerdict v;
    auto base = eq_ineq_ms_report(inst, opt);
    bool m1_ok = false;
    for (const auto& c : base)
      if (c.status == CqStatus::Certified) m1_ok = true;
    std::vector<int> concl;
    for (int c : phi_coords) concl.push_back(c);
    for (int c : psi_coords) concl.push_back(c);
    BlockModel sub_bm = bm;
    // run the direction engine over the subsystem blocks with every
    // multiplier outside the subsystem pinned to zero
    ConePiece pin = pin_outside(bm, sub);
    BlockInfo pin_block;
    pin_block.kind = BlockInfo::Eq;
    pin_block.name = "pin";
    Branch pb;
    pb.tag = "pin";
    pb.pieces = {pin};
    pin_block.branches = {pb};
    pin_block.nnamcq_pieces = {pin};
    sub_bm.blocks.push_back(pin_block);
    std::vector<int> engine_blocks = sub;
    engine_blocks.push_back(static_cast<int>(sub_bm.blocks.size()) - 1);
    auto res = run_direction_engine(sub_bm, engine_blocks, concl, opt, nullptr);
    v.condition_name = "mpec_foscms";
    v.samples_used = res.samples_used;
    v.pieces_examined = res.pieces_examined;
    if (res.status == CqStatus::Violated) {
      v.status = CqStatus::Violated;
      v.certificate = res.certificate;
    } else if (!m1_ok) {
      v.status = CqStatus::InconclusiveSampled;
      v.note = "equality/inequality part not certified subregular";
    } else {
      v.status = res.status;
      v.note = res.note;
    }
    report.push_back(v);

    // MPEC SOSCMS form: add the Lagrangian curvature row.
    CqVerdict v2;
    v2.condition_name = "mpec_soscms";
    auto hess = [&](const Vec& w) {
      Vec row = Vec::Zero(bm.total);
      if (inst.F.kind == MapSpec::Kind::Quadratic) {
        for (int c : eqs.ineq_coords) row(c) = -w.dot(inst.F.Q[c] * w);
        for (int c : eqs.eq_coords) row(c) = -w.dot(inst.F.Q[c] * w);
        for (size_t i = 0; i < phi_coords.size(); ++i) {
          row(phi_coords[i]) = -w.dot(inst.F.Q[phi_coords[i]] * w);
          row(psi_coords[i]) = -w.dot(inst.F.Q[psi_coords[i]] * w);
        }
      }
      return row;
    };
    auto res2 = run_direction_engine(sub_bm, engine_blocks, concl, opt,
                                     inst.F.kind == MapSpec::Kind::Quadratic
                                         ? std::function<Vec(const Vec&)>(hess)
                                         : nullptr);
    v2.samples_used = res2.samples_used;
    v2.pieces_examined = res2.pieces_examined;
    if (res2.status == CqStatus::Violated) {
      v2.status = CqStatus::Violated;
      v2.certificate = res2.certificate;
    } else if (!m1_ok) {
      v2.status = CqStatus::InconclusiveSampled;
      v2.note = "equality/inequality part not certified subregular";
    } else {
      v2.status = res2.status;
      v2.note = res2.note;
    }
    report.push_back(v2);
  }
  return report;
}

CqVerdict check_final_theorem(const ProblemInstance& inst,
                              const CheckOptions& opt) {
  CqVerdict v;
  v.condition_name = "final_theorem";

  // (a) the Lambda subsystem must be metrically subregular
  bool ms_ok = false;
  std::string ms_note;
  bool polyhedral = true, affine = true;
  for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
    const auto& lb = inst.lambda_structure.blocks[b];
    if (lb.type == LambdaBlock::Type::Soc && lb.dim >= 3) polyhedral = false;
    if (lb.type == LambdaBlock::Type::SocComp && lb.dim >= 2) polyhedral = false;
    int off = inst.lambda_offset(static_cast<int>(b));
    for (int i = 0; i < lb.coord_count(); ++i)
      affine = affine && inst.F.row_is_affine(off + i);
  }
  if (inst.F.out_dim() == 0) {
    ms_ok = true;
    ms_note = "empty subsystem";
  } else if (affine && polyhedral) {
    ms_ok = true;
    ms_note = "affine map into a polyhedral product (Robinson)";
  } else {
    auto rep = lambda_has_veccomp(inst) ? mpec_ms_report(inst, opt)
                                        : eq_ineq_ms_report(inst, opt);
    for (const auto& c : rep)
      if (c.status == CqStatus::Certified) {
        ms_ok = true;
        ms_note = "certified via " + c.condition_name;
        break;
      }
  }

  // (b)-(c) split condition with the whole Lambda part as subsystem one
  SplitPartition part;
  for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b)
    part.lambda_blocks.push_back(static_cast<int>(b));
  CqVerdict dir = check_split_foscms(inst, part, opt);
  v.samples_used = dir.samples_used;
  v.pieces_examined = dir.pieces_examined;
  if (dir.status == CqStatus::Violated) {
    v.status = CqStatus::Violated;
    v.certificate = dir.certificate;
    v.note = "split condition violated";
    return v;
  }
  if (!ms_ok) {
    v.status = CqStatus::InconclusiveSampled;
    v.note = "subsystem subregularity not established";
    return v;
  }
  v.status = dir.status;
  v.note = dir.note.empty() ? ms_note : dir.note + "; " + ms_note;
  return v;
}

bool verify_certificate(const ProblemInstance& inst, const Vec& lambda,
                        const Vec* w, double tol, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  Mat P = stacked_jacobian(inst);
  if (lambda.size() != P.rows()) return fail("multiplier stack has wrong size");
  double lam_inf = lambda.lpNorm<Eigen::Infinity>();
  if (lam_inf <= tol) return fail("multiplier is zero");
  Vec station = P.transpose() * lambda;
  if (station.lpNorm<Eigen::Infinity>() > 1e-8 * std::max(1.0, lam_inf))
    return fail("stationarity residual too large: " +
                std::to_string(station.lpNorm<Eigen::Infinity>()));

  CheckOptions opt;
  opt.tol = tol;
  auto bm = build_blocks(inst, opt);
  for (const auto& blk : bm.blocks) {
    Vec lb(blk.coords.size());
    for (size_t i = 0; i < blk.coords.size(); ++i) lb(i) = lambda(blk.coords[i]);
    switch (blk.kind) {
      case BlockInfo::Eq:
        break;
      case BlockInfo::IneqRow: {
        if (!blk.active) {
          if (std::abs(lb(0)) > tol * std::max(1.0, lam_inf))
            return fail(blk.name + ": inactive multiplier nonzero");
        } else {
          if (lb(0) < -tol * std::max(1.0, lam_inf))
            return fail(blk.name + ": active multiplier negative");
          if (w) {
            double dir = blk.Rg.row(0).dot(*w);
            if (std::abs(lb(0) * dir) > 1e-6 * std::max(1.0, lam_inf * w->norm()))
              return fail(blk.name + ": complementarity with direction fails");
          }
        }
        break;
      }
      case BlockInfo::VecPair:
      case BlockInfo::SocPair: {
        int m = static_cast<int>(blk.base_x.size());
        Vec u = lb.head(m), vv = lb.tail(m);
        if (w) {
          Vec dg = blk.Rg * (*w), dh = blk.Rh * (*w);
          auto dm = directional_normal_contains(blk.base_x, blk.base_y, dg, dh, u,
                                                vv, tol);
          if (!dm.direction_in_tangent)
            return fail(blk.name + ": direction not tangent");
          if (!dm.member) return fail(blk.name + ": directional membership fails");
        } else {
          if (!limiting_normal_contains(blk.base_x, blk.base_y, u, vv, tol))
            return fail(blk.name + ": limiting membership fails");
        }
        break;
      }
      case BlockInfo::SocCone: {
        ConeRegion reg = classify_point(blk.base_x, tol);
        double scale = rel_scale(tol, lb.norm() + lam_inf);
        if (reg == ConeRegion::InteriorK) {
          if (lb.norm() > scale) return fail(blk.name + ": interior multiplier nonzero");
        } else if (reg == ConeRegion::BoundaryKNonzero) {
          Vec xh = reflect(blk.base_x);
          if (lb.norm() > scale && !is_nonpos_multiple(lb, xh, tol))
            return fail(blk.name + ": not in the boundary normal ray");
          if (w) {
            double dir = (xh.transpose() * blk.Rg * (*w))(0);
            if (std::abs(lb.dot(xh) / xh.squaredNorm() * dir) >
                1e-6 * std::max(1.0, lam_inf * w->norm()))
              return fail(blk.name + ": boundary complementarity fails");
          }
        } else {
          if (!w) {
            if (!in_neg_cone(lb, tol)) return fail(blk.name + ": not in -K");
          } else {
            Vec dir = blk.Rg * (*w);
            ConeRegion dreg = classify_point(dir, tol);
            if (dreg == ConeRegion::InteriorK) {
              if (lb.norm() > scale)
                return fail(blk.name + ": interior-direction multiplier nonzero");
            } else if (dreg == ConeRegion::BoundaryKNonzero) {
              if (lb.norm() > scale && !is_nonpos_multiple(lb, reflect(dir), tol))
                return fail(blk.name + ": not in the directional normal ray");
            } else if (dreg == ConeRegion::Zero) {
              if (!in_neg_cone(lb, tol)) return fail(blk.name + ": not in -K");
            } else {
              return fail(blk.name + ": direction leaves the tangent cone");
            }
          }
        }
        break;
      }
    }
  }
  return true;
}

}  // namespace soccp
