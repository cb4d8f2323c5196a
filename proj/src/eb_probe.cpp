#include "soccp/eb_probe.hpp"

#include <cmath>

#include "soccp/sampling.hpp"

namespace soccp {

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Bounded: return "bounded";
    case Trend::Diverging: return "diverging";
    case Trend::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Squared natural residual and its gradient; exact for the convex block
// distances (Moreau envelope), generalized-Jacobian based for the pairs.
double natural_residual_sq(const ProblemInstance& inst, const Vec& z, Vec* grad) {
  double val = 0.0;
  if (grad) grad->setZero(inst.n);
  if (inst.F.out_dim() > 0) {
    auto fe = eval_map(inst.F, z);
    for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
      const auto& lb = inst.lambda_structure.blocks[b];
      int off = inst.lambda_offset(static_cast<int>(b));
      switch (lb.type) {
        case LambdaBlock::Type::EqZero: {
          Vec r = fe.value.segment(off, lb.dim);
          val += r.squaredNorm();
          if (grad) *grad += 2.0 * fe.jacobian.middleRows(off, lb.dim).transpose() * r;
          break;
        }
        case LambdaBlock::Type::IneqNonpos: {
          for (int i = 0; i < lb.dim; ++i) {
            double r = std::max(fe.value(off + i), 0.0);
            val += r * r;
            if (grad && r > 0) *grad += 2.0 * r * fe.jacobian.row(off + i).transpose();
          }
          break;
        }
        case LambdaBlock::Type::VecComp: {
          for (int i = 0; i < lb.dim; ++i) {
            double a = fe.value(off + 2 * i), bb = fe.value(off + 2 * i + 1);
            double d1 = std::pow(std::min(a, 0.0), 2) + bb * bb;
            double d2 = a * a + std::pow(std::min(bb, 0.0), 2);
            if (d1 <= d2) {
              val += d1;
              if (grad) {
                if (a < 0) *grad += 2.0 * a * fe.jacobian.row(off + 2 * i).transpose();
                *grad += 2.0 * bb * fe.jacobian.row(off + 2 * i + 1).transpose();
              }
            } else {
              val += d2;
              if (grad) {
                *grad += 2.0 * a * fe.jacobian.row(off + 2 * i).transpose();
                if (bb < 0)
                  *grad += 2.0 * bb * fe.jacobian.row(off + 2 * i + 1).transpose();
              }
            }
          }
          break;
        }
        case LambdaBlock::Type::Soc: {
          Vec seg = fe.value.segment(off, lb.dim);
          Vec r = seg - project_soc(seg);
          val += r.squaredNorm();
          if (grad) *grad += 2.0 * fe.jacobian.middleRows(off, lb.dim).transpose() * r;
          break;
        }
        case LambdaBlock::Type::SocComp: {
          Vec xs = fe.value.segment(off, lb.dim);
          Vec ys = fe.value.segment(off + lb.dim, lb.dim);
          Vec r = xs - project_soc(xs - ys);
          val += r.squaredNorm();
          if (grad) {
            Mat Jp = jacobian_proj_element(Vec(xs - ys));
            Mat Jg = fe.jacobian.middleRows(off, lb.dim);
            Mat Jh = fe.jacobian.middleRows(off + lb.dim, lb.dim);
            *grad += 2.0 * (Jg - Jp * (Jg - Jh)).transpose() * r;
          }
          break;
        }
      }
    }
  }
  if (inst.total_soc_dim() > 0) {
    auto ge = eval_map(inst.G, z);
    auto he = eval_map(inst.H, z);
    for (size_t i = 0; i < inst.soc_dims.size(); ++i) {
      int off = inst.soc_offset(static_cast<int>(i));
      int m = inst.soc_dims[i];
      Vec x = ge.value.segment(off, m);
      Vec y = he.value.segment(off, m);
      Vec r = x - project_soc(x - y);
      val += r.squaredNorm();
      if (grad) {
        Mat Jp = jacobian_proj_element(Vec(x - y));
        Mat Jg = ge.jacobian.middleRows(off, m);
        Mat Jh = he.jacobian.middleRows(off, m);
        *grad += 2.0 * (Jg - Jp * (Jg - Jh)).transpose() * r;
      }
    }
  }
  return val;
}

// Gradient descent with backtracking on an objective with analytic gradient.
Vec descend(const std::function<double(const Vec&, Vec*)>& f, Vec s, int iters) {
  int n = static_cast<int>(s.size());
  Vec g(n);
  double fv = f(s, &g);
  for (int it = 0; it < iters; ++it) {
    double gn2 = g.squaredNorm();
    if (gn2 <= 1e-26 * std::max(1.0, fv)) break;
    double t = 1.0;
    bool moved = false;
    while (t > 1e-16) {
      Vec s2 = s - t * g;
      double f2 = f(s2, nullptr);
      if (f2 <= fv - 1e-4 * t * gn2) {
        s = s2;
        fv = f2;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    f(s, &g);
  }
  return s;
}

}  // namespace

DistanceEstimate distance_to_solution_set(const ProblemInstance& inst, const Vec& z,
                                          int budget, std::uint64_t seed) {
  if (z.size() != inst.n) throw DimensionError("distance_to_solution_set: dim");
  const double feas_tol = 1e-8;
  DistanceEstimate out;

  std::vector<Vec> starts = {z, inst.z_star};
  SplitMix64 rng(seed * 2654435761ULL + 7);
  double spread = std::max(1e-3, (z - inst.z_star).norm());
  for (int i = 2; i < budget; ++i)
    starts.push_back(z + spread * rng.gauss_vec(inst.n));

  double best = std::numeric_limits<double>::infinity();
  for (const Vec& s0 : starts) {
    Vec s = s0;
    for (double mu : {1e2, 1e4, 1e6, 1e8, 1e10}) {
      auto obj = [&](const Vec& p, Vec* g) {
        Vec gr;
        double r2 = natural_residual_sq(inst, p, g ? &gr : nullptr);
        double v = (p - z).squaredNorm() + mu * r2;
        if (g) *g = 2.0 * (p - z) + mu * gr;
        return v;
      };
      s = descend(obj, s, 80);
    }
    double r = std::sqrt(std::max(natural_residual_sq(inst, s, nullptr), 0.0));
    if (r <= feas_tol) best = std::min(best, (s - z).norm());
  }
  if (!std::isfinite(best))
    throw NoFeasibleFound("no feasible point reached from any start");
  out.upper = best;

  // feasibility-filtered sample cloud (reported, not certified)
  double cloud_best = std::numeric_limits<double>::infinity();
  double radius = std::max(2.0 * best, 1e-6);
  int cloud_n = 128;
  for (int i = 0; i < cloud_n; ++i) {
    Vec p = z + radius * ball_point(i + 1, inst.n, seed);
    double r = std::sqrt(std::max(natural_residual_sq(inst, p, nullptr), 0.0));
    if (r <= feas_tol) cloud_best = std::min(cloud_best, (p - z).norm());
  }
  out.lower_evidence = std::isfinite(cloud_best) ? cloud_best : out.upper;
  out.upper = std::min(out.upper, out.lower_evidence);
  return out;
}

ProbeReport estimate_kappa(const ProblemInstance& inst, const ProbeConfig& cfg) {
  if (cfg.radii.empty() || cfg.samples_per_radius < 1)
    throw DimensionError("estimate_kappa: invalid probe configuration");
  for (size_t i = 0; i + 1 < cfg.radii.size(); ++i)
    if (!(cfg.radii[i] > cfg.radii[i + 1]) || cfg.radii[i + 1] <= 0)
      throw DimensionError("estimate_kappa: radii must be positive decreasing");

  ProbeReport rep;
  // One unit-ball sample stream reused across radii keeps the per-radius
  // ratios comparable point-by-point.
  std::vector<Vec> unit(cfg.samples_per_radius);
  for (int j = 0; j < cfg.samples_per_radius; ++j)
    unit[j] = ball_point(j + 1, inst.n, cfg.seed);

  for (double r : cfg.radii) {
    RadiusStats st;
    st.radius = r;
    struct Row {
      double ratio_d = -1.0, ratio_nat = -1.0;
      bool skipped = false, flagged = false;
      Vec z;
    };
    std::vector<Row> rows(cfg.samples_per_radius);
    parallel_for(cfg.samples_per_radius, cfg.threads, [&](int j) {
      Row& row = rows[j];
      row.z = inst.z_star + r * unit[j];
      auto res = residual(inst, row.z, cfg.seed);
      if (res.distance <= cfg.residual_floor) {
        row.skipped = true;
        return;
      }
      double dist = distance_to_solution_set(inst, row.z, 8, cfg.seed).upper;
      row.ratio_d = dist / res.distance;
      row.ratio_nat = res.natural > cfg.residual_floor ? dist / res.natural : 0.0;
      if (row.ratio_nat > 0) {
        double q = row.ratio_d / row.ratio_nat;
        if (q > std::sqrt(2.0) * (1 + 1e-9) || q < 1.0 / std::sqrt(2.0) * (1 - 1e-9))
          row.flagged = true;
      }
    });
    for (const auto& row : rows) {
      if (row.skipped) {
        ++st.n_feasible_skipped;
        continue;
      }
      if (row.ratio_d > st.kappa_hat) {
        st.kappa_hat = row.ratio_d;
        st.worst_point = row.z;
      }
      st.kappa_hat_natural = std::max(st.kappa_hat_natural, row.ratio_nat);
      if (row.flagged) ++st.n_bracket_flagged;
    }
    rep.per_radius.push_back(std::move(st));
  }

  bool all_zero = true;
  for (const auto& st : rep.per_radius) all_zero = all_zero && st.kappa_hat == 0.0;
  if (all_zero) {
    rep.trend = Trend::Bounded;
    return rep;
  }
  bool diverging = true, bounded = true;
  for (size_t i = 0; i + 1 < rep.per_radius.size(); ++i) {
    double a = rep.per_radius[i].kappa_hat;
    double b = rep.per_radius[i + 1].kappa_hat;
    if (a <= 0) {
      diverging = bounded = false;
      break;
    }
    double ratio = b / a;
    if (!(ratio >= 10.0 * (1 - 1e-6))) diverging = false;
    if (!(ratio <= 2.0 * (1 + 1e-6))) bounded = false;
  }
  rep.trend = diverging  ? Trend::Diverging
              : bounded ? Trend::Bounded
                        : Trend::Inconclusive;
  return rep;
}

CrossValidation cross_validate(const ProblemInstance& inst, const ProbeConfig& cfg,
                               const CheckOptions& opt) {
  CrossValidation cv;
  cv.verdicts.push_back(check_nnamcq(inst, opt));
  cv.verdicts.push_back(check_foscms(inst, opt));
  cv.verdicts.push_back(check_final_theorem(inst, opt));
  bool only_eq_ineq = inst.soc_dims.empty();
  bool has_vec = false, has_conic = false;
  for (const auto& b : inst.lambda_structure.blocks) {
    if (b.type == LambdaBlock::Type::VecComp) has_vec = true;
    if (b.type == LambdaBlock::Type::Soc || b.type == LambdaBlock::Type::SocComp)
      has_conic = true;
  }
  if (only_eq_ineq && !has_conic) {
    auto rep = has_vec ? mpec_ms_report(inst, opt) : eq_ineq_ms_report(inst, opt);
    for (auto& v : rep) cv.verdicts.push_back(v);
  }
  for (const auto& v : cv.verdicts)
    if (v.status == CqStatus::Certified) cv.any_certified = true;
  cv.probe = estimate_kappa(inst, cfg);
  cv.consistent = !(cv.any_certified && cv.probe.trend == Trend::Diverging);
  return cv;
}

}  // namespace soccp
