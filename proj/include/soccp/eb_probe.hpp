#pragma once

#include "soccp/cq_checker.hpp"
#include "soccp/problem_model.hpp"

namespace soccp {

struct ProbeConfig {
  std::vector<double> radii = {1e-1, 1e-2, 1e-3};
  int samples_per_radius = 500;
  std::uint64_t seed = 0;
  double residual_floor = 1e-12;
  int threads = 1;
};

enum class Trend { Bounded, Diverging, Inconclusive };
const char* to_string(Trend t);

struct RadiusStats {
  double radius = 0.0;
  double kappa_hat = 0.0;          // max distance / distance-residual
  double kappa_hat_natural = 0.0;  // max distance / natural residual
  Vec worst_point;
  int n_feasible_skipped = 0;
  int n_bracket_flagged = 0;  // kappa variants apart by more than sqrt(2)
};

struct ProbeReport {
  std::vector<RadiusStats> per_radius;
  Trend trend = Trend::Inconclusive;
};

struct DistanceEstimate {
  double upper = 0.0;           // distance to the best feasible point found
  double lower_evidence = 0.0;  // nearest feasible sample-cloud point
};

// Upper bound on d(z, solution set) by penalty-continuation multistart
// descent; throws NoFeasibleFound when no start reaches feasibility.
DistanceEstimate distance_to_solution_set(const ProblemInstance& inst,
                                          const Vec& z, int budget = 16,
                                          std::uint64_t seed = 0);

ProbeReport estimate_kappa(const ProblemInstance& inst, const ProbeConfig& cfg);

struct CrossValidation {
  std::vector<CqVerdict> verdicts;
  ProbeReport probe;
  bool any_certified = false;
  bool consistent = true;  // a certificate together with a diverging probe fails
};

CrossValidation cross_validate(const ProblemInstance& inst, const ProbeConfig& cfg,
                               const CheckOptions& opt = {});

}  // namespace soccp
