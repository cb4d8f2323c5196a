#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soccp/comp_set.hpp"
#include "soccp/problem_model.hpp"
#include "soccp/types.hpp"

namespace soccp {

// Tri-state certification. Sampling can only produce Violated (the found
// certificate re-verifies exactly) or InconclusiveSampled; Certified is
// reserved for exhaustive finite case analysis.
enum class CqStatus { Violated, Certified, InconclusiveSampled, NotImplemented };

const char* to_string(CqStatus s);

struct CqCertificate {
  Vec w;       // critical direction (size 0 when not applicable)
  Vec lambda;  // multiplier stack (F rows, then G rows, then H rows), inf-norm 1
  std::vector<std::string> piece_labels;
};

struct CqVerdict {
  CqStatus status = CqStatus::InconclusiveSampled;
  std::optional<CqCertificate> certificate;
  int samples_used = 0;
  int pieces_examined = 0;
  std::string condition_name;
  std::string note;
};

struct CheckOptions {
  double tol = kDefaultTol;
  int n_dir_samples = 512;
  std::uint64_t seed = 0;
};

// One per-block tangent-branch combination: a cone of critical directions in
// R^n described by linear rows, plus flagged nonpolyhedral membership
// constraints contributed by degenerate second-order-cone blocks.
struct DirectionPattern {
  std::vector<std::string> case_tags;
  Mat w_eq;    // rows r with r w = 0
  Mat w_ineq;  // rows r with r w <= 0
  struct SocConstraint {
    Mat R;          // direction image R w
    bool boundary;  // R w must lie on bd K (otherwise: in K)
  };
  std::vector<SocConstraint> w_soc;
  bool nonpolyhedral() const { return !w_soc.empty(); }
};

struct CriticalDirectionCone {
  std::vector<DirectionPattern> patterns;
  int pruned_empty = 0;
};

// Stacked Jacobian [grad F; grad G; grad H](z*), one row per multiplier.
Mat stacked_jacobian(const ProblemInstance& inst);

// Blocks presumed metrically subregular in the split condition; indices refer
// to lambda_structure blocks and SOC pair blocks respectively.
struct SplitPartition {
  std::vector<int> lambda_blocks;
  std::vector<int> soc_pairs;
};

CqVerdict check_nnamcq(const ProblemInstance& inst, const CheckOptions& opt = {});

CriticalDirectionCone build_critical_directions(const ProblemInstance& inst,
                                                const CheckOptions& opt = {});

CqVerdict check_foscms(const ProblemInstance& inst, const CheckOptions& opt = {});

CqVerdict check_split_foscms(const ProblemInstance& inst,
                             const SplitPartition& subsystem_one,
                             const CheckOptions& opt = {});

// Sufficient conditions for metric subregularity of the equality/inequality
// part of Lambda: Linear CQ, LICQ, MFCQ, NNAMCQ, no-nonzero-direction, SOSCMS
// (quasinormality and RCPLD are reported as not implemented).
std::vector<CqVerdict> eq_ineq_ms_report(const ProblemInstance& inst,
                                         const CheckOptions& opt = {});

// Sufficient conditions for the complementarity system formed by the eq,
// ineq, and veccomp blocks of Lambda.
std::vector<CqVerdict> mpec_ms_report(const ProblemInstance& inst,
                                      const CheckOptions& opt = {});

CqVerdict check_final_theorem(const ProblemInstance& inst,
                              const CheckOptions& opt = {});

// Independent re-verification of a certificate: stationarity residual at most
// 1e-8, nonzero multiplier, and blockwise cone membership (directional cones
// when a direction is supplied).
bool verify_certificate(const ProblemInstance& inst, const Vec& lambda,
                        const Vec* w, double tol = kDefaultTol,
                        std::string* why = nullptr);

}  // namespace soccp
