#pragma once

#include <optional>
#include <string>
#include <vector>

#include "soccp/comp_set.hpp"
#include "soccp/types.hpp"

namespace soccp {

// Affine map A z + b, or quadratic with component i equal to
// z' Q_i z / 2 + (A z)_i + b_i (Q_i symmetric).
struct MapSpec {
  enum class Kind { Affine, Quadratic };
  Kind kind = Kind::Affine;
  Mat A;                // out_dim x in_dim
  Vec b;                // out_dim
  std::vector<Mat> Q;   // out_dim symmetric matrices (quadratic only)

  int in_dim() const { return static_cast<int>(A.cols()); }
  int out_dim() const { return static_cast<int>(A.rows()); }
  bool row_is_affine(int i) const;
};

struct MapEval {
  Vec value;
  Mat jacobian;
};

MapEval eval_map(const MapSpec& map, const Vec& z);

// w' grad^2 (lambda' map)(z) w; zero for affine maps.
double eval_hessian_form(const MapSpec& map, const Vec& lambda, const Vec& w,
                         const Vec& z);

// Block kinds of the constraint set Lambda. "Soc" (plain second-order-cone
// membership) extends the product list so that conic constraints without a
// complementarity partner can be expressed.
struct LambdaBlock {
  enum class Type { EqZero, IneqNonpos, VecComp, SocComp, Soc };
  Type type;
  int dim;  // eq/ineq/soc: coordinate count; veccomp: pair count; soccomp: cone dim

  int coord_count() const {
    switch (type) {
      case Type::EqZero:
      case Type::IneqNonpos:
      case Type::Soc:
        return dim;
      case Type::VecComp:
        return 2 * dim;
      case Type::SocComp:
        return 2 * dim;
    }
    return 0;
  }
};

const char* to_string(LambdaBlock::Type t);

struct LambdaStructure {
  std::vector<LambdaBlock> blocks;
  int total_dim() const;
};

struct ActiveIndexSets {
  std::vector<int> I_g;    // active inequality rows (within the stacked F)
  std::vector<int> I_phi;  // phi_i = 0 among veccomp pairs (global pair ids)
  std::vector<int> I_psi;  // psi_i = 0
};

struct ProblemInstance {
  std::string name;
  int n = 0;
  MapSpec F;  // maps into Lambda (may have 0 rows)
  MapSpec G;  // maps into K = K_{m_1} x ... x K_{m_J}
  MapSpec H;
  LambdaStructure lambda_structure;
  std::vector<int> soc_dims;
  Vec z_star;

  int total_soc_dim() const;
  // Offset of SOC block i within the codomain of G / H.
  int soc_offset(int i) const;
  // Offset of Lambda block b within the codomain of F.
  int lambda_offset(int b) const;

  ActiveIndexSets active_sets(double tol = 1e-6) const;
};

struct ResidualValue {
  double distance = 0.0;  // d_Lambda(F z) + sum_i d_Omega_i(G_i, H_i)
  double natural = 0.0;   // d_Lambda(F z) + sum_i ||G_i - Pi(G_i - H_i)||
};

ResidualValue residual(const ProblemInstance& inst, const Vec& z,
                       std::uint64_t seed = 0);

// Parses and validates an instance document. Reports a descriptive LoadError
// for schema violations, dimension mismatches, and infeasible z_star
// (residual above 1e-6).
ProblemInstance load_instance_json(const std::string& text);
ProblemInstance load_instance_file(const std::string& path);
std::string instance_to_json(const ProblemInstance& inst);

}  // namespace soccp
