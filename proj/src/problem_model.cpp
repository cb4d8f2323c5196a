#include "soccp/problem_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace soccp {

using nlohmann::json;

bool MapSpec::row_is_affine(int i) const {
  if (kind == Kind::Affine) return true;
  return Q[i].norm() == 0.0;
}

MapEval eval_map(const MapSpec& map, const Vec& z) {
  if (z.size() != map.in_dim()) throw DimensionError("eval_map: dim mismatch");
  MapEval e;
  e.value = map.A * z + map.b;
  e.jacobian = map.A;
  if (map.kind == MapSpec::Kind::Quadratic) {
    for (int i = 0; i < map.out_dim(); ++i) {
      Vec qz = map.Q[i] * z;
      e.value(i) += 0.5 * z.dot(qz);
      e.jacobian.row(i) += qz.transpose();
    }
  }
  return e;
}

double eval_hessian_form(const MapSpec& map, const Vec& lambda, const Vec& w,
                         const Vec& z) {
  (void)z;  // Hessians of quadratic maps are constant
  if (lambda.size() != map.out_dim() || w.size() != map.in_dim())
    throw DimensionError("eval_hessian_form: dim mismatch");
  if (map.kind == MapSpec::Kind::Affine) return 0.0;
  double s = 0.0;
  for (int i = 0; i < map.out_dim(); ++i)
    if (lambda(i) != 0.0) s += lambda(i) * w.dot(map.Q[i] * w);
  return s;
}

const char* to_string(LambdaBlock::Type t) {
  switch (t) {
    case LambdaBlock::Type::EqZero: return "eq";
    case LambdaBlock::Type::IneqNonpos: return "ineq";
    case LambdaBlock::Type::VecComp: return "veccomp";
    case LambdaBlock::Type::SocComp: return "soccomp";
    case LambdaBlock::Type::Soc: return "soc";
  }
  return "?";
}

int LambdaStructure::total_dim() const {
  int s = 0;
  for (const auto& b : blocks) s += b.coord_count();
  return s;
}

int ProblemInstance::total_soc_dim() const {
  int s = 0;
  for (int m : soc_dims) s += m;
  return s;
}

int ProblemInstance::soc_offset(int i) const {
  int off = 0;
  for (int k = 0; k < i; ++k) off += soc_dims[k];
  return off;
}

int ProblemInstance::lambda_offset(int b) const {
  int off = 0;
  for (int k = 0; k < b; ++k) off += lambda_structure.blocks[k].coord_count();
  return off;
}

ActiveIndexSets ProblemInstance::active_sets(double tol) const {
  ActiveIndexSets s;
  Vec fv = F.out_dim() > 0 ? eval_map(F, z_star).value : Vec();
  int pair_id = 0;
  for (size_t b = 0; b < lambda_structure.blocks.size(); ++b) {
    const auto& blk = lambda_structure.blocks[b];
    int off = lambda_offset(static_cast<int>(b));
    if (blk.type == LambdaBlock::Type::IneqNonpos) {
      for (int i = 0; i < blk.dim; ++i)
        if (std::abs(fv(off + i)) <= tol) s.I_g.push_back(off + i);
    } else if (blk.type == LambdaBlock::Type::VecComp) {
      for (int i = 0; i < blk.dim; ++i, ++pair_id) {
        if (std::abs(fv(off + 2 * i)) <= tol) s.I_phi.push_back(pair_id);
        if (std::abs(fv(off + 2 * i + 1)) <= tol) s.I_psi.push_back(pair_id);
      }
    } else if (blk.type == LambdaBlock::Type::SocComp) {
      pair_id += 0;
    }
  }
  return s;
}

namespace {

double theta_distance(double a, double b) {
  double d1 = std::hypot(std::min(a, 0.0), b);
  double d2 = std::hypot(a, std::min(b, 0.0));
  return std::min(d1, d2);
}

}  // namespace

ResidualValue residual(const ProblemInstance& inst, const Vec& z,
                       std::uint64_t seed) {
  if (z.size() != inst.n) throw DimensionError("residual: dim mismatch");
  ResidualValue r;
  double lam2 = 0.0;  // squared distance to Lambda (product set)
  if (inst.F.out_dim() > 0) {
    Vec fv = eval_map(inst.F, z).value;
    for (size_t b = 0; b < inst.lambda_structure.blocks.size(); ++b) {
      const auto& blk = inst.lambda_structure.blocks[b];
      int off = inst.lambda_offset(static_cast<int>(b));
      switch (blk.type) {
        case LambdaBlock::Type::EqZero:
          lam2 += fv.segment(off, blk.dim).squaredNorm();
          break;
        case LambdaBlock::Type::IneqNonpos:
          for (int i = 0; i < blk.dim; ++i)
            lam2 += std::pow(std::max(fv(off + i), 0.0), 2);
          break;
        case LambdaBlock::Type::VecComp:
          for (int i = 0; i < blk.dim; ++i) {
            double d = theta_distance(fv(off + 2 * i), fv(off + 2 * i + 1));
            lam2 += d * d;
          }
          break;
        case LambdaBlock::Type::Soc: {
          Vec seg = fv.segment(off, blk.dim);
          lam2 += (seg - project_soc(seg)).squaredNorm();
          break;
        }
        case LambdaBlock::Type::SocComp: {
          Vec xs = fv.segment(off, blk.dim);
          Vec ys = fv.segment(off + blk.dim, blk.dim);
          auto br = distance_to_omega(xs, ys, seed);
          lam2 += br.best_found * br.best_found;
          break;
        }
      }
    }
  }
  r.distance = std::sqrt(lam2);
  r.natural = r.distance;
  if (inst.total_soc_dim() > 0) {
    Vec gv = eval_map(inst.G, z).value;
    Vec hv = eval_map(inst.H, z).value;
    for (size_t i = 0; i < inst.soc_dims.size(); ++i) {
      int off = inst.soc_offset(static_cast<int>(i));
      int m = inst.soc_dims[i];
      Vec x = gv.segment(off, m);
      Vec y = hv.segment(off, m);
      double nat = (x - project_soc(x - y)).norm();
      auto br = distance_to_omega(x, y, seed);
      // The sqrt(2) bound must dominate the best distance found.
      if (br.best_found > std::sqrt(2.0) * nat + 1e-9)
        throw std::logic_error("residual: natural-residual bracket violated");
      r.distance += br.best_found;
      r.natural += nat;
    }
  }
  return r;
}

namespace {

Mat parse_matrix(const json& j, int rows, int cols, const std::string& what) {
  if (!j.is_array())
    throw LoadError("field '" + what + "' must be an array of rows");
  if (static_cast<int>(j.size()) != rows)
    throw LoadError("field '" + what + "' has " + std::to_string(j.size()) +
                    " rows, expected " + std::to_string(rows));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw LoadError("row " + std::to_string(i) + " of '" + what + "' must have " +
                      std::to_string(cols) + " entries");
    for (int k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw LoadError("non-numeric entry in '" + what + "'");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

Vec parse_vector(const json& j, int dim, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw LoadError("field '" + what + "' must be an array of length " +
                    std::to_string(dim));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) throw LoadError("non-numeric entry in '" + what + "'");
    v(i) = j[i].get<double>();
  }
  return v;
}

MapSpec parse_map(const json& j, int n, int out_dim, const std::string& name) {
  if (!j.is_object()) throw LoadError("map '" + name + "' must be an object");
  MapSpec m;
  std::string kind = j.value("kind", "affine");
  if (kind == "affine") {
    m.kind = MapSpec::Kind::Affine;
  } else if (kind == "quadratic") {
    m.kind = MapSpec::Kind::Quadratic;
  } else {
    throw LoadError("map '" + name + "': unknown kind '" + kind + "'");
  }
  if (out_dim == 0) {
    m.A = Mat(0, n);
    m.b = Vec(0);
    return m;
  }
  if (!j.contains("A")) throw LoadError("map '" + name + "' is missing 'A'");
  m.A = parse_matrix(j["A"], out_dim, n, name + ".A");
  m.b = j.contains("b") ? parse_vector(j["b"], out_dim, name + ".b")
                        : Vec(Vec::Zero(out_dim));
  if (m.kind == MapSpec::Kind::Quadratic) {
    if (!j.contains("Q")) throw LoadError("quadratic map '" + name + "' is missing 'Q'");
    const auto& q = j["Q"];
    if (!q.is_array() || static_cast<int>(q.size()) != out_dim)
      throw LoadError("map '" + name + "': 'Q' must list one matrix per output row");
    for (int i = 0; i < out_dim; ++i) {
      Mat qi = parse_matrix(q[i], n, n, name + ".Q[" + std::to_string(i) + "]");
      if ((qi - qi.transpose()).norm() > 1e-12 * std::max(1.0, qi.norm()))
        throw LoadError("map '" + name + "': Q[" + std::to_string(i) +
                        "] is not symmetric");
      m.Q.push_back(0.5 * (qi + qi.transpose()));
    }
  }
  return m;
}

json map_to_json(const MapSpec& m) {
  json j;
  j["kind"] = m.kind == MapSpec::Kind::Affine ? "affine" : "quadratic";
  json A = json::array();
  for (int i = 0; i < m.A.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.A.cols(); ++k) row.push_back(m.A(i, k));
    A.push_back(row);
  }
  j["A"] = A;
  json b = json::array();
  for (int i = 0; i < m.b.size(); ++i) b.push_back(m.b(i));
  j["b"] = b;
  if (m.kind == MapSpec::Kind::Quadratic) {
    json qs = json::array();
    for (const auto& q : m.Q) {
      json qm = json::array();
      for (int i = 0; i < q.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < q.cols(); ++k) row.push_back(q(i, k));
        qm.push_back(row);
      }
      qs.push_back(qm);
    }
    j["Q"] = qs;
  }
  return j;
}

}  // namespace

ProblemInstance load_instance_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw LoadError("instance document must be a JSON object");
  ProblemInstance inst;
  inst.name = j.value("name", "unnamed");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw LoadError("field 'n' (variable count) is required");
  inst.n = j["n"].get<int>();
  if (inst.n <= 0) throw LoadError("field 'n' must be positive");

  if (j.contains("lambda_structure")) {
    const auto& ls = j["lambda_structure"];
    if (!ls.is_array()) throw LoadError("'lambda_structure' must be an array");
    for (const auto& e : ls) {
      if (!e.is_object() || !e.contains("type") || !e.contains("dim"))
        throw LoadError("lambda_structure entries need 'type' and 'dim'");
      std::string t = e["type"].get<std::string>();
      int dim = e["dim"].get<int>();
      if (dim <= 0) throw LoadError("lambda_structure: 'dim' must be positive");
      LambdaBlock blk;
      blk.dim = dim;
      if (t == "eq") blk.type = LambdaBlock::Type::EqZero;
      else if (t == "ineq") blk.type = LambdaBlock::Type::IneqNonpos;
      else if (t == "veccomp") blk.type = LambdaBlock::Type::VecComp;
      else if (t == "soccomp") blk.type = LambdaBlock::Type::SocComp;
      else if (t == "soc") blk.type = LambdaBlock::Type::Soc;
      else throw LoadError("lambda_structure: unknown type '" + t + "'");
      inst.lambda_structure.blocks.push_back(blk);
    }
  }

  if (j.contains("soc_dims")) {
    const auto& sd = j["soc_dims"];
    if (!sd.is_array()) throw LoadError("'soc_dims' must be an array");
    for (const auto& e : sd) {
      int m = e.get<int>();
      if (m < 1) throw LoadError("soc_dims entries must be >= 1");
      inst.soc_dims.push_back(m);
    }
  }

  int l = inst.lambda_structure.total_dim();
  int msum = inst.total_soc_dim();
  if (l == 0 && msum == 0) throw LoadError("instance has no constraints");

  const json maps = j.value("maps", json::object());
  inst.F = parse_map(maps.value("F", json::object()), inst.n, l, "F");
  inst.G = parse_map(maps.value("G", json::object()), inst.n, msum, "G");
  inst.H = parse_map(maps.value("H", json::object()), inst.n, msum, "H");
  if (inst.G.out_dim() != msum)
    throw LoadError("sum of soc_dims (" + std::to_string(msum) +
                    ") must equal the codomain of G");
  if (inst.H.out_dim() != msum)
    throw LoadError("sum of soc_dims (" + std::to_string(msum) +
                    ") must equal the codomain of H");

  if (!j.contains("z_star")) throw LoadError("field 'z_star' is required");
  inst.z_star = parse_vector(j["z_star"], inst.n, "z_star");

  auto res = residual(inst, inst.z_star);
  if (res.distance > 1e-6)
    throw LoadError("z_star is infeasible: residual " + std::to_string(res.distance));
  return inst;
}

ProblemInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_instance_json(ss.str());
}

std::string instance_to_json(const ProblemInstance& inst) {
  json j;
  j["name"] = inst.name;
  j["n"] = inst.n;
  json maps;
  maps["F"] = map_to_json(inst.F);
  maps["G"] = map_to_json(inst.G);
  maps["H"] = map_to_json(inst.H);
  j["maps"] = maps;
  json ls = json::array();
  for (const auto& b : inst.lambda_structure.blocks)
    ls.push_back({{"type", to_string(b.type)}, {"dim", b.dim}});
  j["lambda_structure"] = ls;
  j["soc_dims"] = inst.soc_dims;
  json zs = json::array();
  for (int i = 0; i < inst.z_star.size(); ++i) zs.push_back(inst.z_star(i));
  j["z_star"] = zs;
  return j.dump(2);
}

}  // namespace soccp
