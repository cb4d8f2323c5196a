#pragma once

#include <optional>

#include "soccp/types.hpp"

namespace soccp {

// Feasibility of { x : A_eq x = b_eq, A_in x <= b_in } over free variables,
// solved with a phase-1 simplex (Bland's rule). Returns a feasible point when
// one exists. Deterministic for fixed input.
struct LpResult {
  bool feasible = false;
  Vec point;
};

class LpFeasibility {
 public:
  LpFeasibility(int num_vars) : n_(num_vars) {}

  void add_eq(const Vec& row, double rhs);
  void add_ineq(const Vec& row, double rhs);  // row^T x <= rhs
  void add_eq_rows(const Mat& rows, const Vec& rhs);
  void add_ineq_rows(const Mat& rows, const Vec& rhs);
  void fix_var(int j, double value);

  LpResult solve(double tol = 1e-9) const;

  int num_vars() const { return n_; }

 private:
  int n_;
  std::vector<Vec> eq_rows_;
  std::vector<double> eq_rhs_;
  std::vector<Vec> in_rows_;
  std::vector<double> in_rhs_;
};

}  // namespace soccp
