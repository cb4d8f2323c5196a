#include "soccp/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace soccp {

void LpFeasibility::add_eq(const Vec& row, double rhs) {
  eq_rows_.push_back(row);
  eq_rhs_.push_back(rhs);
}

void LpFeasibility::add_ineq(const Vec& row, double rhs) {
  in_rows_.push_back(row);
  in_rhs_.push_back(rhs);
}

void LpFeasibility::add_eq_rows(const Mat& rows, const Vec& rhs) {
  for (int i = 0; i < rows.rows(); ++i) add_eq(rows.row(i), rhs(i));
}

void LpFeasibility::add_ineq_rows(const Mat& rows, const Vec& rhs) {
  for (int i = 0; i < rows.rows(); ++i) add_ineq(rows.row(i), rhs(i));
}

void LpFeasibility::fix_var(int j, double value) {
  Vec row = Vec::Zero(n_);
  row(j) = 1.0;
  add_eq(row, value);
}

// Phase-1 tableau simplex. Free variables are split x = xp - xm; every row is
// normalized to rhs >= 0 and given either a slack basis column (<= rows with
// nonnegative rhs) or an artificial column. Minimizing the artificial sum with
// Bland's rule terminates without cycling.
LpResult LpFeasibility::solve(double tol) const {
  const int m = static_cast<int>(eq_rows_.size() + in_rows_.size());
  const int n_split = 2 * n_;
  LpResult result;
  if (m == 0) {
    result.feasible = true;
    result.point = Vec::Zero(n_);
    return result;
  }

  // Assemble rows as [A | slack columns | artificial columns | rhs].
  std::vector<Vec> raw_rows;
  std::vector<double> raw_rhs;
  std::vector<int> row_kind;  // 0 = eq, 1 = ineq
  raw_rows.reserve(m);
  for (size_t i = 0; i < eq_rows_.size(); ++i) {
    raw_rows.push_back(eq_rows_[i]);
    raw_rhs.push_back(eq_rhs_[i]);
    row_kind.push_back(0);
  }
  for (size_t i = 0; i < in_rows_.size(); ++i) {
    raw_rows.push_back(in_rows_[i]);
    raw_rhs.push_back(in_rhs_[i]);
    row_kind.push_back(1);
  }

  const int n_slack = static_cast<int>(in_rows_.size());
  int n_art = 0;
  std::vector<int> art_of_row(m, -1);

  // Scale rows, orient rhs >= 0, decide basis columns.
  std::vector<double> row_sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    double nrm = std::max(raw_rows[i].lpNorm<Eigen::Infinity>(), std::abs(raw_rhs[i]));
    if (nrm > 0) {
      raw_rows[i] /= nrm;
      raw_rhs[i] /= nrm;
    }
    bool needs_art = true;
    if (row_kind[i] == 1 && raw_rhs[i] >= 0) needs_art = false;
    if (row_kind[i] == 0 && raw_rhs[i] < 0) row_sign[i] = -1.0;
    if (row_kind[i] == 1 && raw_rhs[i] < 0) row_sign[i] = -1.0;  // becomes >= row
    if (needs_art) art_of_row[i] = n_art++;
  }

  const int total = n_split + n_slack + n_art;
  Mat T(m, total + 1);
  T.setZero();
  std::vector<int> basis(m, -1);
  int slack_idx = 0;
  std::vector<int> slack_of_row(m, -1);
  for (int i = 0; i < m; ++i)
    if (row_kind[i] == 1) slack_of_row[i] = slack_idx++;

  for (int i = 0; i < m; ++i) {
    double sgn = row_sign[i];
    for (int j = 0; j < n_; ++j) {
      double a = sgn * raw_rows[i](j);
      T(i, j) = a;
      T(i, n_ + j) = -a;
    }
    if (row_kind[i] == 1) {
      // sgn=+1: a x + s = b; sgn=-1: -a x - s = -b (surplus).
      T(i, n_split + slack_of_row[i]) = sgn;
    }
    T(i, total) = sgn * raw_rhs[i];
    if (art_of_row[i] >= 0) {
      T(i, n_split + n_slack + art_of_row[i]) = 1.0;
      basis[i] = n_split + n_slack + art_of_row[i];
    } else {
      basis[i] = n_split + slack_of_row[i];
    }
  }

  // Objective: minimize sum of artificials. Reduced costs c - sum of basic rows.
  Vec cost = Vec::Zero(total);
  for (int a = 0; a < n_art; ++a) cost(n_split + n_slack + a) = 1.0;
  Vec red = cost;
  double obj = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n_split + n_slack) {
      red -= T.row(i).head(total);
      obj -= T(i, total);
    }
  }

  const int max_iter = 2000 + 200 * total;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Bland: smallest-index entering column with negative reduced cost.
    int enter = -1;
    for (int j = 0; j < total; ++j) {
      if (red(j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    // Ratio test, Bland tie-break on basis index.
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      double a = T(i, enter);
      if (a > tol) {
        double ratio = T(i, total) / a;
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // phase-1 objective bounded below; defensive
    double piv = T(leave, enter);
    T.row(leave) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    double fr = red(enter);
    red -= fr * T.row(leave).head(total);
    obj -= fr * T(leave, total);
    basis[leave] = enter;
  }

  double infeas = -obj;  // phase-1 optimum value
  if (infeas > 1e-7) return result;

  Vec x = Vec::Zero(n_);
  for (int i = 0; i < m; ++i) {
    int b = basis[i];
    if (b < n_) x(b) += T(i, total);
    else if (b < n_split) x(b - n_) -= T(i, total);
  }

  // Guard against a drifted tableau.
  for (size_t i = 0; i < eq_rows_.size(); ++i)
    if (std::abs(eq_rows_[i].dot(x) - eq_rhs_[i]) >
        1e-6 * std::max(1.0, std::abs(eq_rhs_[i]) + x.lpNorm<Eigen::Infinity>()))
      return result;
  for (size_t i = 0; i < in_rows_.size(); ++i)
    if (in_rows_[i].dot(x) - in_rhs_[i] >
        1e-6 * std::max(1.0, std::abs(in_rhs_[i]) + x.lpNorm<Eigen::Infinity>()))
      return result;

  result.feasible = true;
  result.point = x;
  return result;
}

}  // namespace soccp
