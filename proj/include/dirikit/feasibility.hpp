#pragma once

// Small dense linear programs:
//
//   minimize  cost^T x   subject to  A x >= b,  x >= 0
//
// solved with a two-phase tableau simplex using Bland's rule, so the
// returned vertex is deterministic. Intended for the tens-of-variables
// problems that arise on desk-scale graphs.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace dirikit::lp {

struct Solution {
  Eigen::VectorXd x;
  double objective = 0.0;
};

namespace detail {

class Tableau {
 public:
  // Rows 0..m-1 are constraints, the last column is the right-hand side.
  Tableau(Eigen::MatrixXd t, std::vector<int> basis, double eps)
      : t_(std::move(t)), basis_(std::move(basis)), eps_(eps) {}

  Eigen::MatrixXd& table() { return t_; }
  std::vector<int>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index rhs() const { return t_.cols() - 1; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      if (r != row && t_(r, col) != 0.0) t_.row(r) -= t_(r, col) * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  // Minimizes sum_j cost(j) x_j over the columns flagged in `allowed`.
  // Returns false when unbounded.
  bool minimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed) {
    for (int iter = 0; iter < 10000; ++iter) {
      // Reduced costs r_j = c_j - c_B^T B^{-1} A_j.
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < rhs(); ++j) {
        if (!allowed[static_cast<std::size_t>(j)] || is_basic(j)) continue;
        double reduced = cost(j);
        for (Eigen::Index r = 0; r < rows(); ++r) reduced -= cost(basis_[r]) * t_(r, j);
        if (reduced < -eps_) {
          entering = j;  // Bland: smallest index
          break;
        }
      }
      if (entering < 0) return true;

      Eigen::Index leaving = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        if (t_(r, entering) > eps_) {
          const double ratio = t_(r, rhs()) / t_(r, entering);
          if (ratio < best - eps_ ||
              (std::abs(ratio - best) <= eps_ && leaving >= 0 && basis_[r] < basis_[leaving])) {
            best = ratio;
            leaving = r;
          }
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
    return false;
  }

  bool is_basic(Eigen::Index col) const {
    for (int b : basis_) {
      if (b == col) return true;
    }
    return false;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  double eps_;
};

}  // namespace detail

/// Returns the optimal vertex, or nullopt when the program is infeasible or
/// unbounded.
inline std::optional<Solution> minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& cost, double eps = 1e-11) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();

  // Columns: x (n) | surplus (m) | artificial (m) | rhs.
  // Row r reads  A_r x - s_r + a_r = b_r  (negated when b_r < 0, in which case
  // s_r enters the starting basis instead of a_r).
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, n + 2 * m + 1);
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    t.block(r, 0, 1, n) = sign * A.row(r);
    t(r, n + r) = -sign;
    t(r, n + 2 * m) = sign * b(r);
    if (sign < 0.0) {
      basis[static_cast<std::size_t>(r)] = static_cast<int>(n + r);
    } else {
      t(r, n + m + r) = 1.0;
      basis[static_cast<std::size_t>(r)] = static_cast<int>(n + m + r);
    }
  }
  detail::Tableau tab(std::move(t), std::move(basis), eps);

  const Eigen::Index cols = n + 2 * m;
  std::vector<bool> all(static_cast<std::size_t>(cols), true);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  phase1.segment(n + m, m).setOnes();
  tab.minimize(phase1, all);

  double infeasibility = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.basis()[r] >= n + m) infeasibility += tab.table()(r, cols);
  }
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (infeasibility > 1e3 * eps * scale) return std::nullopt;

  // Drive zero-level artificials out of the basis where possible.
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.basis()[r] < n + m) continue;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (std::abs(tab.table()(r, j)) > eps) {
        tab.pivot(r, j);
        break;
      }
    }
  }

  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);
  for (Eigen::Index j = n + m; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = cost;
  if (!tab.minimize(phase2, allowed)) return std::nullopt;

  Solution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int col = tab.basis()[r];
    if (col < n) sol.x(col) = tab.table()(r, cols);
  }
  sol.x = sol.x.cwiseMax(0.0);
  sol.objective = cost.dot(sol.x);
  return sol;
}

}  // namespace dirikit::lp
