#include "reachsched/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

struct Tableau {
  Eigen::MatrixXd T;         // m rows, ncols + 1 (last column is the rhs)
  std::vector<int> basis;    // basic column per row
  std::vector<bool> banned;  // columns that may not enter the basis

  int rows() const { return static_cast<int>(T.rows()); }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    }
    basis[r] = c;
  }
};

enum class Outcome { kOptimal, kUnbounded };

Outcome run_simplex(Tableau& tab, const Eigen::VectorXd& obj) {
  const int m = tab.rows();
  const int n = tab.cols();
  const int max_iter = 50 * (m + n) + 1000;
  for (int iter = 0; iter < max_iter; ++iter) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (tab.banned[j]) continue;
      double reduced = obj(j);
      for (int i = 0; i < m; ++i) reduced -= obj(tab.basis[i]) * tab.T(i, j);
      if (reduced > kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Outcome::kOptimal;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tab.T(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab.T(i, n) / a;
      if (ratio < best_ratio - 1e-14 ||
          (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 && tab.basis[i] < tab.basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) return Outcome::kUnbounded;
    tab.pivot(leave, enter);
  }
  throw InfeasibleError("simplex iteration limit reached");
}

}  // namespace

LpSolution maximize_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int nx = static_cast<int>(A.cols());
  if (c.size() != nx || b.size() != m) {
    throw ContractViolation("maximize_lp: dimension mismatch");
  }

  // Columns: [x+ (nx) | x- (nx) | slack (m) | artificial (n_art)]
  std::vector<int> art_row;
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0.0) art_row.push_back(i);
  }
  const int n_art = static_cast<int>(art_row.size());
  const int n_struct = 2 * nx + m;
  const int ncols = n_struct + n_art;

  Tableau tab;
  tab.T = Eigen::MatrixXd::Zero(m, ncols + 1);
  tab.basis.assign(m, -1);
  tab.banned.assign(ncols, false);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, nx) = sign * A.row(i);
    tab.T.block(i, nx, 1, nx) = -sign * A.row(i);
    tab.T(i, 2 * nx + i) = sign;
    tab.T(i, ncols) = sign * b(i);
    if (sign > 0.0) tab.basis[i] = 2 * nx + i;
  }
  for (int a = 0; a < n_art; ++a) {
    const int i = art_row[a];
    tab.T(i, n_struct + a) = 1.0;
    tab.basis[i] = n_struct + a;
  }

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
    phase1.tail(n_art).setConstant(-1.0);
    run_simplex(tab, phase1);
    double infeasibility = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= n_struct) infeasibility += tab.T(i, ncols);
    }
    if (infeasibility > 1e-9) throw InfeasibleError("linear program is infeasible");

    // Drive zero-level artificials out of the basis; drop redundant rows.
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= n_struct) {
        int col = -1;
        for (int j = 0; j < n_struct; ++j) {
          if (std::abs(tab.T(i, j)) > 1e-9) {
            col = j;
            break;
          }
        }
        if (col >= 0) {
          tab.pivot(i, col);
        } else {
          continue;
        }
      }
      keep.push_back(i);
    }
    if (static_cast<int>(keep.size()) < m) {
      Tableau reduced;
      reduced.T.resize(static_cast<Eigen::Index>(keep.size()), ncols + 1);
      for (std::size_t r = 0; r < keep.size(); ++r) {
        reduced.T.row(static_cast<Eigen::Index>(r)) = tab.T.row(keep[r]);
        reduced.basis.push_back(tab.basis[keep[r]]);
      }
      reduced.banned = tab.banned;
      tab = std::move(reduced);
    }
    for (int a = 0; a < n_art; ++a) tab.banned[n_struct + a] = true;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ncols);
  phase2.head(nx) = c;
  phase2.segment(nx, nx) = -c;
  if (run_simplex(tab, phase2) == Outcome::kUnbounded) {
    throw InfeasibleError("linear program is unbounded");
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < tab.rows(); ++i) z(tab.basis[i]) = tab.T(i, ncols);
  LpSolution sol;
  sol.x = z.head(nx) - z.segment(nx, nx);
  sol.objective = c.dot(sol.x);
  return sol;
}

}  // namespace reachsched
