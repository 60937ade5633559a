#pragma once

#include <Eigen/Dense>

namespace reachsched {

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Dense two-phase simplex on the tableau with Bland's lowest-index rule.
///
/// Solves  max c'x  s.t.  A x <= b  with every x_j free in sign. Free
/// variables are split internally into nonnegative parts.
///
/// Throws InfeasibleError when the feasible set is empty or the objective is
/// unbounded above.
LpSolution maximize_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& b);

}  // namespace reachsched
