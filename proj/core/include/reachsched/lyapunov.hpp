#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reachsched/class_k.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched {

/// V(x, y) = ||W (x - y)||, kappa(x, y, u) = u - K (x - y), for x+ = A x + B u + w.
/// W defaults to the identity.
struct LinearGainFamily {
  Mat K;
  Mat W;
  Mat A_cl;
  double contraction = 0.0;  // sigma_max(W A_cl W^-1)
};

/// V(x, y) = (x - y)' P (x - y), kappa(x, y, u) = u - k_u (x - y),
/// rho(r) = rho_lin r + rho_quad r^2.
struct QuadraticFamily {
  Mat P;
  Mat Q;
  Mat k_u;
  double rho_lin = 0.0;
  double rho_quad = 0.0;
};

class DeltaIssClf {
 public:
  static DeltaIssClf linear_gain(const SystemModel& sys, const Mat& K, std::optional<Mat> W = std::nullopt);
  static DeltaIssClf quadratic(const Mat& P, const Mat& Q, const Mat& k_u, double rho_lin, double rho_quad);

  double value(const Vec& x, const Vec& y) const;
  Vec feedback(const Vec& x, const Vec& y, const Vec& u) const;

  int state_dim() const { return n_; }
  const ClassKFunction& alpha_lower() const { return alpha_lower_; }
  const ClassKFunction& alpha_upper() const { return alpha_upper_; }
  const ClassKFunction& alpha() const { return alpha_; }
  const ClassKFunction& rho() const { return rho_; }
  const ClassKFunction& alpha_u() const { return alpha_u_; }
  const ClassKFunction& rho_u() const { return rho_u_; }

  const std::variant<LinearGainFamily, QuadraticFamily>& family() const { return family_; }
  std::string family_name() const;

 private:
  DeltaIssClf(std::variant<LinearGainFamily, QuadraticFamily> family, int n, ClassKFunction alpha_lower,
              ClassKFunction alpha_upper, ClassKFunction alpha, ClassKFunction rho, ClassKFunction alpha_u,
              ClassKFunction rho_u);

  std::variant<LinearGainFamily, QuadraticFamily> family_;
  int n_;
  ClassKFunction alpha_lower_;
  ClassKFunction alpha_upper_;
  ClassKFunction alpha_;
  ClassKFunction rho_;
  ClassKFunction alpha_u_;
  ClassKFunction rho_u_;
};

double clf_value(const DeltaIssClf& clf, const Vec& x, const Vec& y);
Vec clf_feedback(const DeltaIssClf& clf, const Vec& x, const Vec& y, const Vec& u);

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::pair<double, double> symmetric_eigenvalues_2x2(const Mat& S);

struct ViolatingTuple {
  Vec x;
  Vec y;
  Vec u;
  Vec w1;
  Vec w2;
  double slack = 0.0;
};

struct InequalityCheck {
  std::string name;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  std::optional<ViolatingTuple> first_violation;
};

struct VerificationReport {
  InequalityCheck sandwich;   // alpha_lower(|x-y|) <= V <= alpha_upper(|x-y|)
  InequalityCheck decrease;   // V(x+, y+) - V(x, y) <= -alpha(|x-y|) + rho(|w1-w2|)
  InequalityCheck input;      // |kappa| <= alpha_u(|x-y|) + rho_u(|u|)
  std::size_t grid_points = 0;
  std::size_t pairs = 0;

  bool ok() const { return sandwich.violations + decrease.violations + input.violations == 0; }
};

struct GridOptions {
  int density = 21;
  /// Upper bound on (x, y) pairs; larger grids are subsampled deterministically.
  std::size_t max_pairs = 400000;
  double tolerance = 1e-12;
};

/// Checks the CLF inequalities on a uniform grid over X x X, u in {0} and a
/// sampled boundary of U, and w1, w2 in {0, +-w_max e_i}.
VerificationReport verify_clf_on_grid(const DeltaIssClf& clf, const SystemModel& sys, int grid_density);
VerificationReport verify_clf_on_grid(const DeltaIssClf& clf, const SystemModel& sys, const GridOptions& opts);

}  // namespace reachsched
