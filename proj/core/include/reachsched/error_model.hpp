#pragma once

#include <optional>
#include <vector>

#include "reachsched/class_k.hpp"
#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched {

/// Scalar bound on the next tracking error:
///   c = 1:  v - alpha2(v) + rho(w)
///   c = 0:  alpha_upper(L_x alpha_lower^-1(v) + L_w w)
/// with alpha2 = alpha o alpha_upper^-1. +inf maps to +inf.
class ErrorBoundModel {
 public:
  struct Parts {
    ClassKFunction alpha2;
    ClassKFunction rho;
    ClassKFunction alpha_upper;
    ClassKFunction alpha_lower;
    ClassKFunction alpha_u;
    ClassKFunction rho_u;
    double lipschitz_x = 1.0;
    double lipschitz_w = 1.0;
    double w_max = 0.0;
    double u_max = 0.0;
  };

  /// horizon: largest error level the model is used on; the contraction
  /// branch is made monotone on [0, horizon].
  explicit ErrorBoundModel(Parts parts, double horizon = 1.0);

  static ErrorBoundModel from_clf(const DeltaIssClf& clf, const SystemModel& sys, double horizon = 1.0);

  double g(double v, int c, double w) const;

  const ClassKFunction& alpha2() const { return p_.alpha2; }
  const ClassKFunction& rho() const { return p_.rho; }
  const ClassKFunction& alpha_upper() const { return p_.alpha_upper; }
  const ClassKFunction& alpha_lower() const { return p_.alpha_lower; }
  const ClassKFunction& alpha_u() const { return p_.alpha_u; }
  const ClassKFunction& rho_u() const { return p_.rho_u; }
  double lipschitz_x() const { return p_.lipschitz_x; }
  double lipschitz_w() const { return p_.lipschitz_w; }
  double w_max() const { return p_.w_max; }
  double u_max() const { return p_.u_max; }
  double horizon() const { return horizon_; }
  /// True when alpha2 was replaced by min(alpha2, (1 - 1e-6) Id).
  bool alpha2_clamped() const { return clamped_; }

  /// Input needed at error level v with reference control norm u_ref.
  double input_demand(double v, double u_ref_norm) const;

 private:
  Parts p_;
  double horizon_;
  bool clamped_ = false;
};

double g_step(const ErrorBoundModel& model, double v, int c, double w);

/// v̄_0..v̄_L with v̄_{k+1} = g(v̄_k, c_k, w_max).
std::vector<double> propagate_bounds(const ErrorBoundModel& model, double v0, const std::vector<int>& schedule);

struct SafetyEnvelope {
  std::vector<double> v_max;  // L + 1 entries
  double v_init = 0.0;
  double v_final = 0.0;

  int horizon() const { return static_cast<int>(v_max.size()) - 1; }
  double max_level() const;
};

SafetyEnvelope safety_envelope(const DeltaIssClf& clf, const SystemModel& sys, const ReferenceTrajectory& ref);

struct ConditionReport {
  bool c1 = true;
  bool c2 = true;
  std::optional<int> c2_first_failure;
  bool c3 = true;
  bool c4 = true;
  std::optional<int> c4_first_failure;
  /// v_init > v_max[0]; reported only.
  bool k0_warning = false;
  std::vector<double> bounds;

  bool ok() const { return c1 && c2 && c3 && c4; }
};

ConditionReport check_c1_c4(const ErrorBoundModel& model, const SafetyEnvelope& env, const ReferenceTrajectory& ref,
                            const std::vector<int>& schedule);

}  // namespace reachsched
