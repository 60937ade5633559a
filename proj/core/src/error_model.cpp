#include "reachsched/error_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool contraction_monotone(const ClassKFunction& alpha2, double horizon) {
  constexpr int kPoints = 1000;
  double prev = 0.0;
  for (int i = 1; i <= kPoints; ++i) {
    const double r = horizon * i / kPoints;
    const double val = r - alpha2(r);
    if (!(val > prev)) return false;
    prev = val;
  }
  return true;
}

}  // namespace

ErrorBoundModel::ErrorBoundModel(Parts parts, double horizon) : p_(std::move(parts)), horizon_(horizon) {
  if (!(p_.lipschitz_x > 0.0) || !(p_.lipschitz_w > 0.0)) {
    throw ContractViolation("ErrorBoundModel: Lipschitz constants must be positive");
  }
  if (p_.w_max < 0.0 || p_.u_max < 0.0) throw ContractViolation("ErrorBoundModel: negative set radius");
  if (!(horizon_ > 0.0)) throw ContractViolation("ErrorBoundModel: horizon must be positive");
  if (!contraction_monotone(p_.alpha2, horizon_)) {
    p_.alpha2 = ClassKFunction::min_identity(p_.alpha2, 1e-6);
    clamped_ = true;
  }
}

ErrorBoundModel ErrorBoundModel::from_clf(const DeltaIssClf& clf, const SystemModel& sys, double horizon) {
  Parts parts{ClassKFunction::compose(clf.alpha(), clf.alpha_upper().inverse()),
              clf.rho(),
              clf.alpha_upper(),
              clf.alpha_lower(),
              clf.alpha_u(),
              clf.rho_u(),
              sys.lipschitz_x(),
              sys.lipschitz_w(),
              sys.w_max(),
              sys.u_max()};
  return ErrorBoundModel(std::move(parts), horizon);
}

double ErrorBoundModel::g(double v, int c, double w) const {
  if (std::isnan(v) || v < 0.0 || std::isnan(w) || w < 0.0) {
    throw ContractViolation("g: arguments must be nonnegative");
  }
  if (c != 0 && c != 1) throw ContractViolation("g: communication bit must be 0 or 1");
  if (v == kInf) return kInf;
  if (c == 1) return std::max(0.0, v - p_.alpha2(v)) + p_.rho(w);
  return p_.alpha_upper(p_.lipschitz_x * p_.alpha_lower.invert(v) + p_.lipschitz_w * w);
}

double ErrorBoundModel::input_demand(double v, double u_ref_norm) const {
  if (v == kInf) return kInf;
  return p_.alpha_u(p_.alpha_lower.invert(v)) + p_.rho_u(u_ref_norm);
}

double g_step(const ErrorBoundModel& model, double v, int c, double w) { return model.g(v, c, w); }

std::vector<double> propagate_bounds(const ErrorBoundModel& model, double v0, const std::vector<int>& schedule) {
  std::vector<double> out;
  out.reserve(schedule.size() + 1);
  out.push_back(v0);
  for (int c : schedule) out.push_back(model.g(out.back(), c, model.w_max()));
  return out;
}

double SafetyEnvelope::max_level() const {
  return v_max.empty() ? 0.0 : *std::max_element(v_max.begin(), v_max.end());
}

SafetyEnvelope safety_envelope(const DeltaIssClf& clf, const SystemModel& sys, const ReferenceTrajectory& ref) {
  if (ref.states.empty()) throw ContractViolation("safety_envelope: empty reference");
  SafetyEnvelope env;
  env.v_max.reserve(ref.states.size());
  for (const Vec& xh : ref.states) {
    const double d = signed_distance(sys.free_space(), xh);
    env.v_max.push_back(d > 0.0 ? clf.alpha_lower()(d) : 0.0);
  }
  for (const Vec& vert : sys.initial_set().vertices()) {
    env.v_init = std::max(env.v_init, clf.value(vert, ref.states.front()));
  }
  const HPolytope& target = sys.target_set();
  if (!target.contains(ref.states.back(), 0.0)) {
    throw ContractViolation("safety_envelope: reference does not end in the target set");
  }
  const double depth = target.depth(ref.states.back());
  env.v_final = depth > 0.0 ? clf.alpha_lower()(depth) : 0.0;
  return env;
}

ConditionReport check_c1_c4(const ErrorBoundModel& model, const SafetyEnvelope& env, const ReferenceTrajectory& ref,
                            const std::vector<int>& schedule) {
  const int L = static_cast<int>(schedule.size());
  if (env.horizon() != L || ref.horizon() != L) throw ContractViolation("check_c1_c4: horizon mismatch");
  ConditionReport rep;
  rep.bounds = propagate_bounds(model, env.v_init, schedule);
  rep.c1 = rep.bounds.front() == env.v_init;
  rep.k0_warning = env.v_init > env.v_max.front();
  for (int k = 1; k <= L; ++k) {
    if (!(rep.bounds[k] <= env.v_max[k])) {
      rep.c2 = false;
      rep.c2_first_failure = k;
      break;
    }
  }
  rep.c3 = rep.bounds[L] <= env.v_final;
  for (int k = 0; k < L; ++k) {
    if (schedule[k] == 1 && !(model.input_demand(rep.bounds[k], ref.controls[k].norm()) <= model.u_max())) {
      rep.c4 = false;
      rep.c4_first_failure = k;
      break;
    }
  }
  return rep;
}

}  // namespace reachsched
