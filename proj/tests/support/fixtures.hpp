#pragma once

#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "reachsched/config.hpp"
#include "reachsched/error_model.hpp"
#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/simulator.hpp"
#include "reachsched/symbolic_abstraction.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched::testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(REACHSCHED_SCENARIO_DIR) + "/" + name;
}

inline ScenarioConfig load_scenario(const std::string& name) { return load_config(scenario_path(name)); }

/// Scalar norm model with g(v,1,w) = 0.6 v + w and g(v,0,w) = 1.2 v + w.
inline ErrorBoundModel toy_model(double w_max = 0.1, double u_max = std::numeric_limits<double>::infinity()) {
  ErrorBoundModel::Parts p{ClassKFunction::linear(0.4), ClassKFunction::linear(1.0), ClassKFunction::linear(1.0),
                           ClassKFunction::linear(1.0), ClassKFunction::linear(1.0), ClassKFunction::linear(1.0),
                           1.2, 1.0, w_max, u_max};
  return ErrorBoundModel(p, 10.0);
}

inline Partition toy_partition() { return build_partition(5.0, 6); }

/// Scalar reference of length L with zero states and given control norms.
inline ReferenceTrajectory flat_reference(int L, double u_norm = 0.0) {
  ReferenceTrajectory ref;
  for (int k = 0; k <= L; ++k) ref.states.push_back(Vec::Zero(1));
  for (int k = 0; k < L; ++k) ref.controls.push_back(Vec::Constant(1, u_norm));
  return ref;
}

inline SafetyEnvelope flat_envelope(int L, double v_max, double v_init, double v_final) {
  SafetyEnvelope env;
  env.v_max.assign(static_cast<std::size_t>(L + 1), v_max);
  env.v_init = v_init;
  env.v_final = v_final;
  return env;
}

/// Randomised small instance for the abstraction-vs-exact comparisons.
struct RandomInstance {
  ErrorBoundModel model;
  SafetyEnvelope env;
  ReferenceTrajectory ref;
  int M;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int max_L = 12) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int L = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_L));
  const double contraction = 0.3 + 0.6 * U(rng);
  const double open_loop = 0.9 + 0.5 * U(rng);
  const double w = 0.05 * U(rng);
  const double u_max = 2.0 + 2.0 * U(rng);
  ErrorBoundModel::Parts p{ClassKFunction::linear(1.0 - contraction), ClassKFunction::linear(1.0),
                           ClassKFunction::linear(1.0), ClassKFunction::linear(1.0),
                           ClassKFunction::linear(0.5 + U(rng)), ClassKFunction::linear(1.0),
                           open_loop, 1.0, w, u_max};
  ErrorBoundModel model(p, 10.0);
  SafetyEnvelope env;
  for (int k = 0; k <= L; ++k) env.v_max.push_back(0.3 + 1.7 * U(rng));
  env.v_init = 0.2 + 0.8 * U(rng);
  env.v_final = 0.05 + 0.6 * U(rng);
  ReferenceTrajectory ref;
  for (int k = 0; k <= L; ++k) ref.states.push_back(Vec::Zero(1));
  for (int k = 0; k < L; ++k) ref.controls.push_back(Vec::Constant(1, 1.5 * U(rng)));
  const int M = 2 + static_cast<int>(rng() % 60);
  return RandomInstance{std::move(model), std::move(env), std::move(ref), M};
}

}  // namespace reachsched::testing

namespace reachsched::testing {

/// 2-D plant x+ = 1.2 x + u + w on [-10, 10]^2 with K = 0.6 I, so that
/// sigma_max(A) = 1.2 and sigma_max(A_cl) = 0.6.
inline SystemModel toy_system(double w_max = 0.1, double u_max = 100.0) {
  LinearDynamics d{1.2 * Mat::Identity(2, 2), Mat::Identity(2, 2)};
  FreeSpaceRegion X(2, {{-10, -10}, {10, -10}, {10, 10}, {-10, 10}}, {});
  return SystemModel(d, 1.2, 1.0, NormBall{u_max}, NormBall{w_max}, X,
                     HPolytope::box(Eigen::Vector2d(-6, -1), Eigen::Vector2d(-4, 1)),
                     HPolytope::box(Eigen::Vector2d(4, -1), Eigen::Vector2d(6, 1)));
}

inline DeltaIssClf toy_clf(const SystemModel& sys) { return DeltaIssClf::linear_gain(sys, 0.6 * Mat::Identity(2, 2)); }

inline DeltaIssClf pendulum_clf(double q = 0.29, double rho_lin = 3.5, double rho_quad = 0.16) {
  Mat P(2, 2);
  P << 2.1, 0.45, 0.45, 0.43;
  Mat ku(1, 2);
  ku << 2.9, 2.0;
  return DeltaIssClf::quadratic(P, q * Mat::Identity(2, 2), ku, rho_lin, rho_quad);
}

/// Every stage of a scenario built in memory, same order as the CLI.
struct Pipeline {
  ScenarioConfig cfg;
  ReferenceTrajectory ref;
  SafetyEnvelope env;
  ErrorBoundModel model;
  TimedSymbolicSystem TA;
  ScheduleResult schedule;

  Scenario scenario() const { return Scenario{&cfg.system, &cfg.clf, &ref, &TA, &schedule.schedule}; }
};

inline std::unique_ptr<Pipeline> build_pipeline(ScenarioConfig cfg, std::optional<int> M = std::nullopt) {
  const SystemModel& sys = cfg.system;
  ReferenceTrajectory ref = plan_rrt(sys, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
  SafetyEnvelope env = safety_envelope(cfg.clf, sys, ref);
  ErrorBoundModel model = ErrorBoundModel::from_clf(cfg.clf, sys, env.max_level());
  const Partition part = build_partition(env, M.value_or(cfg.abstraction.M), cfg.abstraction.nu_bar);
  TimedSymbolicSystem TA = build_timed_system(build_symbolic_system(model, part), env, ref, model);
  ScheduleResult sched = min_comm_schedule(TA);
  return std::make_unique<Pipeline>(Pipeline{std::move(cfg), std::move(ref), std::move(env), std::move(model),
                                             std::move(TA), std::move(sched)});
}

/// Built once per process; the vehicle scenario is the shared end-to-end fixture.
inline const Pipeline& vehicle_pipeline() {
  static const std::unique_ptr<Pipeline> p = build_pipeline(load_scenario("vehicle.json"));
  return *p;
}

}  // namespace reachsched::testing
