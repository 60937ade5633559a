#include <benchmark/benchmark.h>

#include <string>

#include "reachsched/config.hpp"
#include "reachsched/error_model.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/symbolic_abstraction.hpp"

using namespace reachsched;

namespace {

struct VehicleStages {
  ScenarioConfig cfg;
  ReferenceTrajectory ref;
  SafetyEnvelope env;
  ErrorBoundModel model;
};

const VehicleStages& vehicle() {
  static const VehicleStages v = [] {
    ScenarioConfig cfg = load_config(std::string(REACHSCHED_SCENARIO_DIR) + "/vehicle.json");
    ReferenceTrajectory ref = plan_rrt(cfg.system, cfg.epsilon, cfg.rrt, cfg.rrt_seed);
    SafetyEnvelope env = safety_envelope(cfg.clf, cfg.system, ref);
    ErrorBoundModel model = ErrorBoundModel::from_clf(cfg.clf, cfg.system, env.max_level());
    return VehicleStages{std::move(cfg), std::move(ref), std::move(env), std::move(model)};
  }();
  return v;
}

void BM_BuildSymbolicSystem(benchmark::State& state) {
  const VehicleStages& v = vehicle();
  const Partition part = build_partition(v.env, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_symbolic_system(v.model, part));
}
BENCHMARK(BM_BuildSymbolicSystem)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BuildTimedSystem(benchmark::State& state) {
  const VehicleStages& v = vehicle();
  const SymbolicErrorSystem T = build_symbolic_system(v.model, build_partition(v.env, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(build_timed_system(T, v.env, v.ref, v.model));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildTimedSystem)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_MinCommSchedule(benchmark::State& state) {
  const VehicleStages& v = vehicle();
  const SymbolicErrorSystem T = build_symbolic_system(v.model, build_partition(v.env, static_cast<int>(state.range(0))));
  const TimedSymbolicSystem TA = build_timed_system(T, v.env, v.ref, v.model);
  for (auto _ : state) benchmark::DoNotOptimize(min_comm_schedule(TA));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MinCommSchedule)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_PlanRrt(benchmark::State& state) {
  const VehicleStages& v = vehicle();
  for (auto _ : state) benchmark::DoNotOptimize(plan_rrt(v.cfg.system, v.cfg.epsilon, v.cfg.rrt, v.cfg.rrt_seed));
}
BENCHMARK(BM_PlanRrt)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
