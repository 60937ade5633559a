#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reachsched/error_model.hpp"
#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/scheduler_runtime.hpp"
#include "reachsched/symbolic_abstraction.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched {

enum class DisturbanceKind { kZero, kWorstCase, kUniformBall };

DisturbanceKind parse_disturbance_kind(const std::string& name);
std::string to_string(DisturbanceKind kind);

class DisturbanceModel {
 public:
  DisturbanceModel(DisturbanceKind kind, int dim, double w_max);

  Vec sample(std::mt19937_64& rng) const;
  std::vector<Vec> sample_sequence(std::mt19937_64& rng, int count) const;

  DisturbanceKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double w_max() const { return w_max_; }

 private:
  DisturbanceKind kind_;
  int dim_;
  double w_max_;
};

Vec sample_disturbance(const DisturbanceModel& dm, std::mt19937_64& rng);

struct ValidityReport {
  bool dynamics_ok = true;
  std::optional<int> first_dynamics_violation;
  bool safety_ok = true;
  std::optional<int> first_unsafe;
  bool reachability_ok = true;
  int comm_count = 0;
  double min_slack = 0.0;

  bool valid() const { return dynamics_ok && safety_ok && reachability_ok; }
};

ValidityReport check_validity(const SystemModel& sys, const ExecutionTrace& trace);

/// Uniform sample in a polytope by rejection inside its bounding box.
Vec sample_in_polytope(const HPolytope& p, std::mt19937_64& rng);

/// Per-run seed derived from the campaign seed and the run index.
std::uint64_t run_seed(std::uint64_t campaign_seed, std::uint64_t index);

/// x0 and the disturbance sequence of one run; identical for every mode.
struct RunRealization {
  Vec x0;
  std::vector<Vec> disturbances;
};

RunRealization realize(const SystemModel& sys, const DisturbanceModel& dm, std::uint64_t seed, int steps);

enum class RuntimeMode { kOffline, kOnline };

struct RunSummary {
  int index = 0;
  bool valid = false;
  bool replans_ok = true;
  int comm_count = 0;
  double min_slack = 0.0;
  std::string error;
};

struct CampaignStats {
  std::vector<RunSummary> runs;
  int valid_runs = 0;
  double validity_rate = 0.0;
  double comm_mean = 0.0;
  int comm_min = 0;
  int comm_max = 0;
  double min_slack = 0.0;
};

struct Scenario {
  const SystemModel* sys = nullptr;
  const DeltaIssClf* clf = nullptr;
  const ReferenceTrajectory* ref = nullptr;
  const TimedSymbolicSystem* TA = nullptr;  // online mode
  const CommSchedule* schedule = nullptr;   // offline mode
};

/// Number of worker threads: REACHSCHED_THREADS if set, else hardware concurrency.
int worker_threads();

/// N independent closed-loop runs; run i uses run_seed(seed, i).
CampaignStats monte_carlo(const Scenario& sc, RuntimeMode mode, int N, DisturbanceKind kind, std::uint64_t seed,
                          std::vector<ExecutionTrace>* traces = nullptr);

/// One leg of the periodic traverse: X_I -> X_F with its own reference.
struct TraverseLeg {
  Scenario scenario;
};

struct TraverseResult {
  int steps = 0;
  int comm_count = 0;
  int legs_completed = 0;
  bool valid = true;
  std::string error;
  std::vector<Vec> states;
  std::vector<int> flags;
};

/// Alternates between two legs, switching whenever the state enters the
/// current target, for `budget` steps starting from x0.
TraverseResult traverse(const TraverseLeg& first, const TraverseLeg& second, RuntimeMode mode, const Vec& x0,
                        const DisturbanceModel& dm, std::uint64_t seed, int budget = 1000);

}  // namespace reachsched
