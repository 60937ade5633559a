#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "reachsched/error_model.hpp"
#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"

namespace reachsched {

/// Levels nu_m = nu_bar m / (M - 1) for m < M and nu_M = +inf.
/// Symbols are 0-based: symbol i carries level levels[i].
struct Partition {
  int M = 0;
  double nu_bar = 0.0;
  std::vector<double> levels;

  int size() const { return M; }
  double gamma(int s) const { return levels.at(static_cast<std::size_t>(s)); }
  /// Lowest symbol whose level is >= v.
  int lowest_dominating(double v) const;
};

Partition build_partition(double nu_bar, int M);
/// nu_bar taken as the envelope maximum unless overridden.
Partition build_partition(const SafetyEnvelope& env, int M, std::optional<double> nu_bar_override = std::nullopt);

/// Deterministic quantized error dynamics: next[s][c].
struct SymbolicErrorSystem {
  Partition partition;
  std::vector<std::array<int, 2>> next;

  int size() const { return partition.M; }
  double gamma(int s) const { return partition.gamma(s); }
};

SymbolicErrorSystem build_symbolic_system(const ErrorBoundModel& model, const Partition& part);

struct TimedEdge {
  int from = 0;
  int bit = 0;
  int to = 0;
};

/// Horizon-unrolled system: layers[k] holds the edges from time k to k + 1.
struct TimedSymbolicSystem {
  int L = 0;
  SymbolicErrorSystem base;
  std::vector<std::vector<TimedEdge>> layers;
  std::vector<std::vector<int>> table;  // table[k][2 s + c] = successor or -1
  int s_init = 0;
  std::vector<bool> terminal;  // indexed by symbol, at time L
  std::uint64_t iterations = 0;

  int size() const { return base.size(); }
  /// Successor of (s, k) under bit c if that edge survived pruning, else -1.
  int successor(int s, int k, int c) const;
  std::size_t edge_count() const;
};

/// Unrolls T over the horizon and keeps an edge ((s_i,k), c, (s_j,k+1)) iff
/// gamma(s_i) <= v_max[k], gamma(s_j) <= v_max[k+1], and for c = 1 the input
/// bound holds at level gamma(s_i).
///
/// Throws InfeasibleError when v_init exceeds nu_bar (no initial symbol).
TimedSymbolicSystem build_timed_system(const SymbolicErrorSystem& T, const SafetyEnvelope& env,
                                       const ReferenceTrajectory& ref, const ErrorBoundModel& model);

struct CommSchedule {
  enum class Origin { kOffline, kOnline };
  std::vector<int> bits;
  Origin origin = Origin::kOffline;
  int start = 0;  // first time step covered by bits

  int cost() const;
};

struct ScheduleResult {
  CommSchedule schedule;
  std::vector<int> run;  // symbols s_start..s_L
  int cost = 0;
};

/// Minimum number of communications from (s_init, 0) to a terminal symbol,
/// with the first bit forced to 1. Ties: smallest terminal level, then the
/// lexicographically smallest bit string (latest communications).
///
/// Throws InfeasibleError carrying the first unreachable layer.
ScheduleResult min_comm_schedule(const TimedSymbolicSystem& TA);

/// Same search from (s, k) with the first bit pinned to 1.
ScheduleResult optcom_run(const TimedSymbolicSystem& TA, int s, int k);
std::vector<int> optcom(const TimedSymbolicSystem& TA, int s, int k);

/// Lowest symbol with V(x, x̂) <= gamma(s).
int sym_of_state(const SymbolicErrorSystem& T, const DeltaIssClf& clf, const Vec& x, const Vec& x_hat);

/// Whether bits (starting at time 0) trace an accepting run of TA.
bool accepts(const TimedSymbolicSystem& TA, const std::vector<int>& bits);

struct NaiveResult {
  std::optional<CommSchedule> schedule;
  std::uint64_t nodes = 0;
};

/// Exhaustive binary tree over the exact bound recursion with the first bit
/// forced to 1. Refuses horizons above L_cap.
NaiveResult naive_tree_schedule(const ErrorBoundModel& model, const SafetyEnvelope& env,
                                const ReferenceTrajectory& ref, int L_cap = 20);

}  // namespace reachsched
