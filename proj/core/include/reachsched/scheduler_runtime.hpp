#pragma once

#include <vector>

#include "reachsched/error_model.hpp"
#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/symbolic_abstraction.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched {

struct Message {
  enum class Kind { kStateUp, kControlBatchDown };
  Kind kind = Kind::kStateUp;
  int k = 0;
  int payload = 0;  // batch length for control batches
};

struct CommRecord {
  int k = 0;
  int batch = 0;          // l*_k: reference controls sent after u_k
  int symbol = -1;        // online only
  double anchor = 0.0;    // online only: gamma(symbol)
  int planned_cost = -1;  // online only: cost of the re-planned suffix
};

struct ExecutionTrace {
  std::vector<Vec> states;        // x_0..x_T
  std::vector<Vec> controls;      // u_0..u_{T-1}
  std::vector<Vec> disturbances;  // w_0..w_{T-1}
  std::vector<int> flags;         // c_0..c_{T-1}
  std::vector<double> errors;     // V(x_k, x̂_k)
  std::vector<double> bounds;     // filled by attach_bounds
  std::vector<CommRecord> comms;
  std::vector<Message> messages;
  bool online = false;
  bool stopped_on_target = false;
  double planning_seconds = 0.0;

  int steps() const { return static_cast<int>(controls.size()); }
  int comm_count() const;
};

struct RunOptions {
  /// End the run as soon as x_{k+1} lies in X_F.
  bool stop_on_target = false;
};

int zeropref(const std::vector<int>& bits);

/// Plays back a fixed schedule. disturbances must hold at least L entries.
ExecutionTrace run_offline(const SystemModel& sys, const DeltaIssClf& clf, const ReferenceTrajectory& ref,
                           const CommSchedule& schedule, const Vec& x0, const std::vector<Vec>& disturbances,
                           const RunOptions& opts = {});

/// Self-triggered execution: at every transmission the controller re-plans
/// from sym_of_state(x_k) and sends u_k plus the reference controls for the
/// next silent stretch.
ExecutionTrace run_online(const SystemModel& sys, const DeltaIssClf& clf, const ReferenceTrajectory& ref,
                          const TimedSymbolicSystem& TA, const Vec& x0, const std::vector<Vec>& disturbances,
                          const RunOptions& opts = {});

/// v̄_k along the executed flags: from v_init offline, re-anchored at
/// gamma(s(k)) at every online re-plan.
void attach_bounds(ExecutionTrace& trace, const ErrorBoundModel& model, double v_init);

}  // namespace reachsched
