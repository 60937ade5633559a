#include "reachsched/scheduler_runtime.hpp"

#include <chrono>
#include <deque>
#include <functional>
#include <numeric>
#include <string>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

struct Batch {
  std::vector<Vec> controls;
  CommRecord record;
};

// Controller side: given (k, x_k), return u_k followed by the batched
// reference controls.
using Controller = std::function<Batch(int, const Vec&)>;

ExecutionTrace execute(const SystemModel& sys, const DeltaIssClf& clf, const ReferenceTrajectory& ref, const Vec& x0,
                       const std::vector<Vec>& disturbances, const RunOptions& opts, const Controller& controller,
                       const std::function<void(int, bool)>& check_flag) {
  const int L = ref.horizon();
  if (x0.size() != sys.state_dim()) throw ContractViolation("run: x0 has the wrong dimension");
  if (!sys.initial_set().contains(x0, 1e-9)) throw ContractViolation("run: x0 is not in the initial set");
  if (static_cast<int>(disturbances.size()) < L) throw ContractViolation("run: too few disturbance samples");

  ExecutionTrace tr;
  tr.states.push_back(x0);
  tr.errors.push_back(clf.value(x0, ref.states[0]));
  std::deque<Vec> buffer;  // plant-side control buffer
  Vec x = x0;
  for (int k = 0; k < L; ++k) {
    const bool comm = buffer.empty();
    check_flag(k, comm);
    if (comm) {
      tr.messages.push_back({Message::Kind::kStateUp, k, 0});
      Batch b = controller(k, x);
      tr.messages.push_back({Message::Kind::kControlBatchDown, k, static_cast<int>(b.controls.size())});
      tr.comms.push_back(b.record);
      for (Vec& u : b.controls) buffer.push_back(std::move(u));
    }
    if (buffer.empty()) throw InvariantViolation("run: plant control buffer exhausted at k = " + std::to_string(k));
    const Vec u = buffer.front();
    buffer.pop_front();
    const Vec& w = disturbances[k];
    x = sys.step(x, u, w);
    tr.flags.push_back(comm ? 1 : 0);
    tr.controls.push_back(u);
    tr.disturbances.push_back(w);
    tr.states.push_back(x);
    tr.errors.push_back(clf.value(x, ref.states[k + 1]));
    if (opts.stop_on_target && sys.target_set().contains(x, 0.0)) {
      tr.stopped_on_target = k + 1 < L;
      break;
    }
  }
  return tr;
}

}  // namespace

int ExecutionTrace::comm_count() const { return std::accumulate(flags.begin(), flags.end(), 0); }

int zeropref(const std::vector<int>& bits) {
  int n = 0;
  while (n < static_cast<int>(bits.size()) && bits[n] == 0) ++n;
  return n;
}

ExecutionTrace run_offline(const SystemModel& sys, const DeltaIssClf& clf, const ReferenceTrajectory& ref,
                           const CommSchedule& schedule, const Vec& x0, const std::vector<Vec>& disturbances,
                           const RunOptions& opts) {
  const int L = ref.horizon();
  const std::vector<int>& c = schedule.bits;
  if (static_cast<int>(c.size()) != L) throw ContractViolation("run_offline: schedule length differs from L");
  if (L > 0 && c[0] != 1) throw ContractViolation("run_offline: schedule must start with a transmission");

  auto controller = [&](int k, const Vec& xk) {
    Batch b;
    b.controls.push_back(clf.feedback(xk, ref.states[k], ref.controls[k]));
    int ell = 0;
    if (k < L - 1 && c[k + 1] == 0) ell = zeropref(std::vector<int>(c.begin() + k + 1, c.end()));
    for (int j = 1; j <= ell; ++j) b.controls.push_back(ref.controls[k + j]);
    b.record.k = k;
    b.record.batch = ell;
    return b;
  };
  auto check_flag = [&](int k, bool comm) {
    if (comm != (c[k] == 1)) {
      throw InvariantViolation("run_offline: batch bookkeeping disagrees with the schedule at k = " +
                               std::to_string(k));
    }
  };
  return execute(sys, clf, ref, x0, disturbances, opts, controller, check_flag);
}

ExecutionTrace run_online(const SystemModel& sys, const DeltaIssClf& clf, const ReferenceTrajectory& ref,
                          const TimedSymbolicSystem& TA, const Vec& x0, const std::vector<Vec>& disturbances,
                          const RunOptions& opts) {
  const int L = ref.horizon();
  if (TA.L != L) throw ContractViolation("run_online: timed system horizon differs from L");
  double planning = 0.0;

  auto controller = [&](int k, const Vec& xk) {
    const int s = sym_of_state(TA.base, clf, xk, ref.states[k]);
    const auto t0 = std::chrono::steady_clock::now();
    ScheduleResult plan;
    try {
      plan = optcom_run(TA, s, k);
    } catch (const InfeasibleError& e) {
      if (k == 0) throw ContractViolation(std::string("run_online: no accepting run from x0: ") + e.what());
      throw InvariantViolation("run_online: re-plan infeasible at k = " + std::to_string(k) + ": " + e.what());
    }
    planning += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Batch b;
    b.controls.push_back(clf.feedback(xk, ref.states[k], ref.controls[k]));
    int ell = 0;
    if (k < L - 1) ell = zeropref(std::vector<int>(plan.schedule.bits.begin() + 1, plan.schedule.bits.end()));
    for (int j = 1; j <= ell; ++j) b.controls.push_back(ref.controls[k + j]);
    b.record.k = k;
    b.record.batch = ell;
    b.record.symbol = s;
    b.record.anchor = TA.base.gamma(s);
    b.record.planned_cost = plan.cost;
    return b;
  };
  ExecutionTrace tr = execute(sys, clf, ref, x0, disturbances, opts, controller, [](int, bool) {});
  tr.online = true;
  tr.planning_seconds = planning;
  return tr;
}

void attach_bounds(ExecutionTrace& trace, const ErrorBoundModel& model, double v_init) {
  trace.bounds.assign(trace.states.size(), 0.0);
  std::size_t next_comm = 0;
  double v = v_init;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    if (trace.online && next_comm < trace.comms.size() && trace.comms[next_comm].k == static_cast<int>(k)) {
      v = trace.comms[next_comm++].anchor;
    }
    trace.bounds[k] = v;
    if (k < trace.flags.size()) v = model.g(v, trace.flags[k], model.w_max());
  }
}

}  // namespace reachsched
