#include "reachsched/symbolic_abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

}  // namespace

int Partition::lowest_dominating(double v) const {
  if (std::isnan(v)) throw ContractViolation("lowest_dominating: NaN level");
  const auto it = std::lower_bound(levels.begin(), levels.end(), v);
  return static_cast<int>(it - levels.begin());
}

Partition build_partition(double nu_bar, int M) {
  if (M < 2) throw ContractViolation("build_partition: M must be at least 2");
  if (!(nu_bar > 0.0) || !std::isfinite(nu_bar)) throw ContractViolation("build_partition: nu_bar must be positive");
  Partition p;
  p.M = M;
  p.nu_bar = nu_bar;
  p.levels.resize(static_cast<std::size_t>(M));
  for (int m = 1; m < M - 1; ++m) p.levels[m - 1] = nu_bar * m / (M - 1);
  p.levels[M - 2] = nu_bar;
  p.levels[M - 1] = std::numeric_limits<double>::infinity();
  return p;
}

Partition build_partition(const SafetyEnvelope& env, int M, std::optional<double> nu_bar_override) {
  return build_partition(nu_bar_override ? *nu_bar_override : env.max_level(), M);
}

SymbolicErrorSystem build_symbolic_system(const ErrorBoundModel& model, const Partition& part) {
  SymbolicErrorSystem T;
  T.partition = part;
  T.next.resize(static_cast<std::size_t>(part.M));
  for (int s = 0; s < part.M; ++s) {
    for (int c = 0; c < 2; ++c) {
      T.next[s][c] = part.lowest_dominating(model.g(part.gamma(s), c, model.w_max()));
    }
  }
  return T;
}

int TimedSymbolicSystem::successor(int s, int k, int c) const {
  if (k < 0 || k >= L || s < 0 || s >= size()) return -1;
  return table[k][2 * s + c];
}

std::size_t TimedSymbolicSystem::edge_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

TimedSymbolicSystem build_timed_system(const SymbolicErrorSystem& T, const SafetyEnvelope& env,
                                       const ReferenceTrajectory& ref, const ErrorBoundModel& model) {
  const int L = env.horizon();
  if (ref.horizon() != L) throw ContractViolation("build_timed_system: envelope and reference horizons differ");
  const int M = T.size();
  if (env.v_init > T.partition.nu_bar) {
    throw InfeasibleError("build_timed_system: initial error bound " + std::to_string(env.v_init) +
                          " exceeds the partition range nu_bar = " + std::to_string(T.partition.nu_bar) +
                          "; raise nu_bar");
  }

  TimedSymbolicSystem TA;
  TA.L = L;
  TA.base = T;
  TA.layers.resize(static_cast<std::size_t>(L));
  TA.table.assign(static_cast<std::size_t>(L), std::vector<int>(static_cast<std::size_t>(2 * M), -1));
  for (int k = 0; k < L; ++k) {
    const double u_ref = ref.controls[k].norm();
    for (int s = 0; s < M; ++s) {
      for (int c = 0; c < 2; ++c) {
        ++TA.iterations;
        const int j = T.next[s][c];
        if (!(T.gamma(s) <= env.v_max[k])) continue;
        if (!(T.gamma(j) <= env.v_max[k + 1])) continue;
        if (c == 1 && !(model.input_demand(T.gamma(s), u_ref) <= model.u_max())) continue;
        TA.layers[k].push_back({s, c, j});
        TA.table[k][2 * s + c] = j;
      }
    }
  }
  TA.s_init = T.partition.lowest_dominating(env.v_init);
  TA.terminal.resize(static_cast<std::size_t>(M));
  for (int s = 0; s < M; ++s) TA.terminal[s] = T.gamma(s) <= env.v_final;
  return TA;
}

int CommSchedule::cost() const { return std::accumulate(bits.begin(), bits.end(), 0); }

ScheduleResult optcom_run(const TimedSymbolicSystem& TA, int s0, int k0) {
  const int L = TA.L;
  const int M = TA.size();
  if (k0 < 0 || k0 >= L) throw ContractViolation("optcom: time index outside [0, L-1]");
  if (s0 < 0 || s0 >= M) throw ContractViolation("optcom: symbol out of range");

  // Forward pass: cheapest cost to reach each (s, k).
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(L + 1), std::vector<int>(M, kUnreached));
  dist[k0][s0] = 0;
  for (int k = k0; k < L; ++k) {
    bool any = false;
    for (const TimedEdge& e : TA.layers[k]) {
      if (k == k0 && e.bit == 0) continue;
      if (dist[k][e.from] == kUnreached) continue;
      const int cand = dist[k][e.from] + e.bit;
      if (cand < dist[k + 1][e.to]) dist[k + 1][e.to] = cand;
      any = true;
    }
    if (!any) throw InfeasibleError("no accepting run: layer " + std::to_string(k + 1) + " unreachable", k + 1);
  }
  int target = -1;
  for (int s = 0; s < M; ++s) {
    if (!TA.terminal[s] || dist[L][s] == kUnreached) continue;
    if (target < 0 || dist[L][s] < dist[L][target]) target = s;
  }
  if (target < 0) throw InfeasibleError("no accepting run: no terminal symbol reachable at the horizon", L);

  // Backward cost-to-go to the chosen terminal.
  std::vector<std::vector<int>> ctg(static_cast<std::size_t>(L + 1), std::vector<int>(M, kUnreached));
  ctg[L][target] = 0;
  for (int k = L - 1; k >= k0; --k) {
    for (const TimedEdge& e : TA.layers[k]) {
      if (k == k0 && e.bit == 0) continue;
      if (ctg[k + 1][e.to] == kUnreached) continue;
      ctg[k][e.from] = std::min(ctg[k][e.from], e.bit + ctg[k + 1][e.to]);
    }
  }

  // Greedy forward reconstruction, silent steps first.
  ScheduleResult res;
  res.schedule.start = k0;
  res.schedule.origin = k0 == 0 ? CommSchedule::Origin::kOffline : CommSchedule::Origin::kOnline;
  res.run.push_back(s0);
  int s = s0;
  for (int k = k0; k < L; ++k) {
    int chosen = -1;
    for (int c = (k == k0 ? 1 : 0); c < 2 && chosen < 0; ++c) {
      const int j = TA.table[k][2 * s + c];
      if (j >= 0 && ctg[k + 1][j] != kUnreached && c + ctg[k + 1][j] == ctg[k][s]) {
        chosen = c;
        res.schedule.bits.push_back(c);
        s = j;
      }
    }
    if (chosen < 0) throw InvariantViolation("optcom: reconstruction lost the optimal path");
    res.run.push_back(s);
  }
  res.cost = res.schedule.cost();
  return res;
}

ScheduleResult min_comm_schedule(const TimedSymbolicSystem& TA) { return optcom_run(TA, TA.s_init, 0); }

std::vector<int> optcom(const TimedSymbolicSystem& TA, int s, int k) { return optcom_run(TA, s, k).schedule.bits; }

int sym_of_state(const SymbolicErrorSystem& T, const DeltaIssClf& clf, const Vec& x, const Vec& x_hat) {
  return T.partition.lowest_dominating(clf.value(x, x_hat));
}

bool accepts(const TimedSymbolicSystem& TA, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != TA.L) return false;
  int s = TA.s_init;
  for (int k = 0; k < TA.L; ++k) {
    if (bits[k] != 0 && bits[k] != 1) return false;
    s = TA.table[k][2 * s + bits[k]];
    if (s < 0) return false;
  }
  return TA.terminal[s];
}

namespace {

struct NaiveSearch {
  const ErrorBoundModel& model;
  const SafetyEnvelope& env;
  const ReferenceTrajectory& ref;
  int L;
  std::uint64_t nodes = 0;
  std::vector<int> bits;
  std::optional<std::vector<int>> best;
  int best_cost = kUnreached;

  void visit(int k, double v, int cost) {
    ++nodes;
    if (k >= 1 && !(v <= env.v_max[k])) return;
    if (k == L) {
      if (v <= env.v_final && cost < best_cost) {
        best_cost = cost;
        best = bits;
      }
      return;
    }
    for (int c = (k == 0 ? 1 : 0); c < 2; ++c) {
      if (c == 1 && !(model.input_demand(v, ref.controls[k].norm()) <= model.u_max())) continue;
      bits.push_back(c);
      visit(k + 1, model.g(v, c, model.w_max()), cost + c);
      bits.pop_back();
    }
  }
};

}  // namespace

NaiveResult naive_tree_schedule(const ErrorBoundModel& model, const SafetyEnvelope& env,
                                const ReferenceTrajectory& ref, int L_cap) {
  const int L = env.horizon();
  if (ref.horizon() != L) throw ContractViolation("naive_tree_schedule: horizon mismatch");
  if (L > L_cap) {
    throw ContractViolation("naive_tree_schedule: horizon " + std::to_string(L) + " exceeds the cap " +
                            std::to_string(L_cap));
  }
  NaiveSearch search{model, env, ref, L, 0, {}, std::nullopt, kUnreached};
  if (L == 0) {
    search.nodes = 1;
    NaiveResult res;
    res.nodes = 1;
    if (env.v_init <= env.v_final) res.schedule = CommSchedule{};
    return res;
  }
  search.visit(0, env.v_init, 0);
  NaiveResult res;
  res.nodes = search.nodes;
  if (search.best) res.schedule = CommSchedule{*search.best, CommSchedule::Origin::kOffline, 0};
  return res;
}

}  // namespace reachsched
