#include "reachsched/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "reachsched/errors.hpp"

namespace reachsched {

DisturbanceKind parse_disturbance_kind(const std::string& name) {
  if (name == "zero") return DisturbanceKind::kZero;
  if (name == "worst-case") return DisturbanceKind::kWorstCase;
  if (name == "uniform-ball") return DisturbanceKind::kUniformBall;
  throw ConfigError("unknown disturbance kind '" + name + "'");
}

std::string to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::kZero:
      return "zero";
    case DisturbanceKind::kWorstCase:
      return "worst-case";
    case DisturbanceKind::kUniformBall:
      return "uniform-ball";
  }
  return "zero";
}

DisturbanceModel::DisturbanceModel(DisturbanceKind kind, int dim, double w_max)
    : kind_(kind), dim_(dim), w_max_(w_max) {
  if (dim_ < 1) throw ContractViolation("DisturbanceModel: dimension must be positive");
  if (!(w_max_ >= 0.0)) throw ContractViolation("DisturbanceModel: w_max must be nonnegative");
}

Vec DisturbanceModel::sample(std::mt19937_64& rng) const {
  if (kind_ == DisturbanceKind::kZero || w_max_ == 0.0) return Vec::Zero(dim_);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec d(dim_);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim_; ++i) d(i) = gauss(rng);
    norm = d.norm();
  } while (norm == 0.0);
  d /= norm;
  if (kind_ == DisturbanceKind::kWorstCase) return d * w_max_;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return d * (w_max_ * std::pow(unif(rng), 1.0 / dim_));
}

std::vector<Vec> DisturbanceModel::sample_sequence(std::mt19937_64& rng, int count) const {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(std::max(0, count)));
  for (int i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

Vec sample_disturbance(const DisturbanceModel& dm, std::mt19937_64& rng) { return dm.sample(rng); }

ValidityReport check_validity(const SystemModel& sys, const ExecutionTrace& trace) {
  ValidityReport rep;
  const int T = trace.steps();
  rep.comm_count = trace.comm_count();
  rep.min_slack = std::numeric_limits<double>::infinity();
  if (static_cast<int>(trace.states.size()) != T + 1 || static_cast<int>(trace.disturbances.size()) != T) {
    rep.dynamics_ok = false;
    rep.first_dynamics_violation = 0;
  }
  for (int k = 0; k < T && rep.dynamics_ok; ++k) {
    const Vec next = sys.step(trace.states[k], trace.controls[k], trace.disturbances[k]);
    const bool consistent = (next - trace.states[k + 1]).norm() <= 1e-9 * (1.0 + next.norm());
    const bool admissible = trace.controls[k].norm() <= sys.u_max() * (1.0 + 1e-12) &&
                            trace.disturbances[k].norm() <= sys.w_max() * (1.0 + 1e-12);
    if (!consistent || !admissible) {
      rep.dynamics_ok = false;
      rep.first_dynamics_violation = k;
    }
  }
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const double sd = signed_distance(sys.free_space(), trace.states[k]);
    rep.min_slack = std::min(rep.min_slack, sd);
    if (rep.safety_ok && !(sd > 0.0)) {
      rep.safety_ok = false;
      rep.first_unsafe = static_cast<int>(k);
    }
  }
  rep.reachability_ok = !trace.states.empty() && sys.target_set().contains(trace.states.back(), 0.0);
  return rep;
}

Vec sample_in_polytope(const HPolytope& p, std::mt19937_64& rng) {
  const auto [lo, hi] = p.bounding_box();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
    if (p.contains(x, 1e-9)) return x;
  }
  throw InfeasibleError("sample_in_polytope: rejection sampling failed");
}

std::uint64_t run_seed(std::uint64_t campaign_seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = campaign_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunRealization realize(const SystemModel& sys, const DisturbanceModel& dm, std::uint64_t seed, int steps) {
  std::mt19937_64 rng(seed);
  RunRealization r;
  r.x0 = sample_in_polytope(sys.initial_set(), rng);
  r.disturbances = dm.sample_sequence(rng, steps);
  return r;
}

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("REACHSCHED_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

namespace {

ExecutionTrace run_mode(const Scenario& sc, RuntimeMode mode, const Vec& x0, const std::vector<Vec>& w,
                        const RunOptions& opts) {
  if (mode == RuntimeMode::kOffline) {
    if (!sc.schedule) throw ContractViolation("offline run without a schedule");
    return run_offline(*sc.sys, *sc.clf, *sc.ref, *sc.schedule, x0, w, opts);
  }
  if (!sc.TA) throw ContractViolation("online run without a timed system");
  return run_online(*sc.sys, *sc.clf, *sc.ref, *sc.TA, x0, w, opts);
}

}  // namespace

CampaignStats monte_carlo(const Scenario& sc, RuntimeMode mode, int N, DisturbanceKind kind, std::uint64_t seed,
                          std::vector<ExecutionTrace>* traces) {
  if (N < 1) throw ContractViolation("monte_carlo: N must be at least 1");
  if (!sc.sys || !sc.clf || !sc.ref) throw ContractViolation("monte_carlo: incomplete scenario");
  if (mode == RuntimeMode::kOffline && !sc.schedule) throw ContractViolation("monte_carlo: offline mode needs a schedule");
  if (mode == RuntimeMode::kOnline && !sc.TA) throw ContractViolation("monte_carlo: online mode needs a timed system");
  const DisturbanceModel dm(kind, sc.sys->disturbance_dim(), sc.sys->w_max());
  const int L = sc.ref->horizon();
  CampaignStats stats;
  stats.runs.resize(static_cast<std::size_t>(N));
  if (traces) traces->assign(static_cast<std::size_t>(N), ExecutionTrace{});

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < N; i = next++) {
      RunSummary& rs = stats.runs[i];
      rs.index = i;
      try {
        const RunRealization real = realize(*sc.sys, dm, run_seed(seed, static_cast<std::uint64_t>(i)), L);
        ExecutionTrace tr = run_mode(sc, mode, real.x0, real.disturbances, {});
        const ValidityReport v = check_validity(*sc.sys, tr);
        rs.valid = v.valid();
        rs.comm_count = v.comm_count;
        rs.min_slack = v.min_slack;
        if (traces) (*traces)[i] = std::move(tr);
      } catch (const InvariantViolation& e) {
        rs.replans_ok = false;
        rs.error = e.what();
      } catch (const std::exception& e) {
        rs.error = e.what();
      }
    }
  };
  const int threads = std::min(worker_threads(), N);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  stats.comm_min = std::numeric_limits<int>::max();
  stats.comm_max = 0;
  stats.min_slack = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const RunSummary& rs : stats.runs) {
    if (rs.valid) ++stats.valid_runs;
    total += rs.comm_count;
    stats.comm_min = std::min(stats.comm_min, rs.comm_count);
    stats.comm_max = std::max(stats.comm_max, rs.comm_count);
    stats.min_slack = std::min(stats.min_slack, rs.min_slack);
  }
  stats.validity_rate = static_cast<double>(stats.valid_runs) / N;
  stats.comm_mean = total / N;
  return stats;
}

TraverseResult traverse(const TraverseLeg& first, const TraverseLeg& second, RuntimeMode mode, const Vec& x0,
                        const DisturbanceModel& dm, std::uint64_t seed, int budget) {
  if (budget < 1) throw ContractViolation("traverse: budget must be positive");
  std::mt19937_64 rng(seed);
  const std::vector<Vec> w = dm.sample_sequence(rng, budget + std::max(first.scenario.ref->horizon(),
                                                                       second.scenario.ref->horizon()));
  TraverseResult res;
  res.states.push_back(x0);
  Vec x = x0;
  int k = 0;
  int leg = 0;
  RunOptions opts;
  opts.stop_on_target = true;
  while (k < budget) {
    const Scenario& sc = (leg % 2 == 0 ? first : second).scenario;
    const std::vector<Vec> slice(w.begin() + k, w.begin() + k + sc.ref->horizon());
    ExecutionTrace tr;
    try {
      tr = run_mode(sc, mode, x, slice, opts);
    } catch (const std::exception& e) {
      res.valid = false;
      res.error = e.what();
      break;
    }
    ValidityReport v = check_validity(*sc.sys, tr);
    const int take = std::min(tr.steps(), budget - k);
    for (int j = 0; j < take; ++j) {
      res.flags.push_back(tr.flags[j]);
      res.comm_count += tr.flags[j];
      res.states.push_back(tr.states[j + 1]);
    }
    if (!v.dynamics_ok || (v.first_unsafe && *v.first_unsafe <= take)) {
      res.valid = false;
      res.error = "leg " + std::to_string(leg) + " left the free space or broke the dynamics";
      break;
    }
    if (take < tr.steps()) {
      k += take;
      break;
    }
    if (!v.reachability_ok) {
      res.valid = false;
      res.error = "leg " + std::to_string(leg) + " ended outside its target";
      break;
    }
    k += tr.steps();
    ++res.legs_completed;
    x = tr.states.back();
    ++leg;
  }
  res.steps = std::min(k, budget);
  return res;
}

}  // namespace reachsched
