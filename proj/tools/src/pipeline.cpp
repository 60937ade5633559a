#include "pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include "reachsched/config.hpp"
#include "reachsched/error_model.hpp"
#include "reachsched/errors.hpp"
#include "reachsched/serialize.hpp"
#include "reachsched/simulator.hpp"
#include "reachsched/symbolic_abstraction.hpp"

namespace reachsched::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

struct Context {
  ScenarioConfig cfg;
  std::string config_path;
  std::string config_hash;
  fs::path out;
  std::string mode;
  std::uint64_t rrt_seed;
  std::uint64_t run_seed;

  bool traverse() const { return mode == "traverse"; }
  int legs() const { return traverse() ? 2 : 1; }
};

Context load_context(const Options& opt) {
  const std::string text = read_text_file(opt.config);
  ScenarioConfig cfg = parse_config(text);
  std::string mode = opt.mode.value_or(cfg.runtime.mode);
  if (mode != "offline" && mode != "online" && mode != "traverse") {
    throw ConfigError("--mode must be offline, online or traverse");
  }
  fs::path out = !opt.out.empty() ? fs::path(opt.out)
                 : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                           : fs::path("out") / cfg.name;
  const std::uint64_t rrt_seed = opt.seed.value_or(cfg.rrt_seed);
  const std::uint64_t run_seed = opt.seed.value_or(cfg.runtime.seed);
  return Context{std::move(cfg), opt.config, sha256_hex(text), std::move(out), std::move(mode), rrt_seed, run_seed};
}

std::string suffix(int leg) { return leg == 0 ? "" : "_return"; }

SystemModel leg_system(const Context& ctx, int leg) {
  const SystemModel& sys = ctx.cfg.system;
  return leg == 0 ? sys : sys.with_sets(sys.target_set(), sys.initial_set());
}

Vec start_state(const Context& ctx) {
  if (ctx.cfg.runtime.x0) return *ctx.cfg.runtime.x0;
  return chebyshev_center(ctx.cfg.system.initial_set());
}

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f || !(f << content)) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
    outputs_[name] = sha256_hex(content);
  }

  /// Reads an upstream artifact; a missing file is a stage-order error.
  std::string read(const std::string& name, const std::string& producer) {
    const fs::path p = dir_ / name;
    if (!fs::exists(p)) {
      throw StageOrderError("missing " + p.string() + "; run '" + producer + "' first");
    }
    std::string text = read_text_file(p.string());
    inputs_[name] = sha256_hex(text);
    return text;
  }

  const std::map<std::string, std::string>& outputs() const { return outputs_; }
  const std::map<std::string, std::string>& inputs() const { return inputs_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> outputs_;
  std::map<std::string, std::string> inputs_;
};

void write_manifest(const Context& ctx, const Artifacts& art, const std::string& stage, const json& extra,
                    double seconds, int status) {
  const fs::path path = ctx.out / "manifest.json";
  json m = json::object();
  if (fs::exists(path)) {
    try {
      m = json::parse(read_text_file(path.string()));
    } catch (const std::exception&) {
      m = json::object();
    }
  }
  m["scenario"] = ctx.cfg.name;
  json s;
  s["config"] = {{"path", ctx.config_path}, {"sha256", ctx.config_hash}};
  s["inputs"] = art.inputs();
  s["outputs"] = art.outputs();
  s["seeds"] = {{"rrt", ctx.rrt_seed}, {"runtime", ctx.run_seed}};
  s["mode"] = ctx.mode;
  s["seconds"] = seconds;
  s["exit_code"] = status;
  for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
  m["stages"][stage] = std::move(s);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << m.dump(1) << "\n")) throw ConfigError("cannot write '" + path.string() + "'");
}

struct Leg {
  SystemModel sys;
  ReferenceTrajectory ref;
  SafetyEnvelope env;
  ErrorBoundModel model;
};

Leg make_leg(const Context& ctx, const ReferenceTrajectory& ref, int leg, std::optional<double> w_max = {}) {
  SystemModel sys = leg_system(ctx, leg);
  if (w_max) sys = sys.with_w_max(*w_max);
  SafetyEnvelope env = safety_envelope(ctx.cfg.clf, sys, ref);
  ErrorBoundModel model = ErrorBoundModel::from_clf(ctx.cfg.clf, sys, env.max_level());
  return Leg{std::move(sys), ref, std::move(env), std::move(model)};
}

ReferenceTrajectory load_reference(Artifacts& art, int leg) {
  return reference_from_json(art.read("reference" + suffix(leg) + ".json", "plan"));
}

struct Abstraction {
  SymbolicErrorSystem T;
  TimedSymbolicSystem TA;
};

Abstraction abstract_leg(const Context& ctx, const Leg& leg, int M) {
  const Partition part = build_partition(leg.env, M, ctx.cfg.abstraction.nu_bar);
  SymbolicErrorSystem T = build_symbolic_system(leg.model, part);
  TimedSymbolicSystem TA = build_timed_system(T, leg.env, leg.ref, leg.model);
  return Abstraction{std::move(T), std::move(TA)};
}

template <typename F>
int staged(const Options& opt, const std::string& stage, F&& body) {
  const auto t0 = Clock::now();
  Context ctx = load_context(opt);
  Artifacts art(ctx.out);
  json extra = json::object();
  int status = kExitOk;
  try {
    status = body(ctx, art, extra);
  } catch (const InfeasibleError& e) {
    std::cerr << stage << ": infeasible: " << e.what() << "\n";
    extra["infeasible"] = e.what();
    status = kExitInfeasible;
  }
  write_manifest(ctx, art, stage, extra, seconds_since(t0), status);
  return status;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

int cmd_plan(const Options& opt) {
  return staged(opt, "plan", [](Context& ctx, Artifacts& art, json& extra) {
    json legs = json::array();
    for (int i = 0; i < ctx.legs(); ++i) {
      const SystemModel sys = leg_system(ctx, i);
      const auto t0 = Clock::now();
      const ReferenceTrajectory ref = plan_rrt(sys, ctx.cfg.epsilon, ctx.cfg.rrt, ctx.rrt_seed + i);
      const double dt = seconds_since(t0);
      const ValidationReport rep = validate_reference(sys, ref);
      if (!rep.ok()) throw InvariantViolation("planned reference failed validation");
      const SafetyEnvelope env = safety_envelope(ctx.cfg.clf, sys, ref);
      const std::string sfx = suffix(i);
      art.write("reference" + sfx + ".json", reference_to_json(ref));
      art.write("reference" + sfx + ".csv", reference_to_csv(ref));
      art.write("envelope" + sfx + ".json", envelope_to_json(env));
      art.write("envelope" + sfx + ".csv", envelope_to_csv(env));
      std::cout << "plan: leg " << i << " L=" << ref.horizon() << " v_init=" << env.v_init
                << " v_final=" << env.v_final << "\n";
      legs.push_back({{"L", ref.horizon()}, {"rrt_seed", ctx.rrt_seed + i}, {"rrt_seconds", dt}});
    }
    extra["legs"] = std::move(legs);
    return kExitOk;
  });
}

int cmd_abstract(const Options& opt) {
  return staged(opt, "abstract", [](Context& ctx, Artifacts& art, json& extra) {
    int status = kExitOk;
    json legs = json::array();
    for (int i = 0; i < ctx.legs(); ++i) {
      const Leg leg = make_leg(ctx, load_reference(art, i), i);
      const auto t0 = Clock::now();
      const Abstraction a = abstract_leg(ctx, leg, ctx.cfg.abstraction.M);
      const double dt = seconds_since(t0);
      art.write("ta_summary" + suffix(i) + ".json", timed_system_summary_json(a.TA));
      json entry{{"M", a.TA.size()}, {"build_seconds", dt}, {"edges", a.TA.edge_count()}};
      try {
        const ScheduleResult r = min_comm_schedule(a.TA);
        entry["feasible"] = true;
        std::cout << "abstract: leg " << i << " M=" << a.TA.size() << " edges=" << a.TA.edge_count()
                  << " feasible (cost " << r.cost << ")\n";
      } catch (const InfeasibleError& e) {
        entry["feasible"] = false;
        std::cerr << "abstract: leg " << i << " infeasible: " << e.what() << "\n";
        status = kExitInfeasible;
      }
      legs.push_back(std::move(entry));
    }
    extra["legs"] = std::move(legs);
    return status;
  });
}

int cmd_schedule(const Options& opt) {
  return staged(opt, "schedule", [](Context& ctx, Artifacts& art, json& extra) {
    json legs = json::array();
    for (int i = 0; i < ctx.legs(); ++i) {
      const Leg leg = make_leg(ctx, load_reference(art, i), i);
      const auto t0 = Clock::now();
      const Abstraction a = abstract_leg(ctx, leg, ctx.cfg.abstraction.M);
      const ScheduleResult r = min_comm_schedule(a.TA);
      const double dt = seconds_since(t0);
      art.write("schedule" + suffix(i) + ".json", schedule_to_json(r));
      std::cout << "schedule: leg " << i << " cost=" << r.cost << " of L=" << a.TA.L << "\n";
      legs.push_back({{"cost", r.cost}, {"seconds", dt}});
    }
    extra["legs"] = std::move(legs);
    return kExitOk;
  });
}

namespace {

ScheduleResult load_schedule(Artifacts& art, int leg, const ReferenceTrajectory& ref) {
  ScheduleResult s = schedule_from_json(art.read("schedule" + suffix(leg) + ".json", "schedule"));
  if (static_cast<int>(s.schedule.bits.size()) != ref.horizon()) {
    throw StageOrderError("schedule" + suffix(leg) + ".json does not match the planned reference; re-run 'schedule'");
  }
  return s;
}

std::string traverse_to_csv(const TraverseResult& res) {
  std::ostringstream os;
  os << std::setprecision(17);
  const Eigen::Index n = res.states.empty() ? 0 : res.states.front().size();
  os << "k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i;
  os << ",c\n";
  for (std::size_t k = 0; k < res.states.size(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < n; ++i) os << "," << res.states[k](i);
    os << ",";
    if (k < res.flags.size()) os << res.flags[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace

int cmd_simulate(const Options& opt) {
  return staged(opt, "simulate", [](Context& ctx, Artifacts& art, json& extra) {
    const RuntimeConfig& rt = ctx.cfg.runtime;
    if (ctx.traverse()) {
      std::vector<Leg> legs;
      std::vector<Abstraction> abs;
      std::vector<ScheduleResult> schedules;
      for (int i = 0; i < 2; ++i) legs.push_back(make_leg(ctx, load_reference(art, i), i));
      for (int i = 0; i < 2; ++i) {
        if (rt.leg_mode == RuntimeMode::kOffline) {
          schedules.push_back(load_schedule(art, i, legs[i].ref));
        } else {
          abs.push_back(abstract_leg(ctx, legs[i], ctx.cfg.abstraction.M));
        }
      }
      std::vector<TraverseLeg> tl(2);
      for (int i = 0; i < 2; ++i) {
        Scenario& sc = tl[i].scenario;
        sc.sys = &legs[i].sys;
        sc.clf = &ctx.cfg.clf;
        sc.ref = &legs[i].ref;
        if (rt.leg_mode == RuntimeMode::kOffline) {
          sc.schedule = &schedules[i].schedule;
        } else {
          sc.TA = &abs[i].TA;
        }
      }
      const SystemModel& sys = ctx.cfg.system;
      const DisturbanceModel dm(rt.disturbance, sys.disturbance_dim(), sys.w_max());
      const TraverseResult res = traverse(tl[0], tl[1], rt.leg_mode, start_state(ctx), dm, ctx.run_seed, rt.budget);
      art.write("traverse.json", traverse_to_json(res));
      art.write("traverse.csv", traverse_to_csv(res));
      std::cout << "simulate: traverse steps=" << res.steps << " comms=" << res.comm_count
                << " legs=" << res.legs_completed << " valid=" << (res.valid ? "yes" : "no") << "\n";
      extra["comm_count"] = res.comm_count;
      return kExitOk;
    }

    const RuntimeMode mode = ctx.mode == "online" ? RuntimeMode::kOnline : RuntimeMode::kOffline;
    const Leg leg = make_leg(ctx, load_reference(art, 0), 0);
    std::optional<ScheduleResult> schedule;
    std::optional<Abstraction> abs;
    Scenario sc;
    sc.sys = &leg.sys;
    sc.clf = &ctx.cfg.clf;
    sc.ref = &leg.ref;
    if (mode == RuntimeMode::kOffline) {
      schedule = load_schedule(art, 0, leg.ref);
      sc.schedule = &schedule->schedule;
    } else {
      abs = abstract_leg(ctx, leg, ctx.cfg.abstraction.M);
      sc.TA = &abs->TA;
    }
    std::vector<ExecutionTrace> traces;
    const CampaignStats stats = monte_carlo(sc, mode, rt.runs, rt.disturbance, ctx.run_seed, &traces);
    art.write("campaign_" + ctx.mode + ".json", campaign_to_json(stats));
    if (!traces.empty() && !traces.front().states.empty()) {
      ExecutionTrace& t = traces.front();
      attach_bounds(t, leg.model, leg.env.v_init);
      art.write("trace_" + ctx.mode + "_0.csv", trace_to_csv(t));
      art.write("trace_" + ctx.mode + "_0.json", trace_summary_json(t, check_validity(leg.sys, t)));
    }
    std::cout << "simulate: " << ctx.mode << " valid " << stats.valid_runs << "/" << stats.runs.size()
              << " comm mean " << stats.comm_mean << " [" << stats.comm_min << ", " << stats.comm_max << "]\n";
    extra["valid_runs"] = stats.valid_runs;
    return kExitOk;
  });
}

namespace {

struct SweepRow {
  int M = 0;
  bool feasible = false;
  std::vector<int> costs;
  std::optional<int> comm_count;
  bool valid = true;
  std::string reason;
  double seconds = 0.0;
};

SweepRow sweep_one(const Context& ctx, const std::vector<Leg>& legs, int M) {
  SweepRow row;
  row.M = M;
  const auto t0 = Clock::now();
  try {
    std::vector<Abstraction> abs;
    std::vector<ScheduleResult> sched;
    for (const Leg& leg : legs) {
      abs.push_back(abstract_leg(ctx, leg, M));
      sched.push_back(min_comm_schedule(abs.back().TA));
      row.costs.push_back(sched.back().cost);
    }
    row.seconds = seconds_since(t0);
    row.feasible = true;
    if (ctx.traverse()) {
      std::vector<TraverseLeg> tl(2);
      for (int i = 0; i < 2; ++i) {
        tl[i].scenario = Scenario{&legs[i].sys, &ctx.cfg.clf, &legs[i].ref, &abs[i].TA, &sched[i].schedule};
      }
      const RuntimeConfig& rt = ctx.cfg.runtime;
      const SystemModel& sys = ctx.cfg.system;
      const DisturbanceModel dm(rt.disturbance, sys.disturbance_dim(), sys.w_max());
      const TraverseResult res = traverse(tl[0], tl[1], rt.leg_mode, start_state(ctx), dm, ctx.run_seed, rt.budget);
      row.comm_count = res.comm_count;
      row.valid = res.valid;
      if (!res.error.empty()) row.reason = res.error;
    } else {
      row.comm_count = row.costs.front();
    }
  } catch (const InfeasibleError& e) {
    row.seconds = seconds_since(t0);
    row.feasible = false;
    row.reason = e.what();
  }
  return row;
}

bool feasible_at(const Context& ctx, const ReferenceTrajectory& ref, double w, bool online, const Vec& x0) {
  const Leg leg = make_leg(ctx, ref, 0, w);
  try {
    const Abstraction a = abstract_leg(ctx, leg, ctx.cfg.abstraction.M);
    if (online) {
      optcom_run(a.TA, sym_of_state(a.T, ctx.cfg.clf, x0, ref.states.front()), 0);
    } else {
      min_comm_schedule(a.TA);
    }
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

double frontier(const Context& ctx, const ReferenceTrajectory& ref, bool online, const Vec& x0, double tol) {
  double lo = 0.0;
  double hi = std::max(ctx.cfg.system.w_max(), tol);
  while (feasible_at(ctx, ref, hi, online, x0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) return lo;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(ctx, ref, mid, online, x0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

int cmd_sweep(const Options& opt) {
  return staged(opt, "sweep", [&opt](Context& ctx, Artifacts& art, json& extra) {
    std::vector<Leg> legs;
    for (int i = 0; i < ctx.legs(); ++i) legs.push_back(make_leg(ctx, load_reference(art, i), i));

    const bool do_m = !opt.m_list.empty() || !opt.bisect_wmax;
    if (do_m) {
      const std::vector<int> ms = opt.m_list.empty() ? std::vector<int>{ctx.cfg.abstraction.M} : opt.m_list;
      for (int M : ms) {
        if (M < 2) throw ConfigError("--m-list entries must be at least 2");
      }
      std::vector<SweepRow> rows(ms.size());
      std::atomic<std::size_t> next{0};
      std::mutex err_mu;
      std::exception_ptr err;
      const int workers = std::max(1, std::min<int>(worker_threads(), static_cast<int>(ms.size())));
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < ms.size(); i = next++) {
            try {
              rows[i] = sweep_one(ctx, legs, ms[i]);
            } catch (...) {
              std::lock_guard<std::mutex> lock(err_mu);
              if (!err) err = std::current_exception();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (err) std::rethrow_exception(err);

      json table = json::array();
      json timings = json::object();
      std::ostringstream csv;
      csv << "M,feasible,comm_count,valid\n";
      for (const SweepRow& r : rows) {
        json e{{"M", r.M}, {"feasible", r.feasible}, {"schedule_costs", r.costs}};
        e["comm_count"] = r.comm_count ? json(*r.comm_count) : json(nullptr);
        if (r.feasible) e["valid"] = r.valid;
        if (!r.reason.empty()) e["reason"] = r.reason;
        table.push_back(std::move(e));
        timings[std::to_string(r.M)] = r.seconds;
        csv << r.M << "," << (r.feasible ? 1 : 0) << ",";
        if (r.comm_count) csv << *r.comm_count;
        csv << "," << (r.feasible ? (r.valid ? 1 : 0) : 0) << "\n";
        std::cout << "sweep: M=" << r.M << " ";
        if (r.feasible) {
          std::cout << "comms=" << *r.comm_count << (r.valid ? "" : " (invalid run)");
        } else {
          std::cout << "---";
        }
        std::cout << " build " << std::setprecision(3) << r.seconds << " s\n";
      }
      json doc{{"mode", ctx.mode}, {"rows", std::move(table)}};
      if (ctx.traverse()) doc["budget"] = ctx.cfg.runtime.budget;
      art.write("sweep.json", doc.dump(1) + "\n");
      art.write("sweep.csv", csv.str());
      extra["build_seconds"] = std::move(timings);
    }

    if (opt.bisect_wmax) {
      constexpr double kTol = 0.005;
      const Vec x0 = start_state(ctx);
      const double off = frontier(ctx, legs.front().ref, false, x0, kTol);
      const double on = frontier(ctx, legs.front().ref, true, x0, kTol);
      json doc{{"tolerance", kTol}, {"offline", off}, {"online", on}, {"x0", vec_json(x0)}};
      art.write("wmax_frontier.json", doc.dump(1) + "\n");
      std::cout << "sweep: w_max frontier offline=" << off << " online=" << on << "\n";
    }
    return kExitOk;
  });
}

int cmd_verify_clf(const Options& opt) {
  return staged(opt, "verify-clf", [&opt](Context& ctx, Artifacts& art, json& extra) {
    GridOptions go;
    go.density = opt.grid_density;
    const VerificationReport rep = verify_clf_on_grid(ctx.cfg.clf, ctx.cfg.system, go);
    auto check_json = [](const InequalityCheck& c) {
      json j{{"evaluated", c.evaluated}, {"violations", c.violations}};
      j["worst_slack"] = std::isfinite(c.worst_slack) ? json(c.worst_slack) : json(nullptr);
      if (c.first_violation) {
        const ViolatingTuple& v = *c.first_violation;
        j["first_violation"] = {{"x", vec_json(v.x)},   {"y", vec_json(v.y)},   {"u", vec_json(v.u)},
                                {"w1", vec_json(v.w1)}, {"w2", vec_json(v.w2)}, {"slack", v.slack}};
      }
      return j;
    };
    json doc{{"grid_density", go.density},
             {"grid_points", rep.grid_points},
             {"pairs", rep.pairs},
             {"ok", rep.ok()},
             {"sandwich", check_json(rep.sandwich)},
             {"decrease", check_json(rep.decrease)},
             {"input", check_json(rep.input)}};
    art.write("clf_report.json", doc.dump(1) + "\n");
    std::cout << "verify-clf: " << rep.grid_points << " grid points, " << rep.pairs << " pairs; violations sandwich "
              << rep.sandwich.violations << ", decrease " << rep.decrease.violations << ", input "
              << rep.input.violations << "\n";
    extra["ok"] = rep.ok();
    return rep.ok() ? kExitOk : kExitCertificate;
  });
}

}  // namespace reachsched::cli
