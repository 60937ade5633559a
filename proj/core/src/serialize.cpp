#include "reachsched/serialize.hpp"

#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>
#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

using nlohmann::json;

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json level_json(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  return v;
}

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

}  // namespace

std::string reference_to_json(const ReferenceTrajectory& ref) {
  json j;
  j["margin"] = ref.margin;
  j["seed"] = ref.seed;
  j["L"] = ref.horizon();
  json states = json::array();
  for (const Vec& x : ref.states) states.push_back(vec_json(x));
  json controls = json::array();
  for (const Vec& u : ref.controls) controls.push_back(vec_json(u));
  j["states"] = std::move(states);
  j["controls"] = std::move(controls);
  return j.dump(1) + "\n";
}

ReferenceTrajectory reference_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ReferenceTrajectory ref;
    ref.margin = j.at("margin").get<double>();
    ref.seed = j.at("seed").get<std::uint64_t>();
    for (const json& x : j.at("states")) ref.states.push_back(vec_from(x));
    for (const json& u : j.at("controls")) ref.controls.push_back(vec_from(u));
    if (ref.states.size() != ref.controls.size() + 1) throw ConfigError("reference: states/controls size mismatch");
    return ref;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed reference artifact: ") + e.what());
  }
}

std::string reference_to_csv(const ReferenceTrajectory& ref) {
  auto os = csv_stream();
  const Eigen::Index n = ref.states.front().size();
  const Eigen::Index m = ref.controls.empty() ? 0 : ref.controls.front().size();
  os << "k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i;
  os << "\n";
  for (std::size_t k = 0; k < ref.states.size(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < n; ++i) os << "," << ref.states[k](i);
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ",";
      if (k < ref.controls.size()) os << ref.controls[k](i);
    }
    os << "\n";
  }
  return os.str();
}

std::string envelope_to_csv(const SafetyEnvelope& env) {
  auto os = csv_stream();
  os << "k,v_max\n";
  for (std::size_t k = 0; k < env.v_max.size(); ++k) os << k << "," << env.v_max[k] << "\n";
  return os.str();
}

std::string envelope_to_json(const SafetyEnvelope& env) {
  json j;
  j["L"] = env.horizon();
  j["v_init"] = env.v_init;
  j["v_final"] = env.v_final;
  j["v_max_peak"] = env.max_level();
  return j.dump(1) + "\n";
}

std::string schedule_to_json(const ScheduleResult& res) {
  json j;
  j["origin"] = res.schedule.origin == CommSchedule::Origin::kOffline ? "offline" : "online";
  j["start"] = res.schedule.start;
  j["cost"] = res.cost;
  j["bits"] = res.schedule.bits;
  j["run"] = res.run;
  return j.dump(1) + "\n";
}

ScheduleResult schedule_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ScheduleResult res;
    res.schedule.bits = j.at("bits").get<std::vector<int>>();
    res.schedule.start = j.at("start").get<int>();
    res.schedule.origin =
        j.at("origin").get<std::string>() == "online" ? CommSchedule::Origin::kOnline : CommSchedule::Origin::kOffline;
    res.run = j.at("run").get<std::vector<int>>();
    res.cost = j.at("cost").get<int>();
    return res;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schedule artifact: ") + e.what());
  }
}

std::string timed_system_summary_json(const TimedSymbolicSystem& TA) {
  json j;
  j["L"] = TA.L;
  j["M"] = TA.size();
  j["nu_bar"] = TA.base.partition.nu_bar;
  j["iterations"] = TA.iterations;
  j["edges"] = TA.edge_count();
  j["s_init"] = TA.s_init;
  j["gamma_init"] = level_json(TA.base.gamma(TA.s_init));
  int terminals = 0;
  for (bool t : TA.terminal) terminals += t ? 1 : 0;
  j["terminal_symbols"] = terminals;
  json per_layer = json::array();
  for (const auto& layer : TA.layers) per_layer.push_back(layer.size());
  j["edges_per_layer"] = std::move(per_layer);
  return j.dump(1) + "\n";
}

std::string trace_to_csv(const ExecutionTrace& trace) {
  auto os = csv_stream();
  const Eigen::Index n = trace.states.front().size();
  const Eigen::Index m = trace.controls.empty() ? 0 : trace.controls.front().size();
  os << "k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i;
  os << ",c,v,vbar\n";
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < n; ++i) os << "," << trace.states[k](i);
    const bool has_u = k < trace.controls.size();
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ",";
      if (has_u) os << trace.controls[k](i);
    }
    os << ",";
    if (has_u) os << trace.flags[k];
    os << "," << trace.errors[k] << ",";
    if (k < trace.bounds.size()) os << trace.bounds[k];
    os << "\n";
  }
  return os.str();
}

std::string trace_summary_json(const ExecutionTrace& trace, const ValidityReport& validity) {
  json j;
  j["mode"] = trace.online ? "online" : "offline";
  j["steps"] = trace.steps();
  j["comm_count"] = trace.comm_count();
  j["valid"] = validity.valid();
  j["dynamics_ok"] = validity.dynamics_ok;
  j["safety_ok"] = validity.safety_ok;
  j["reachability_ok"] = validity.reachability_ok;
  j["min_slack"] = validity.min_slack;
  if (validity.first_unsafe) j["first_unsafe"] = *validity.first_unsafe;
  if (validity.first_dynamics_violation) j["first_dynamics_violation"] = *validity.first_dynamics_violation;
  json comms = json::array();
  for (const CommRecord& c : trace.comms) {
    json r{{"k", c.k}, {"batch", c.batch}};
    if (trace.online) {
      r["symbol"] = c.symbol;
      r["planned_cost"] = c.planned_cost;
    }
    comms.push_back(std::move(r));
  }
  j["comms"] = std::move(comms);
  return j.dump(1) + "\n";
}

std::string campaign_to_json(const CampaignStats& stats) {
  json j;
  j["runs"] = stats.runs.size();
  j["valid_runs"] = stats.valid_runs;
  j["validity_rate"] = stats.validity_rate;
  j["comm_mean"] = stats.comm_mean;
  j["comm_min"] = stats.comm_min;
  j["comm_max"] = stats.comm_max;
  j["min_slack"] = stats.min_slack;
  json per_run = json::array();
  for (const RunSummary& r : stats.runs) {
    json e{{"index", r.index}, {"valid", r.valid}, {"comm_count", r.comm_count}, {"min_slack", r.min_slack}};
    if (!r.replans_ok) e["replans_ok"] = false;
    if (!r.error.empty()) e["error"] = r.error;
    per_run.push_back(std::move(e));
  }
  j["per_run"] = std::move(per_run);
  return j.dump(1) + "\n";
}

std::string traverse_to_json(const TraverseResult& res) {
  json j;
  j["steps"] = res.steps;
  j["comm_count"] = res.comm_count;
  j["legs_completed"] = res.legs_completed;
  j["valid"] = res.valid;
  if (!res.error.empty()) j["error"] = res.error;
  return j.dump(1) + "\n";
}

}  // namespace reachsched
