#include "reachsched/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

using nlohmann::json;

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

double num_or(const json& j, const char* key, double fallback) { return j.contains(key) ? num(j, key) : fallback; }

Vec vec(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat mat(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty matrix");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  if (j[0].is_array()) {
    cols = j[0].size();
  } else {
    // single row given as a flat array
    const Vec r = vec(j);
    return r.transpose();
  }
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Vec row = vec(j[r]);
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError("ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

geometry::Polygon polygon(const json& j) {
  if (!j.is_array()) throw ConfigError("polygon must be an array of [x, y] pairs");
  geometry::Polygon p;
  for (const json& pt : j) {
    const Vec v = vec(pt);
    if (v.size() != 2) throw ConfigError("polygon vertices must have two coordinates");
    p.emplace_back(v(0), v(1));
  }
  return p;
}

HPolytope polytope(const json& j) {
  if (j.contains("box")) {
    const json& b = j.at("box");
    return HPolytope::box(vec(need(b, "lo")), vec(need(b, "hi")));
  }
  return HPolytope(mat(need(j, "A")), vec(need(j, "b")));
}

FreeSpaceRegion free_space(const json& j, int dim) {
  std::vector<geometry::Polygon> obstacles;
  if (j.contains("obstacles")) {
    for (const json& o : j.at("obstacles")) obstacles.push_back(polygon(o));
  }
  std::vector<BoxBound> box;
  if (j.contains("box")) {
    for (const json& b : j.at("box")) {
      box.push_back({need(b, "coord").get<int>(), num(b, "lo"), num(b, "hi")});
    }
  }
  std::vector<HalfSpace> halfspaces;
  if (j.contains("halfspaces")) {
    for (const json& h : j.at("halfspaces")) halfspaces.push_back({vec(need(h, "a")), num(h, "b")});
  }
  std::array<int, 2> plane{0, 1};
  if (j.contains("plane")) {
    const json& p = j.at("plane");
    if (!p.is_array() || p.size() != 2) throw ConfigError("plane must list two coordinates");
    plane = {p[0].get<int>(), p[1].get<int>()};
  }
  return FreeSpaceRegion(dim, polygon(need(j, "outer")), std::move(obstacles), std::move(box), std::move(halfspaces),
                         plane);
}

SystemModel system_from(const json& j) {
  const json& dyn = need(j, "dynamics");
  const std::string kind = need(dyn, "kind").get<std::string>();
  Dynamics dynamics;
  int n = 0;
  double lx_auto = 0.0;
  if (kind == "linear-zoh") {
    const DiscreteLinear d = discretize_zoh(mat(need(dyn, "A_c")), mat(need(dyn, "B_c")), num(dyn, "dt"));
    dynamics = LinearDynamics{d.A, d.B};
    n = static_cast<int>(d.A.rows());
    lx_auto = Eigen::JacobiSVD<Mat>(d.A).singularValues()(0);
  } else if (kind == "linear") {
    const Mat A = mat(need(dyn, "A"));
    dynamics = LinearDynamics{A, mat(need(dyn, "B"))};
    n = static_cast<int>(A.rows());
    lx_auto = Eigen::JacobiSVD<Mat>(A).singularValues()(0);
  } else if (kind == "pendulum") {
    dynamics = PendulumDynamics{num_or(dyn, "a", 0.6), num_or(dyn, "b", 3.0), num_or(dyn, "dt", 0.2)};
    n = 2;
  } else {
    throw ConfigError("unknown dynamics kind '" + kind + "'");
  }
  double lx = 0.0;
  double lw = 0.0;
  if (j.contains("L_x") && j.at("L_x").is_string() && j.at("L_x").get<std::string>() == "auto") {
    if (lx_auto == 0.0) throw ConfigError("L_x = auto is only available for linear dynamics");
    lx = lx_auto;
  } else {
    lx = num(j, "L_x");
  }
  if (j.contains("L_w") && j.at("L_w").is_string() && j.at("L_w").get<std::string>() == "auto") {
    if (lx_auto == 0.0) throw ConfigError("L_w = auto is only available for linear dynamics");
    lw = 1.0;
  } else {
    lw = num(j, "L_w");
  }
  return SystemModel(std::move(dynamics), lx, lw, NormBall{num(j, "u_max")}, NormBall{num(j, "w_max")},
                     free_space(need(j, "free_space"), n), polytope(need(j, "initial_set")),
                     polytope(need(j, "target_set")));
}

DeltaIssClf clf_from(const json& j, const SystemModel& sys) {
  const std::string family = need(j, "family").get<std::string>();
  if (family == "linear-gain") {
    std::optional<Mat> W;
    if (j.contains("W")) W = mat(j.at("W"));
    return DeltaIssClf::linear_gain(sys, mat(need(j, "K")), W);
  }
  if (family == "quadratic") {
    const json& rho = need(j, "rho");
    return DeltaIssClf::quadratic(mat(need(j, "P")), mat(need(j, "Q")), mat(need(j, "k_u")), num_or(rho, "lin", 0.0),
                                  num_or(rho, "quad", 0.0));
  }
  throw ConfigError("unknown CLF family '" + family + "'");
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename F>
auto wrap(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  } catch (const InfeasibleError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemModel parse_system(const std::string& json_text) {
  const json j = parse_json(json_text);
  return wrap([&] { return system_from(j); });
}

DeltaIssClf parse_clf(const std::string& json_text, const SystemModel& sys) {
  const json j = parse_json(json_text);
  return wrap([&] { return clf_from(j, sys); });
}

ScenarioConfig parse_config(const std::string& text) {
  const json j = parse_json(text);
  return wrap([&] {
    SystemModel sys = system_from(need(j, "system"));
    DeltaIssClf clf = clf_from(need(j, "clf"), sys);

    RrtParams rrt;
    double epsilon = 0.0;
    std::uint64_t rrt_seed = 0;
    if (j.contains("rrt")) {
      const json& r = j.at("rrt");
      epsilon = num_or(r, "epsilon", 0.0);
      rrt_seed = r.value("seed", std::uint64_t{0});
      rrt.control_samples = r.value("control_samples", rrt.control_samples);
      rrt.goal_bias = num_or(r, "goal_bias", rrt.goal_bias);
      rrt.max_iterations = r.value("max_iterations", rrt.max_iterations);
      rrt.velocity_weight = num_or(r, "velocity_weight", rrt.velocity_weight);
      rrt.control_scale = num_or(r, "control_scale", rrt.control_scale);
      rrt.goal_margin = num_or(r, "goal_margin", rrt.goal_margin);
    }
    if (epsilon < 0.0) throw ConfigError("rrt.epsilon must be nonnegative");

    AbstractionConfig abs;
    if (j.contains("abstraction")) {
      const json& a = j.at("abstraction");
      abs.M = a.value("M", abs.M);
      if (a.contains("nu_bar") && !a.at("nu_bar").is_null()) abs.nu_bar = num(a, "nu_bar");
    }
    if (abs.M < 2) throw ConfigError("abstraction.M must be at least 2");

    RuntimeConfig rt;
    if (j.contains("runtime")) {
      const json& r = j.at("runtime");
      rt.mode = r.value("mode", rt.mode);
      if (rt.mode != "offline" && rt.mode != "online" && rt.mode != "traverse") {
        throw ConfigError("runtime.mode must be offline, online or traverse");
      }
      const std::string leg = r.value("leg_mode", std::string("offline"));
      if (leg != "offline" && leg != "online") throw ConfigError("runtime.leg_mode must be offline or online");
      rt.leg_mode = leg == "online" ? RuntimeMode::kOnline : RuntimeMode::kOffline;
      rt.disturbance = parse_disturbance_kind(r.value("disturbance", std::string("uniform-ball")));
      rt.runs = r.value("N", rt.runs);
      rt.seed = r.value("seed", rt.seed);
      rt.budget = r.value("budget", rt.budget);
      if (r.contains("x0")) rt.x0 = vec(r.at("x0"));
    }
    if (rt.runs < 1) throw ConfigError("runtime.N must be at least 1");

    return ScenarioConfig{j.value("name", std::string("scenario")),
                          std::move(sys),
                          std::move(clf),
                          epsilon,
                          rrt,
                          rrt_seed,
                          abs,
                          rt,
                          j.value("output", std::string())};
  });
}

ScenarioConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

}  // namespace reachsched
