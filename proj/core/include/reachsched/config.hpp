#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "reachsched/lyapunov.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/simulator.hpp"
#include "reachsched/system_model.hpp"

namespace reachsched {

struct AbstractionConfig {
  int M = 100;
  std::optional<double> nu_bar;
};

struct RuntimeConfig {
  std::string mode = "offline";  // offline | online | traverse
  RuntimeMode leg_mode = RuntimeMode::kOffline;  // runtime used inside traverse legs
  DisturbanceKind disturbance = DisturbanceKind::kUniformBall;
  int runs = 100;
  std::uint64_t seed = 1;
  int budget = 1000;
  std::optional<Vec> x0;
};

struct ScenarioConfig {
  std::string name;
  SystemModel system;
  DeltaIssClf clf;
  double epsilon = 0.0;
  RrtParams rrt;
  std::uint64_t rrt_seed = 0;
  AbstractionConfig abstraction;
  RuntimeConfig runtime;
  std::string output_dir;
};

/// Parses a scenario document. Throws ConfigError on malformed input.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

SystemModel parse_system(const std::string& json_text);

/// Builds the CLF block against an already parsed system.
DeltaIssClf parse_clf(const std::string& json_text, const SystemModel& sys);

std::string read_text_file(const std::string& path);

}  // namespace reachsched
