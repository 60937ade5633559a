#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reachsched/system_model.hpp"

namespace reachsched {

/// Nominal trajectory x̂_0..x̂_L with controls û_0..û_{L-1}.
struct ReferenceTrajectory {
  std::vector<Vec> states;
  std::vector<Vec> controls;
  double margin = 0.0;
  std::uint64_t seed = 0;

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct RrtParams {
  int control_samples = 16;
  double goal_bias = 0.1;
  int max_iterations = 100000;
  /// Distance weight on coordinates outside the polygon plane.
  double velocity_weight = 0.5;
  /// Controls are drawn from the ball of radius control_scale * u_max.
  double control_scale = 1.0;
  /// Required depth of the final state inside X_F.
  double goal_margin = 0.0;
};

/// Kinodynamic RRT from the Chebyshev center of X_I into X_F. Every state
/// keeps signed distance >= margin to the free-space boundary.
///
/// Throws PlanningFailure when the iteration budget runs out.
ReferenceTrajectory plan_rrt(const SystemModel& sys, double margin, const RrtParams& params, std::uint64_t seed);

struct ValidationReport {
  bool start_ok = true;
  bool dynamics_ok = true;
  std::optional<int> first_dynamics_violation;
  bool margin_ok = true;
  std::optional<int> first_margin_violation;
  bool terminal_ok = true;
  bool controls_ok = true;
  std::optional<int> first_control_violation;

  bool ok() const { return start_ok && dynamics_ok && margin_ok && terminal_ok && controls_ok; }
};

ValidationReport validate_reference(const SystemModel& sys, const ReferenceTrajectory& ref);

}  // namespace reachsched
