#pragma once

#include <string>

#include "reachsched/error_model.hpp"
#include "reachsched/reference_planner.hpp"
#include "reachsched/scheduler_runtime.hpp"
#include "reachsched/simulator.hpp"
#include "reachsched/symbolic_abstraction.hpp"

namespace reachsched {

std::string reference_to_json(const ReferenceTrajectory& ref);
ReferenceTrajectory reference_from_json(const std::string& text);
/// k, x̂_k..., û_k... (controls empty on the last row)
std::string reference_to_csv(const ReferenceTrajectory& ref);

/// k, v_max
std::string envelope_to_csv(const SafetyEnvelope& env);
std::string envelope_to_json(const SafetyEnvelope& env);

std::string schedule_to_json(const ScheduleResult& res);
ScheduleResult schedule_from_json(const std::string& text);

std::string timed_system_summary_json(const TimedSymbolicSystem& TA);

/// k, x..., u..., c_k, v_k, vbar_k
std::string trace_to_csv(const ExecutionTrace& trace);
std::string trace_summary_json(const ExecutionTrace& trace, const ValidityReport& validity);

std::string campaign_to_json(const CampaignStats& stats);
std::string traverse_to_json(const TraverseResult& res);

}  // namespace reachsched
