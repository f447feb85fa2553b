#pragma once

// Shared execution platform: clamps the selected set-point to the current
// capabilities and reports its status to both channels in the same step.

#include <algorithm>
#include <string>
#include <vector>

#include "adi/sim_core.hpp"

namespace adi {

struct PlatformStatus {
  double brake_capability = kMaxBrake;
  bool lane_change_available = true;
  bool degraded = false;
  std::vector<std::string> fault_codes;
};

enum class SetpointSource : std::uint8_t { Nominal, Supervisor };
enum class Intent : std::uint8_t { Normal, SafetyManeuver };

struct Setpoint {
  SetpointSource source = SetpointSource::Nominal;
  double accel_request = 0.0;
  LaneCommand lane_cmd = LaneCommand::Keep;
  Intent intent = Intent::Normal;
};

/// Baseline (fault-free) platform condition of a scenario.
struct PlatformBaseline {
  double brake_capability = kMaxBrake;
  bool lane_change_available = true;
};

/// A reported platform fault: multiplicative brake degradation.
struct PlatformFault {
  std::string code;
  double brake_factor = 1.0;
  bool disables_lane_change = false;
};

inline PlatformStatus report_status(const std::vector<PlatformFault>& active,
                                    const PlatformBaseline& baseline = {}) {
  PlatformStatus st;
  st.brake_capability = std::clamp(baseline.brake_capability, 1e-3, kMaxBrake);
  st.lane_change_available = baseline.lane_change_available;
  for (const auto& f : active) {
    st.brake_capability *= std::clamp(f.brake_factor, 1e-3, 1.0);
    if (f.disables_lane_change) st.lane_change_available = false;
    st.fault_codes.push_back(f.code);
  }
  st.degraded = st.brake_capability < kMaxBrake || !st.lane_change_available;
  return st;
}

inline Actuation execute_setpoint(const Setpoint& sp, const PlatformStatus& status,
                                  const RoadConfig& road = {}) {
  Actuation act;
  act.accel = std::clamp(sp.accel_request, -status.brake_capability, kMaxAccel);
  act.lane_cmd = sp.lane_cmd;
  if (!status.lane_change_available) {
    const bool shoulder_maneuver = sp.lane_cmd == LaneCommand::ToShoulder &&
                                   sp.source == SetpointSource::Supervisor &&
                                   sp.intent == Intent::SafetyManeuver && road.has_shoulder;
    if (!shoulder_maneuver) act.lane_cmd = LaneCommand::Keep;
  }
  if (sp.lane_cmd == LaneCommand::ToShoulder && sp.intent != Intent::SafetyManeuver)
    act.lane_cmd = LaneCommand::Keep;
  return act;
}

}  // namespace adi
