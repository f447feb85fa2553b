#pragma once

// Mode switch: picks the one set-point that reaches the platform each step
// and watches the supervisor live signal on behalf of the Nc.

#include <cstdint>
#include <optional>

#include "adi/platform.hpp"
#include "adi/supervisor_channel.hpp"

namespace adi {

struct ArbitrationState {
  SetpointSource source = SetpointSource::Nominal;
  std::optional<double> latched_at;
  std::uint64_t live_signal_last_seen = 0;
  bool live_signal_seen = false;
  int live_signal_misses = 0;
  bool directive_issued = false;
  std::optional<Setpoint> last_nc_setpoint;
  int nc_missing_steps = 0;
  bool architectural_failure = false;
};

struct ArbitrationResult {
  Setpoint setpoint;
  bool held = false;       // silent Nc, last accel held or coasting
  bool fallback = false;   // no channel could supply a set-point
};

inline constexpr int kDefaultMissLimit = 3;

inline Setpoint full_brake_fallback() {
  return Setpoint{SetpointSource::Nominal, -kMaxBrake, LaneCommand::Keep, Intent::SafetyManeuver};
}

/// `nc_sp` is null when the Nc is silent, `sc_plan` and `decision` are null
/// when no supervisor instance produced output this step. Without a
/// configured supervisor a silent Nc only holds, then coasts.
inline ArbitrationResult arbitrate(const Setpoint* nc_sp, const SafetyManeuverPlan* sc_plan,
                                   const TakeoverDecision* decision, ArbitrationState& st, double t,
                                   bool supervisor_expected = true, int miss_limit = kDefaultMissLimit) {
  ArbitrationResult r;
  if (decision && decision->take_over && st.source == SetpointSource::Nominal) {
    st.source = SetpointSource::Supervisor;
    st.latched_at = t;
  }

  if (st.source == SetpointSource::Supervisor) {
    if (sc_plan) {
      r.setpoint = sc_plan->setpoint;
    } else {
      r.setpoint = full_brake_fallback();
      r.fallback = true;
      st.architectural_failure = true;
    }
    return r;
  }

  if (nc_sp) {
    st.last_nc_setpoint = *nc_sp;
    st.nc_missing_steps = 0;
    r.setpoint = *nc_sp;
    return r;
  }

  if (!sc_plan && supervisor_expected) {
    r.setpoint = full_brake_fallback();
    r.fallback = true;
    st.architectural_failure = true;
    return r;
  }

  ++st.nc_missing_steps;
  r.held = true;
  // The held set-point keeps the last intent; only the acceleration decays to a coast.
  r.setpoint = st.last_nc_setpoint.value_or(Setpoint{});
  r.setpoint.lane_cmd = LaneCommand::Keep;
  if (st.nc_missing_steps > miss_limit || !st.last_nc_setpoint) r.setpoint.accel_request = 0.0;
  return r;
}

/// Nc-side watchdog on the supervisor live signal (simplex configuration
/// only). Returns true once the signal has been frozen for more than
/// `miss_limit` steps; the directive then stays in force.
inline bool watchdog_sc(const LiveSignal* live, ArbitrationState& st, int miss_limit = kDefaultMissLimit) {
  if (live && (!st.live_signal_seen || live->counter != st.live_signal_last_seen)) {
    st.live_signal_last_seen = live->counter;
    st.live_signal_seen = true;
    st.live_signal_misses = 0;
  } else {
    ++st.live_signal_misses;
  }
  if (st.live_signal_misses > miss_limit) st.directive_issued = true;
  return st.directive_issued;
}

}  // namespace adi
