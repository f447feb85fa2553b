#pragma once

// Supervisor channel (Sc): independent sensing, internal (ISC) and external
// (ESC) safety-constraint monitoring, the takeover decision, an always-ready
// safety-maneuver planner and the live signal.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adi/faults.hpp"
#include "adi/nominal_channel.hpp"
#include "adi/perception.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"

namespace adi {

enum class IscKind : std::uint8_t {
  SelfDiagnosedError,
  HeartbeatLost,
  TrajectoryDeviation,
  SetpointImplausible,
  SafetyManeuverIscBreach,
};

inline constexpr std::string_view to_string(IscKind k) {
  switch (k) {
    case IscKind::SelfDiagnosedError: return "SelfDiagnosedError";
    case IscKind::HeartbeatLost: return "HeartbeatLost";
    case IscKind::TrajectoryDeviation: return "TrajectoryDeviation";
    case IscKind::SetpointImplausible: return "SetpointImplausible";
    case IscKind::SafetyManeuverIscBreach: return "SafetyManeuverIscBreach";
  }
  return "?";
}

enum class TakeoverCause : std::uint8_t {
  None,
  SelfDiagnosedError,
  HeartbeatLost,
  TrajectoryDeviation,
  SetpointImplausible,
  SafetyManeuverIscBreach,
  EscGraceExpired,
};

inline constexpr std::string_view to_string(TakeoverCause c) {
  switch (c) {
    case TakeoverCause::None: return "";
    case TakeoverCause::SelfDiagnosedError: return "SelfDiagnosedError";
    case TakeoverCause::HeartbeatLost: return "HeartbeatLost";
    case TakeoverCause::TrajectoryDeviation: return "TrajectoryDeviation";
    case TakeoverCause::SetpointImplausible: return "SetpointImplausible";
    case TakeoverCause::SafetyManeuverIscBreach: return "SafetyManeuverIscBreach";
    case TakeoverCause::EscGraceExpired: return "EscGraceExpired";
  }
  return "?";
}

inline constexpr TakeoverCause cause_of(IscKind k) {
  return static_cast<TakeoverCause>(static_cast<std::uint8_t>(k) + 1);
}

struct IscViolation {
  IscKind kind;
  double t_detected = 0.0;
  std::string detail;
};

struct EscAssessment {
  double risk_sc = 0.0;
  bool outside_esc = false;
  double grace_elapsed = 0.0;
};

struct TakeoverDecision {
  bool take_over = false;
  TakeoverCause cause = TakeoverCause::None;
  double t = 0.0;
};

enum class ManeuverKind : std::uint8_t { EmergencyStopInLane, ControlledStopInLane, PullToShoulder };

inline constexpr std::string_view to_string(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::EmergencyStopInLane: return "EmergencyStopInLane";
    case ManeuverKind::ControlledStopInLane: return "ControlledStopInLane";
    case ManeuverKind::PullToShoulder: return "PullToShoulder";
  }
  return "?";
}

struct SafetyManeuverPlan {
  ManeuverKind maneuver = ManeuverKind::ControlledStopInLane;
  Setpoint setpoint{SetpointSource::Supervisor, 0.0, LaneCommand::Keep, Intent::SafetyManeuver};
};

struct LiveSignal {
  std::uint64_t counter = 0;
};

struct ScConfig {
  SensorModel sensor{80.0, 20.0, 0.3, 0.15};
  RiskParams risk;
  RoadConfig road;
  int k_miss = 3;
  double eps_pos = 0.5;
  double eps_v = 1.0;
  double implausible_margin = 0.10;
  double t_react = 0.5;
  double controlled_decel = 3.0;
  double shoulder_min_speed = 5.0;
  double maneuver_min_decel = 2.0; // observed braking expected during an Nc safety maneuver
  double maneuver_check_min_speed = 0.5;
};

/// Nc flows I, III and V as received this step; all null when the Nc is silent.
struct NcFlows {
  const NcStatus* status = nullptr;
  const IntendedTrajectory* trajectory = nullptr;
  const Setpoint* setpoint = nullptr;
};

/// Monitoring memory of one supervisor instance.
struct ScState {
  std::optional<std::uint64_t> last_heartbeat;
  int heartbeat_misses = 0;
  // Dead-reckoned intended ego motion: advanced each step by the Nc's
  // intended acceleration, compared to the observed ego state.
  std::optional<LongitudinalState> reference;
  std::optional<double> intended_accel;
  Intent prev_intent = Intent::Normal;
  std::optional<double> prev_ego_v;
  int grace_steps = 0;
  TakeoverDecision decision;
};

inline MonitoredState sense_sc(const WorldState& world, std::span<const ActiveFault> faults,
                               const NoiseSource& noise, const SensorModel& model = ScConfig{}.sensor) {
  MonitoredState m = ego_monitored_state(world.ego);
  m.objects = sense_objects(world, model, noise);
  for (const auto& f : faults)
    if (f.spec->kind == FaultKind::ScFalsePositivePerception)
      apply_perception_fault(m.objects, *f.spec, *f.runtime, world.t, kScPhantomId);
  return m;
}

inline std::vector<IscViolation> monitor_isc(const NcFlows& nc, const PlatformStatus& platform,
                                             const MonitoredState& sc_obs, ScState& st, double t,
                                             const ScConfig& cfg = {}) {
  std::vector<IscViolation> out;

  if (nc.status && !nc.status->self_diagnosed_errors.empty())
    out.push_back({IscKind::SelfDiagnosedError, t, nc.status->self_diagnosed_errors.front()});

  // A beat is missed on every step without a fresh counter value; the loss
  // is declared once the counter stayed frozen for k_miss steps after the
  // first miss.
  if (nc.status && (!st.last_heartbeat || nc.status->heartbeat != *st.last_heartbeat)) {
    st.last_heartbeat = nc.status->heartbeat;
    st.heartbeat_misses = 0;
  } else {
    ++st.heartbeat_misses;
  }
  if (st.heartbeat_misses > cfg.k_miss)
    out.push_back({IscKind::HeartbeatLost, t, "missed " + std::to_string(st.heartbeat_misses)});

  const LongitudinalState ego{sc_obs.ego_s, sc_obs.ego_v};
  if (st.reference && st.intended_accel) {
    st.reference = integrate(*st.reference, *st.intended_accel, kStep);
    const double ds = std::abs(st.reference->s - ego.s);
    const double dv = std::abs(st.reference->v - ego.v);
    if (ds > cfg.eps_pos || dv > cfg.eps_v)
      out.push_back({IscKind::TrajectoryDeviation, t,
                     "ds=" + std::to_string(ds) + " dv=" + std::to_string(dv)});
  }
  if (nc.trajectory && !nc.trajectory->samples.empty()) {
    if (!st.reference) st.reference = ego;
    st.intended_accel = nc.trajectory->samples.front().a;
  } else {
    st.reference.reset();
    st.intended_accel.reset();
  }

  if (nc.setpoint) {
    const double a = nc.setpoint->accel_request;
    const double limit = a < 0.0 ? platform.brake_capability : kMaxAccel;
    if (std::abs(a) > (1.0 + cfg.implausible_margin) * limit)
      out.push_back({IscKind::SetpointImplausible, t, "accel=" + std::to_string(a)});
  }

  if (st.prev_intent == Intent::SafetyManeuver && st.prev_ego_v && *st.prev_ego_v > cfg.maneuver_check_min_speed) {
    const double decel = (*st.prev_ego_v - ego.v) / kStep;
    if (decel < std::min(cfg.maneuver_min_decel, 0.5 * platform.brake_capability))
      out.push_back({IscKind::SafetyManeuverIscBreach, t, "decel=" + std::to_string(decel)});
  }
  st.prev_intent = nc.trajectory ? nc.trajectory->intent : Intent::Normal;
  st.prev_ego_v = ego.v;
  return out;
}

/// ESC check on the supervisor's own observation. The grace timer runs
/// while the scene is outside the ESC and the Nc does not announce a
/// safety maneuver.
inline EscAssessment monitor_esc(const MonitoredState& sc_obs, std::optional<Intent> nc_intent,
                                 const RiskParams& params, ScState& st) {
  EscAssessment esc;
  esc.risk_sc = estimate_risk(sc_obs, params);
  esc.outside_esc = esc.risk_sc >= params.r_max;
  const bool nc_handling = nc_intent && *nc_intent == Intent::SafetyManeuver;
  if (esc.outside_esc && !nc_handling) ++st.grace_steps;
  else st.grace_steps = 0;
  esc.grace_elapsed = st.grace_steps * kStep;
  return esc;
}

inline TakeoverDecision decide_takeover(std::span<const IscViolation> isc, const EscAssessment& esc, ScState& st,
                                        double t, const ScConfig& cfg = {}) {
  if (st.decision.take_over) return st.decision;
  const int grace_budget = static_cast<int>(std::lround(cfg.t_react / kStep));
  if (!isc.empty()) st.decision = {true, cause_of(isc.front().kind), t};
  else if (esc.outside_esc && st.grace_steps >= grace_budget) st.decision = {true, TakeoverCause::EscGraceExpired, t};
  else st.decision = {false, TakeoverCause::None, t};
  return st.decision;
}

inline bool shoulder_clear(const MonitoredState& m, const RoadConfig& road) {
  if (!road.has_shoulder) return false;
  const int shoulder = road.shoulder_lane();
  return std::none_of(m.objects.begin(), m.objects.end(), [&](const ObservedObject& o) { return o.occupies(shoulder); });
}

/// Degraded maneuver planning, recomputed every step whether or not the
/// supervisor is in control.
inline SafetyManeuverPlan plan_safety_maneuver(const MonitoredState& sc_obs, double risk_sc,
                                               const PlatformStatus& platform, const RoadConfig& road,
                                               const RiskParams& params, const ScConfig& cfg = {}) {
  SafetyManeuverPlan plan;
  const bool towards_shoulder =
      road.has_shoulder && ((sc_obs.ego_lane == road.lane_count - 1 && !sc_obs.ego_target_lane) ||
                            (sc_obs.ego_target_lane && *sc_obs.ego_target_lane == road.shoulder_lane()));
  if (risk_sc >= params.r_max) {
    plan.maneuver = ManeuverKind::EmergencyStopInLane;
    plan.setpoint.accel_request = -platform.brake_capability;
  } else if (towards_shoulder && shoulder_clear(sc_obs, road) && sc_obs.ego_v > cfg.shoulder_min_speed) {
    plan.maneuver = ManeuverKind::PullToShoulder;
    plan.setpoint.accel_request = -std::min(cfg.controlled_decel, platform.brake_capability);
    plan.setpoint.lane_cmd = LaneCommand::ToShoulder;
  } else {
    plan.maneuver = ManeuverKind::ControlledStopInLane;
    plan.setpoint.accel_request = -std::min(cfg.controlled_decel, platform.brake_capability);
  }
  return plan;
}

inline LiveSignal emit_live_signal(LiveSignal previous, bool healthy) {
  if (healthy) ++previous.counter;
  return previous;
}

// ---------------------------------------------------------------------------

struct ScOutput {
  LiveSignal live;
  MonitoredState observation;
  std::vector<IscViolation> isc;
  EscAssessment esc;
  TakeoverDecision decision;
  SafetyManeuverPlan plan;
};

class SupervisorChannel {
 public:
  SupervisorChannel(ScConfig cfg, std::uint64_t seed, Stream stream) : cfg_(std::move(cfg)), noise_(seed, stream) {}

  ScOutput step(const WorldState& world, const PlatformStatus& platform, const NcFlows& nc,
                std::span<const ActiveFault> faults) {
    ScOutput out;
    const RiskParams params = cfg_.risk.limited_to(platform.brake_capability);
    out.observation = sense_sc(world, faults, noise_, cfg_.sensor);
    out.isc = monitor_isc(nc, platform, out.observation, state_, world.t, cfg_);
    const std::optional<Intent> intent = nc.trajectory ? std::optional(nc.trajectory->intent) : std::nullopt;
    out.esc = monitor_esc(out.observation, intent, params, state_);
    out.decision = decide_takeover(out.isc, out.esc, state_, world.t, cfg_);
    out.plan = plan_safety_maneuver(out.observation, out.esc.risk_sc, platform, cfg_.road, params, cfg_);
    if (out.decision.take_over) {
      // Once in control, an emergency stop is never downgraded.
      if (emergency_committed_) {
        out.plan.maneuver = ManeuverKind::EmergencyStopInLane;
        out.plan.setpoint.accel_request = -platform.brake_capability;
        out.plan.setpoint.lane_cmd = LaneCommand::Keep;
      }
      emergency_committed_ = out.plan.maneuver == ManeuverKind::EmergencyStopInLane;
    }
    live_ = emit_live_signal(live_, true);
    out.live = live_;
    return out;
  }

  const ScState& state() const { return state_; }
  LiveSignal live() const { return live_; }

 private:
  ScConfig cfg_;
  NoiseSource noise_;
  ScState state_;
  LiveSignal live_;
  bool emergency_committed_ = false;
};

}  // namespace adi
