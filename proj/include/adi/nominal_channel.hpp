#pragma once

// Nominal channel (Nc): sensing, situation analysis with risk assessment,
// behaviour decision, trajectory planning and self-diagnosis. Owns its world
// model; nothing mutable is shared with the supervisor.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adi/faults.hpp"
#include "adi/perception.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"

namespace adi {

enum class SensorHealth : std::uint8_t { OK, Degraded, Failed };
enum class NcBehavior : std::uint8_t { KeepLane, ChangeLaneLeft, ChangeLaneRight, SafetyManeuver };

struct NcConfig {
  double set_speed = 25.0;
  RoadConfig road;
  RiskParams risk;
  SensorModel sensor{150.0, 50.0, 0.2, 0.1};

  double k_speed = 0.5;       // speed tracking gain [1/s]
  double k_gap = 0.23;        // gap error gain [1/s^2]
  double k_rel = 0.74;        // relative speed gain [1/s]
  double headway = 2.0;       // desired time gap [s]
  double standstill_gap = 5.0;
  double degraded_speed_factor = 0.7;

  double track_drop_age = 1.0;
  double gating_distance = 3.0;
  double plan_horizon = 2.0;
  double comfort_decel = 3.0;
  double lane_change_gap_time = 2.0;
  double free_lane_front = 10.0;
  double free_lane_rear = 20.0;
};

/// One active fault as seen by a channel.
struct ActiveFault {
  std::size_t index = 0;
  const FaultSpec* spec = nullptr;
  const FaultRuntime* runtime = nullptr;
};

struct NcStatus {
  std::uint64_t heartbeat = 0;
  std::vector<std::string> self_diagnosed_errors;
  std::map<std::string, SensorHealth> sensor_status;
};

struct NcObservation {
  VehicleState ego;
  std::vector<ObservedObject> objects;
  std::map<std::string, SensorHealth> sensor_status;
};

struct Track {
  ObservedObject object;
  double age = 0.0; // time since last observation
};

struct WorldModelNc {
  std::vector<Track> tracks;
  VehicleState ego;
  RoadConfig road;
};

struct LaneLead {
  VehicleId id = 0;
  double gap = 0.0;
  double v = 0.0;
};

struct SituationAssessment {
  MonitoredState monitored;                 // belief: ego + live tracks
  double risk = 0.0;                        // R̂ over the lanes the ego occupies
  std::optional<LaneLead> lead;             // nearest object ahead in an occupied lane
  double lead_gap_time = 1e9;               // gap / ego speed
  std::map<int, double> lane_change_risk;   // adjacent lane -> risk while occupying both lanes
  std::map<int, bool> lane_free;            // adjacent lane -> free of nearby traffic
};

struct TrajectorySample {
  double t = 0.0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0; // acceleration applied over the interval ending at this sample
};

struct IntendedTrajectory {
  double t0 = 0.0;
  std::vector<TrajectorySample> samples; // spacing kStep, horizon plan_horizon
  Intent intent = Intent::Normal;
};

// ---------------------------------------------------------------------------

inline NcObservation sense_nc(const WorldState& world, std::span<const ActiveFault> faults,
                              const NoiseSource& noise, const SensorModel& model = NcConfig{}.sensor) {
  NcObservation obs;
  obs.ego = world.ego;
  obs.objects = sense_objects(world, model, noise);
  for (const auto& f : faults)
    if (is_nc_perception_fault(f.spec->kind))
      apply_perception_fault(obs.objects, *f.spec, *f.runtime, world.t, kNcPhantomId);
  obs.sensor_status["front"] = SensorHealth::OK;
  return obs;
}

inline double gap_ahead(const MonitoredState& m, const ObservedObject& o) { return o.s - m.ego_s - m.ego_length; }

inline bool lane_is_free(const MonitoredState& m, int lane, const NcConfig& cfg) {
  for (const auto& o : m.objects) {
    if (!o.occupies(lane)) continue;
    const double ahead = o.s - (m.ego_s + m.ego_length);
    const double behind = m.ego_s - (o.s + o.length);
    if (ahead >= 0.0) {
      if (ahead < cfg.free_lane_front) return false;
      continue;
    }
    if (behind < 0.0) return false; // alongside
    const double closing = std::max(0.0, o.v - m.ego_v);
    if (behind < cfg.free_lane_rear + closing * kLaneChangeTime) return false;
  }
  return true;
}

/// Track update (id association, 3 m gating for unmatched ids, constant-
/// velocity coasting, staleness drop) followed by risk assessment.
inline SituationAssessment analyze_nc(const NcObservation& obs, WorldModelNc& wm, const RiskParams& params,
                                      const NcConfig& cfg = {}) {
  std::vector<bool> matched(wm.tracks.size(), false);
  std::vector<Track> fresh;
  for (const auto& o : obs.objects) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < wm.tracks.size(); ++i)
      if (!matched[i] && wm.tracks[i].object.id == o.id) { hit = i; break; }
    if (!hit) {
      double best = cfg.gating_distance;
      for (std::size_t i = 0; i < wm.tracks.size(); ++i) {
        if (matched[i] || wm.tracks[i].object.lane != o.lane) continue;
        const double d = std::abs(wm.tracks[i].object.s - o.s);
        if (d <= best) { best = d; hit = i; }
      }
    }
    if (hit) matched[*hit] = true;
    fresh.push_back(Track{o, 0.0});
  }
  for (std::size_t i = 0; i < wm.tracks.size(); ++i) {
    if (matched[i]) continue;
    Track t = wm.tracks[i];
    t.object.s += t.object.v * kStep;
    t.age += kStep;
    if (t.age <= cfg.track_drop_age + kTimeEps) fresh.push_back(t);
  }
  std::sort(fresh.begin(), fresh.end(), [](const Track& a, const Track& b) { return a.object.id < b.object.id; });
  wm.tracks = std::move(fresh);
  wm.ego = obs.ego;

  SituationAssessment as;
  as.monitored = ego_monitored_state(obs.ego);
  for (const auto& t : wm.tracks) as.monitored.objects.push_back(t.object);
  const MonitoredState& m = as.monitored;
  as.risk = estimate_risk(m, params);

  for (const auto& o : m.objects) {
    if (!is_relevant(m, o)) continue;
    const double g = gap_ahead(m, o);
    if (!as.lead || g < as.lead->gap) as.lead = LaneLead{o.id, g, o.v};
  }
  if (as.lead) as.lead_gap_time = as.lead->gap / std::max(m.ego_v, 0.1);

  if (!m.ego_target_lane) {
    for (int lane : {m.ego_lane - 1, m.ego_lane + 1}) {
      if (!wm.road.is_lane(lane)) continue;
      MonitoredState both = m;
      both.ego_target_lane = lane;
      as.lane_change_risk[lane] = estimate_risk(both, params);
      as.lane_free[lane] = lane_is_free(m, lane, cfg);
    }
  }
  return as;
}

/// Behaviour decision. `force_safety_maneuver` covers the latched state,
/// self-diagnosed errors and a missing supervisor live signal.
inline NcBehavior decide_behavior(const SituationAssessment& as, const PlatformStatus& platform,
                                  const RiskParams& params, bool force_safety_maneuver = false,
                                  const NcConfig& cfg = {}) {
  if (force_safety_maneuver || as.risk >= params.r_max) return NcBehavior::SafetyManeuver;
  if (as.monitored.ego_target_lane) return NcBehavior::KeepLane;
  if (as.lead && as.lead_gap_time < cfg.lane_change_gap_time && platform.lane_change_available) {
    for (int lane : {as.monitored.ego_lane - 1, as.monitored.ego_lane + 1}) {
      auto risk = as.lane_change_risk.find(lane);
      auto free = as.lane_free.find(lane);
      if (risk == as.lane_change_risk.end() || free == as.lane_free.end()) continue;
      if (free->second && risk->second < 0.5 * params.r_max)
        return lane < as.monitored.ego_lane ? NcBehavior::ChangeLaneLeft : NcBehavior::ChangeLaneRight;
    }
  }
  return NcBehavior::KeepLane;
}

/// Planner parameters the Nc believes; a systematic fault may rewrite them.
struct PlannerBeliefs {
  double brake_capability = kMaxBrake;
  double headway = 2.0;
};

/// Gap-keeping law: speed tracking, limited by constant-time-gap following
/// of the lead when one is present.
inline double gap_keeping_accel(double v, double v_set, const std::optional<LaneLead>& lead,
                                const PlannerBeliefs& beliefs, const NcConfig& cfg) {
  double a = cfg.k_speed * (v_set - v);
  if (lead) {
    const double desired = cfg.standstill_gap + beliefs.headway * v;
    a = std::min(a, cfg.k_gap * (lead->gap - desired) + cfg.k_rel * (lead->v - v));
  }
  return std::clamp(a, -beliefs.brake_capability, kMaxAccel);
}

struct PlanResult {
  IntendedTrajectory trajectory;
  Setpoint setpoint;
};

inline PlanResult plan_trajectory(NcBehavior behavior, const SituationAssessment& as,
                                  const PlatformStatus& platform, const RiskParams& params,
                                  const PlannerBeliefs& beliefs, const NcConfig& cfg = {}, double t0 = 0.0) {
  PlanResult out;
  const MonitoredState& m = as.monitored;
  const int steps = static_cast<int>(std::lround(cfg.plan_horizon / kStep));
  LongitudinalState x{m.ego_s, m.ego_v};
  out.trajectory.t0 = t0;

  if (behavior == NcBehavior::SafetyManeuver) {
    const double decel = as.risk >= params.r_max ? beliefs.brake_capability
                                                 : std::min(cfg.comfort_decel, beliefs.brake_capability);
    out.trajectory.intent = Intent::SafetyManeuver;
    for (int i = 1; i <= steps; ++i) {
      x = integrate(x, -decel, kStep);
      out.trajectory.samples.push_back({t0 + i * kStep, x.s, x.v, -decel});
    }
    out.setpoint = {SetpointSource::Nominal, -decel, LaneCommand::Keep, Intent::SafetyManeuver};
    return out;
  }

  const double v_set = cfg.set_speed * (platform.degraded ? cfg.degraded_speed_factor : 1.0);
  std::optional<LaneLead> lead = as.lead;
  double first_accel = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double a = gap_keeping_accel(x.v, v_set, lead, beliefs, cfg);
    if (i == 1) first_accel = a;
    const LongitudinalState next = integrate(x, a, kStep);
    if (lead) lead->gap += lead->v * kStep - (next.s - x.s);
    x = next;
    out.trajectory.samples.push_back({t0 + i * kStep, x.s, x.v, a});
  }
  LaneCommand cmd = LaneCommand::Keep;
  if (behavior == NcBehavior::ChangeLaneLeft) cmd = LaneCommand::ChangeLeft;
  if (behavior == NcBehavior::ChangeLaneRight) cmd = LaneCommand::ChangeRight;
  out.trajectory.intent = Intent::Normal;
  out.setpoint = {SetpointSource::Nominal, first_accel, cmd, Intent::Normal};
  return out;
}

/// Self-diagnosis: each active Nc fault is reported with per-step
/// probability equal to its detectability; once reported it stays listed
/// while active.
inline NcStatus self_diagnose(std::uint64_t heartbeat, std::span<const ActiveFault> faults,
                              std::vector<std::size_t>& reported, const NoiseSource& noise, std::int64_t step) {
  NcStatus st;
  st.heartbeat = heartbeat;
  st.sensor_status["front"] = SensorHealth::OK;
  for (const auto& f : faults) {
    if (!has_detectability(f.spec->kind)) continue;
    const bool already = std::find(reported.begin(), reported.end(), f.index) != reported.end();
    if (!already && noise.bernoulli(step, static_cast<std::int64_t>(f.index), f.spec->detectability))
      reported.push_back(f.index);
    if (std::find(reported.begin(), reported.end(), f.index) != reported.end()) {
      st.self_diagnosed_errors.push_back(fault_code(*f.spec));
      if (is_nc_perception_fault(f.spec->kind)) st.sensor_status["front"] = SensorHealth::Degraded;
    }
  }
  return st;
}

// ---------------------------------------------------------------------------

/// Per-step Nc outputs: flows I (status), II (objects), III (trajectory),
/// V (set-point).
struct NcOutput {
  NcStatus status;
  std::vector<ObservedObject> objects;
  IntendedTrajectory trajectory;
  Setpoint setpoint;
  NcBehavior behavior = NcBehavior::KeepLane;
  double risk = 0.0;
};

class NominalChannel {
 public:
  NominalChannel(NcConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), sensor_noise_(seed, Stream::NcSensor), diag_noise_(seed, Stream::NcDiagnosis) {
    wm_.road = cfg_.road;
  }

  /// One execution of the channel. `faults` holds the active Nc faults
  /// other than silence (the caller does not run a silent channel).
  NcOutput step(const WorldState& world, const PlatformStatus& platform, std::span<const ActiveFault> faults,
                bool supervisor_lost) {
    const NcObservation obs = sense_nc(world, faults, sensor_noise_, cfg_.sensor);

    PlannerBeliefs beliefs{platform.brake_capability, cfg_.headway};
    for (const auto& f : faults) {
      if (f.spec->kind != FaultKind::NcSystematicParam) continue;
      if (f.spec->params.name == "brake_capability") beliefs.brake_capability = f.spec->params.value;
      else if (f.spec->params.name == "headway") beliefs.headway = f.spec->params.value;
    }
    const RiskParams risk_params = cfg_.risk.limited_to(beliefs.brake_capability);

    const SituationAssessment as = analyze_nc(obs, wm_, risk_params, cfg_);
    if (supervisor_lost) safety_latched_ = true;
    const NcBehavior behavior = decide_behavior(as, platform, risk_params, safety_latched_, cfg_);
    if (behavior == NcBehavior::SafetyManeuver) safety_latched_ = true;
    PlanResult plan = plan_trajectory(behavior, as, platform, risk_params, beliefs, cfg_, world.t);
    if (behavior == NcBehavior::SafetyManeuver) {
      // Never relax braking during a maneuver, e.g. after losing a track.
      const double a = std::max(std::min(plan.setpoint.accel_request, maneuver_accel_.value_or(0.0)),
                                -beliefs.brake_capability);
      maneuver_accel_ = a;
      plan.setpoint.accel_request = a;
      LongitudinalState x{world.ego.s, world.ego.v};
      for (auto& sample : plan.trajectory.samples) {
        x = integrate(x, a, kStep);
        sample = {sample.t, x.s, x.v, a};
      }
    }

    ++heartbeat_;
    NcOutput out;
    out.status = self_diagnose(heartbeat_, faults, reported_, diag_noise_, world.step);
    if (!out.status.self_diagnosed_errors.empty()) safety_latched_ = true; // own maneuver from next step
    out.objects = obs.objects;
    out.trajectory = std::move(plan.trajectory);
    out.setpoint = plan.setpoint;
    out.behavior = behavior;
    out.risk = as.risk;
    return out;
  }

  const WorldModelNc& world_model() const { return wm_; }
  std::uint64_t heartbeat() const { return heartbeat_; }
  bool safety_maneuver_latched() const { return safety_latched_; }

 private:
  NcConfig cfg_;
  NoiseSource sensor_noise_;
  NoiseSource diag_noise_;
  WorldModelNc wm_;
  std::uint64_t heartbeat_ = 0;
  bool safety_latched_ = false;
  std::optional<double> maneuver_accel_;
  std::vector<std::size_t> reported_;
};

}  // namespace adi
