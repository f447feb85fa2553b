#pragma once

// Per-step scheduler, trace records, vehicle-level state classifier,
// metrics and campaign execution.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "adi/arbitration.hpp"
#include "adi/faults.hpp"
#include "adi/nominal_channel.hpp"
#include "adi/perception.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"
#include "adi/scenario.hpp"
#include "adi/sim_core.hpp"
#include "adi/supervisor_channel.hpp"

namespace adi {

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr double kMrcDwell = 2.0;

enum class VehicleLevelState : std::uint8_t {
  NominalOperation,
  HazardousEventOperational,
  SafetyManeuverNc,
  CriticalErrorDetected,
  SafetyManeuverSc,
  UndetectedHazardousEvent,
  MinimalRiskCondition,
  Crash,
};

inline constexpr std::array kAllVehicleLevelStates = {
    VehicleLevelState::NominalOperation,      VehicleLevelState::HazardousEventOperational,
    VehicleLevelState::SafetyManeuverNc,      VehicleLevelState::CriticalErrorDetected,
    VehicleLevelState::SafetyManeuverSc,      VehicleLevelState::UndetectedHazardousEvent,
    VehicleLevelState::MinimalRiskCondition,  VehicleLevelState::Crash,
};

inline constexpr std::string_view to_string(VehicleLevelState s) {
  switch (s) {
    case VehicleLevelState::NominalOperation: return "NominalOperation";
    case VehicleLevelState::HazardousEventOperational: return "HazardousEventOperational";
    case VehicleLevelState::SafetyManeuverNc: return "SafetyManeuverNc";
    case VehicleLevelState::CriticalErrorDetected: return "CriticalErrorDetected";
    case VehicleLevelState::SafetyManeuverSc: return "SafetyManeuverSc";
    case VehicleLevelState::UndetectedHazardousEvent: return "UndetectedHazardousEvent";
    case VehicleLevelState::MinimalRiskCondition: return "MinimalRiskCondition";
    case VehicleLevelState::Crash: return "Crash";
  }
  return "?";
}

enum class Outcome : std::uint8_t { MissionComplete, MinimalRiskCondition, Crash, ArchitecturalFailure };

inline constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::MissionComplete: return "MissionComplete";
    case Outcome::MinimalRiskCondition: return "MinimalRiskCondition";
    case Outcome::Crash: return "Crash";
    case Outcome::ArchitecturalFailure: return "ArchitecturalFailure";
  }
  return "?";
}

enum class MrcGrade : std::uint8_t { None, OtherLane, RightmostLane, Shoulder };

inline constexpr std::string_view to_string(MrcGrade g) {
  switch (g) {
    case MrcGrade::None: return "";
    case MrcGrade::OtherLane: return "other_lane";
    case MrcGrade::RightmostLane: return "rightmost_lane";
    case MrcGrade::Shoulder: return "shoulder";
  }
  return "?";
}

/// Who is driving after a step's decisions.
enum class DrivingMode : std::uint8_t { Nominal, NcSafetyManeuver, ScSafetyManeuver };

struct RunOptions {
  bool no_supervisor = false;
  std::optional<SupervisorConfig> supervisor;
  std::optional<std::uint64_t> seed;
};

// ---------------------------------------------------------------------------
// Trace records

struct NcRecord {
  NcStatus status;
  NcBehavior behavior = NcBehavior::KeepLane;
  double risk = 0.0;
  std::size_t object_count = 0;
  Intent intent = Intent::Normal;
  double planned_accel = 0.0;   // first sample of flow III
  Setpoint setpoint;            // flow V as emitted (after output faults)
  bool latched = false;
};

struct ScRecord {
  std::string instance;         // "primary" or "standby"
  LiveSignal live;
  std::vector<IscViolation> isc;
  EscAssessment esc;
  TakeoverDecision decision;
  SafetyManeuverPlan plan;
};

struct SwitchRecord {
  Setpoint setpoint;            // flow VII
  Actuation actuation;
  bool held = false;
  bool fallback = false;
  bool watchdog_directive = false;
};

/// One scheduler step: the world at t plus everything decided at t. The
/// last record of a run holding a crash or MRC carries the world only.
struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  VehicleState ego;
  std::vector<VehicleState> actors;
  std::vector<std::size_t> active_faults;
  PlatformStatus platform;
  double true_risk = 0.0;
  std::optional<CollisionRecord> collision;
  bool mrc = false;
  bool terminal = false;

  std::optional<NcRecord> nc;
  std::optional<ScRecord> sc;
  std::optional<SwitchRecord> sw;
  bool nc_self_report_first = false;  // first self-diagnosed error of the run
  bool takeover_first = false;        // takeover decision fired this step
  bool directive_first = false;       // watchdog directive issued this step

  std::optional<VehicleLevelState> label;
  bool latent_fault = false;          // an Nc fault is active and undetected
};

struct Trace {
  std::string scenario;
  std::uint64_t seed = 0;
  SupervisorConfig supervisor = SupervisorConfig::LiveSignalSimplex;
  bool supervisor_enabled = true;
  std::vector<FaultSpec> faults;
  RiskParams risk;
  std::vector<StepRecord> records;
  Outcome outcome = Outcome::MissionComplete;
  MrcGrade mrc_grade = MrcGrade::None;
  std::optional<TakeoverDecision> takeover;
};

inline DrivingMode mode_after(const StepRecord& r) {
  if (!r.sw) return DrivingMode::Nominal;
  if (r.sw->setpoint.source == SetpointSource::Supervisor) return DrivingMode::ScSafetyManeuver;
  if (r.sw->setpoint.intent == Intent::SafetyManeuver || r.sw->watchdog_directive || (r.nc && r.nc->latched))
    return DrivingMode::NcSafetyManeuver;
  return DrivingMode::Nominal;
}

inline bool is_stationary(const VehicleState& v) { return v.v <= 1e-9; }

inline MrcGrade grade_mrc(const VehicleState& ego, const RoadConfig& road) {
  if (road.has_shoulder && ego.lane == road.shoulder_lane() && !ego.lane_change) return MrcGrade::Shoulder;
  if (ego.lane == road.lane_count - 1 && !ego.lane_change) return MrcGrade::RightmostLane;
  return MrcGrade::OtherLane;
}

// ---------------------------------------------------------------------------
// Scheduler

namespace detail {

struct FaultBinding {
  std::vector<ActiveFault> nc;            // faults the Nc experiences (silence excluded)
  std::vector<ActiveFault> sc_primary;
  std::vector<ActiveFault> sc_standby;
  std::vector<PlatformFault> platform;
  std::vector<const FaultSpec*> setpoint; // corruptions of flow V
  bool nc_silent = false;
  bool sc_primary_silent = false;
  bool sc_standby_silent = false;
};

inline FaultBinding bind_faults(const std::vector<FaultSpec>& specs, const std::vector<std::size_t>& active,
                                const std::vector<FaultRuntime>& runtime) {
  FaultBinding b;
  for (std::size_t i : active) {
    const FaultSpec& f = specs[i];
    const ActiveFault af{i, &f, &runtime[i]};
    switch (f.kind) {
      case FaultKind::NcSilence: b.nc_silent = true; break;
      case FaultKind::NcStuckOutput:
      case FaultKind::NcRandomCorruption:
        b.setpoint.push_back(&f);
        b.nc.push_back(af);
        break;
      case FaultKind::ScSilence:
        (f.target == "sc.standby" ? b.sc_standby_silent : b.sc_primary_silent) = true;
        break;
      case FaultKind::ScFalsePositivePerception:
        (f.target == "sc.standby.perception" ? b.sc_standby : b.sc_primary).push_back(af);
        break;
      case FaultKind::PlatformBrakeDegrade: b.platform.push_back(to_platform_fault(f)); break;
      default: b.nc.push_back(af); break;
    }
  }
  return b;
}

inline ScRecord to_record(const ScOutput& o, std::string instance) {
  return ScRecord{std::move(instance), o.live, o.isc, o.esc, o.decision, o.plan};
}

}  // namespace detail

inline ScenarioConfig apply_options(ScenarioConfig cfg, const RunOptions& opt) {
  if (opt.supervisor) cfg.supervisor = *opt.supervisor;
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

/// Executes one scenario. Step order: activate faults, platform status,
/// Nc, Sc, watchdog and arbitration, platform execution, world step.
inline Trace run_scenario(const ScenarioConfig& config, const RunOptions& opt = {}) {
  const ScenarioConfig cfg = apply_options(config, opt);
  Trace trace;
  trace.scenario = cfg.name;
  trace.seed = cfg.seed;
  trace.supervisor = cfg.supervisor;
  trace.supervisor_enabled = !opt.no_supervisor;
  trace.faults = cfg.faults;
  trace.risk = cfg.risk;

  NcConfig nc_cfg;
  nc_cfg.set_speed = cfg.set_speed;
  nc_cfg.road = cfg.road;
  nc_cfg.risk = cfg.risk;
  NominalChannel nc(nc_cfg, cfg.seed);

  ScConfig sc_cfg;
  sc_cfg.risk = cfg.risk;
  sc_cfg.road = cfg.road;
  const bool duplicated = cfg.supervisor == SupervisorConfig::DuplicatedSc;
  SupervisorChannel sc_primary(sc_cfg, cfg.seed, Stream::ScSensorPrimary);
  SupervisorChannel sc_standby(sc_cfg, cfg.seed, Stream::ScSensorStandby);
  const NoiseSource corruption_noise(cfg.seed, Stream::FaultCorruption);

  std::vector<FaultRuntime> runtime(cfg.faults.size());
  ArbitrationState arb;
  double last_nc_accel = 0.0;
  bool self_reported = false;
  bool takeover_seen = false;
  double stationary_since = -1.0;  // negative while moving
  DrivingMode mode = DrivingMode::Nominal;

  WorldState world = cfg.initial_world();
  const std::int64_t last_step = static_cast<std::int64_t>(std::lround(cfg.duration / kStep));

  for (;;) {
    StepRecord rec;
    rec.step = world.step;
    rec.t = world.t;
    rec.ego = world.ego;
    for (const auto& a : world.actors) rec.actors.push_back(a.state);
    rec.active_faults = active_faults(cfg.faults, world.t);
    const detail::FaultBinding bound = detail::bind_faults(cfg.faults, rec.active_faults, runtime);
    rec.platform = report_status(bound.platform, cfg.platform);
    rec.true_risk = estimate_risk(ground_truth_state(world), cfg.risk.limited_to(rec.platform.brake_capability));
    rec.collision = detect_collision(world);

    if (mode != DrivingMode::Nominal && is_stationary(world.ego)) {
      if (stationary_since < 0.0) stationary_since = world.t;
    } else {
      stationary_since = -1.0;
    }
    rec.mrc = stationary_since >= 0.0 && world.t - stationary_since >= kMrcDwell - kTimeEps;

    if (rec.collision || rec.mrc || world.step >= last_step) {
      rec.terminal = true;
      trace.records.push_back(std::move(rec));
      break;
    }

    for (std::size_t i : rec.active_faults) {
      FaultRuntime& rt = runtime[i];
      if (rt.activated) continue;
      rt.activated = true;
      rt.stuck_accel = last_nc_accel;
      rt.phantom_anchor_s = world.ego.s + world.ego.length + cfg.faults[i].params.rel_s;
      rt.phantom_lane = world.ego.lane;
    }

    // Nominal channel (flows I, II, III, V).
    std::optional<NcOutput> nc_out;
    std::optional<Setpoint> nc_sp;
    if (!bound.nc_silent) {
      nc_out = nc.step(world, rec.platform, bound.nc, arb.directive_issued);
      Setpoint sp = nc_out->setpoint;
      last_nc_accel = sp.accel_request;
      for (const FaultSpec* f : bound.setpoint) {
        const std::size_t idx = static_cast<std::size_t>(f - cfg.faults.data());
        sp = apply_setpoint_fault(sp, *f, runtime[idx], corruption_noise, world.step);
      }
      nc_sp = sp;
      NcRecord r;
      r.status = nc_out->status;
      r.behavior = nc_out->behavior;
      r.risk = nc_out->risk;
      r.object_count = nc_out->objects.size();
      r.intent = nc_out->trajectory.intent;
      r.planned_accel = nc_out->trajectory.samples.empty() ? 0.0 : nc_out->trajectory.samples.front().a;
      r.setpoint = sp;
      r.latched = nc.safety_maneuver_latched();
      rec.nc = r;
      if (!self_reported && !r.status.self_diagnosed_errors.empty()) {
        self_reported = true;
        rec.nc_self_report_first = true;
      }
    }

    // Supervisor channel(s) (flows VI, VIII, IX).
    NcFlows flows;
    if (nc_out) {
      flows.status = &nc_out->status;
      flows.trajectory = &nc_out->trajectory;
      flows.setpoint = &*nc_sp;
    }
    std::optional<ScOutput> primary_out;
    std::optional<ScOutput> standby_out;
    if (!opt.no_supervisor) {
      if (!bound.sc_primary_silent) primary_out = sc_primary.step(world, rec.platform, flows, bound.sc_primary);
      if (duplicated && !bound.sc_standby_silent)
        standby_out = sc_standby.step(world, rec.platform, flows, bound.sc_standby);
    }
    const ScOutput* effective = primary_out ? &*primary_out : (standby_out ? &*standby_out : nullptr);
    if (effective) rec.sc = detail::to_record(*effective, primary_out ? "primary" : "standby");

    SwitchRecord sw;
    const bool watchdog_active = !opt.no_supervisor && !duplicated;
    if (watchdog_active) {
      const bool before = arb.directive_issued;
      sw.watchdog_directive = watchdog_sc(primary_out ? &primary_out->live : nullptr, arb);
      rec.directive_first = sw.watchdog_directive && !before;
    }
    const ArbitrationResult ar =
        arbitrate(nc_sp ? &*nc_sp : nullptr, effective ? &effective->plan : nullptr,
                  effective ? &effective->decision : nullptr, arb, world.t, !opt.no_supervisor);
    if (arb.source == SetpointSource::Supervisor && !takeover_seen) {
      takeover_seen = true;
      rec.takeover_first = true;
      trace.takeover = effective ? effective->decision : TakeoverDecision{true, TakeoverCause::None, world.t};
    }
    sw.setpoint = ar.setpoint;
    sw.held = ar.held;
    sw.fallback = ar.fallback;
    sw.actuation = execute_setpoint(ar.setpoint, rec.platform, cfg.road);
    rec.sw = sw;

    mode = mode_after(rec);
    const Actuation act = sw.actuation;
    trace.records.push_back(std::move(rec));
    world = step_world(world, act);
  }

  const StepRecord& last = trace.records.back();
  if (last.collision) trace.outcome = Outcome::Crash;
  else if (arb.architectural_failure) trace.outcome = Outcome::ArchitecturalFailure;
  else if (last.mrc) trace.outcome = Outcome::MinimalRiskCondition;
  else trace.outcome = Outcome::MissionComplete;
  if (last.mrc) trace.mrc_grade = grade_mrc(last.ego, cfg.road);
  return trace;
}

// ---------------------------------------------------------------------------
// Classification

struct Transition {
  double t = 0.0;
  VehicleLevelState from;
  VehicleLevelState to;
};

struct Classification {
  std::vector<std::optional<VehicleLevelState>> labels;
  std::vector<Transition> transitions;
  std::vector<std::int64_t> gaps;         // steps no rule could label
  std::vector<Transition> recoveries;     // UndetectedHazardousEvent back to nominal
};

/// Labels every record from ground truth and fault activity. Each step is
/// judged on the world at t and the driving mode in effect during the
/// preceding interval; detection events are taken from the same step.
inline Classification classify_trace(Trace& trace) {
  Classification c;
  DrivingMode mode = DrivingMode::Nominal;
  bool detected = false;
  for (auto& r : trace.records) {
    bool nc_fault = false;
    for (std::size_t i : r.active_faults) nc_fault = nc_fault || is_nc_fault(trace.faults[i].kind);
    const bool event = r.nc_self_report_first || r.takeover_first || r.directive_first;
    r.latent_fault = nc_fault && !detected && !event;

    std::optional<VehicleLevelState> label;
    if (r.collision) label = VehicleLevelState::Crash;
    else if (r.mrc) label = mode != DrivingMode::Nominal ? std::optional(VehicleLevelState::MinimalRiskCondition) : std::nullopt;
    else if (!r.sw && !r.terminal) label = std::nullopt; // decisions missing mid-run
    else if (event && mode != DrivingMode::ScSafetyManeuver) label = VehicleLevelState::CriticalErrorDetected;
    else if (mode == DrivingMode::ScSafetyManeuver) label = VehicleLevelState::SafetyManeuverSc;
    else if (mode == DrivingMode::NcSafetyManeuver) label = VehicleLevelState::SafetyManeuverNc;
    else if (r.true_risk >= trace.risk.r_max)
      label = r.latent_fault ? VehicleLevelState::UndetectedHazardousEvent : VehicleLevelState::HazardousEventOperational;
    else label = VehicleLevelState::NominalOperation;

    r.label = label;
    c.labels.push_back(label);
    if (!label) c.gaps.push_back(r.step);
    if (event) detected = true;
    if (r.sw) mode = mode_after(r);
  }

  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto& a = c.labels[i - 1];
    const auto& b = c.labels[i];
    if (!a || !b || *a == *b) continue;
    const Transition tr{trace.records[i].t, *a, *b};
    c.transitions.push_back(tr);
    if (*a == VehicleLevelState::UndetectedHazardousEvent && *b == VehicleLevelState::NominalOperation)
      c.recoveries.push_back(tr);
  }
  return c;
}

/// Successor states allowed after `from` (self-loops included for
/// non-terminal states).
inline std::vector<VehicleLevelState> legal_successors(VehicleLevelState from) {
  using S = VehicleLevelState;
  switch (from) {
    case S::NominalOperation:
      return {S::NominalOperation, S::HazardousEventOperational, S::SafetyManeuverNc, S::CriticalErrorDetected,
              S::UndetectedHazardousEvent};
    case S::HazardousEventOperational:
      return {S::HazardousEventOperational, S::SafetyManeuverNc, S::Crash, S::NominalOperation,
              S::CriticalErrorDetected, S::UndetectedHazardousEvent};
    case S::SafetyManeuverNc:
      return {S::SafetyManeuverNc, S::MinimalRiskCondition, S::CriticalErrorDetected, S::Crash};
    case S::CriticalErrorDetected:
      return {S::SafetyManeuverSc, S::SafetyManeuverNc, S::MinimalRiskCondition};
    case S::SafetyManeuverSc:
      return {S::SafetyManeuverSc, S::MinimalRiskCondition, S::Crash};
    case S::UndetectedHazardousEvent:
      return {S::UndetectedHazardousEvent, S::Crash, S::CriticalErrorDetected, S::NominalOperation,
              S::SafetyManeuverNc, S::HazardousEventOperational};
    case S::MinimalRiskCondition:
    case S::Crash:
      return {};
  }
  return {};
}

inline bool is_legal(VehicleLevelState from, VehicleLevelState to) {
  const auto next = legal_successors(from);
  return std::find(next.begin(), next.end(), to) != next.end();
}

struct LegalityViolation {
  std::size_t index = 0; // position of the second label
  VehicleLevelState from;
  VehicleLevelState to;
};

inline std::vector<LegalityViolation> check_transition_legality(const std::vector<VehicleLevelState>& labels) {
  std::vector<LegalityViolation> out;
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (!is_legal(labels[i - 1], labels[i])) out.push_back({i, labels[i - 1], labels[i]});
  return out;
}

inline std::vector<LegalityViolation> check_transition_legality(const Classification& c) {
  std::vector<VehicleLevelState> labels;
  for (const auto& l : c.labels)
    if (l) labels.push_back(*l);
  return check_transition_legality(labels);
}

/// Labels with consecutive duplicates removed.
inline std::vector<VehicleLevelState> state_sequence(const Classification& c) {
  std::vector<VehicleLevelState> seq;
  for (const auto& l : c.labels)
    if (l && (seq.empty() || seq.back() != *l)) seq.push_back(*l);
  return seq;
}

// ---------------------------------------------------------------------------
// Trace output

namespace detail {

inline const char* lane_cmd_name(LaneCommand c) {
  switch (c) {
    case LaneCommand::Keep: return "Keep";
    case LaneCommand::ChangeLeft: return "ChangeLeft";
    case LaneCommand::ChangeRight: return "ChangeRight";
    case LaneCommand::ToShoulder: return "ToShoulder";
  }
  return "?";
}

inline const char* behavior_name(NcBehavior b) {
  switch (b) {
    case NcBehavior::KeepLane: return "KeepLane";
    case NcBehavior::ChangeLaneLeft: return "ChangeLaneLeft";
    case NcBehavior::ChangeLaneRight: return "ChangeLaneRight";
    case NcBehavior::SafetyManeuver: return "SafetyManeuver";
  }
  return "?";
}

inline const char* intent_name(Intent i) { return i == Intent::SafetyManeuver ? "SafetyManeuver" : "Normal"; }
inline const char* source_name(SetpointSource s) { return s == SetpointSource::Supervisor ? "Supervisor" : "Nominal"; }

inline nlohmann::ordered_json vehicle_json(const VehicleState& v) {
  nlohmann::ordered_json j;
  j["id"] = v.id;
  j["s"] = v.s;
  j["v"] = v.v;
  j["a"] = v.a;
  j["lane"] = v.lane;
  j["target_lane"] = v.lane_change ? nlohmann::ordered_json(v.lane_change->target_lane) : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json setpoint_json(const Setpoint& sp) {
  nlohmann::ordered_json j;
  j["source"] = source_name(sp.source);
  j["accel"] = sp.accel_request;
  j["lane_cmd"] = lane_cmd_name(sp.lane_cmd);
  j["intent"] = intent_name(sp.intent);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json record_json(const Trace& trace, const StepRecord& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = kTraceSchemaVersion;
  j["seed"] = trace.seed;
  j["step"] = r.step;
  j["t"] = r.t;
  j["ego"] = detail::vehicle_json(r.ego);
  j["actors"] = ordered_json::array();
  for (const auto& a : r.actors) j["actors"].push_back(detail::vehicle_json(a));
  j["faults"] = ordered_json::array();
  for (std::size_t i : r.active_faults) j["faults"].push_back(fault_code(trace.faults[i]));
  j["platform"] = {{"brake_capability", r.platform.brake_capability},
                   {"lane_change_available", r.platform.lane_change_available},
                   {"degraded", r.platform.degraded}};
  j["true_risk"] = r.true_risk;

  if (r.nc) {
    ordered_json n;
    n["heartbeat"] = r.nc->status.heartbeat;
    n["errors"] = r.nc->status.self_diagnosed_errors;
    n["behavior"] = detail::behavior_name(r.nc->behavior);
    n["risk"] = r.nc->risk;
    n["objects"] = r.nc->object_count;
    n["intent"] = detail::intent_name(r.nc->intent);
    n["planned_accel"] = r.nc->planned_accel;
    n["setpoint"] = detail::setpoint_json(r.nc->setpoint);
    j["nc"] = std::move(n);
  } else {
    j["nc"] = nullptr;
  }

  if (r.sc) {
    ordered_json s;
    s["instance"] = r.sc->instance;
    s["live"] = r.sc->live.counter;
    s["risk"] = r.sc->esc.risk_sc;
    s["outside_esc"] = r.sc->esc.outside_esc;
    s["grace"] = r.sc->esc.grace_elapsed;
    s["isc"] = ordered_json::array();
    for (const auto& v : r.sc->isc) s["isc"].push_back(to_string(v.kind));
    s["take_over"] = r.sc->decision.take_over;
    s["cause"] = to_string(r.sc->decision.cause);
    s["maneuver"] = to_string(r.sc->plan.maneuver);
    j["sc"] = std::move(s);
  } else {
    j["sc"] = nullptr;
  }

  if (r.sw) {
    ordered_json w = detail::setpoint_json(r.sw->setpoint);
    w["applied_accel"] = r.sw->actuation.accel;
    w["held"] = r.sw->held;
    w["fallback"] = r.sw->fallback;
    w["watchdog_directive"] = r.sw->watchdog_directive;
    j["switch"] = std::move(w);
  } else {
    j["switch"] = nullptr;
  }

  j["collision"] = r.collision ? ordered_json{{"first", r.collision->first}, {"second", r.collision->second}}
                               : ordered_json(nullptr);
  j["state"] = r.label ? ordered_json(to_string(*r.label)) : ordered_json(nullptr);
  j["latent_fault"] = r.latent_fault;
  return j;
}

inline void write_trace_jsonl(std::ostream& os, const Trace& trace) {
  for (const auto& r : trace.records) os << record_json(trace, r).dump() << '\n';
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "seed,step,t,ego_s,ego_v,ego_a,ego_lane,true_risk,faults,nc_present,nc_heartbeat,nc_intent,nc_accel,"
        "sc_instance,sc_risk,sc_grace,sc_isc,take_over,cause,maneuver,source,accel,applied_accel,state\n";
  for (const auto& r : trace.records) {
    std::string faults;
    for (std::size_t i : r.active_faults) faults += (faults.empty() ? "" : "|") + fault_code(trace.faults[i]);
    std::string isc;
    if (r.sc)
      for (const auto& v : r.sc->isc) isc += (isc.empty() ? "" : "|") + std::string(to_string(v.kind));
    os << trace.seed << ',' << r.step << ',' << format_double(r.t) << ',' << format_double(r.ego.s) << ',' << format_double(r.ego.v) << ','
       << format_double(r.ego.a) << ',' << r.ego.lane << ',' << format_double(r.true_risk) << ',' << faults << ','
       << (r.nc ? 1 : 0) << ',' << (r.nc ? std::to_string(r.nc->status.heartbeat) : "") << ','
       << (r.nc ? detail::intent_name(r.nc->intent) : "") << ','
       << (r.nc ? format_double(r.nc->setpoint.accel_request) : "") << ',' << (r.sc ? r.sc->instance : "") << ','
       << (r.sc ? format_double(r.sc->esc.risk_sc) : "") << ',' << (r.sc ? format_double(r.sc->esc.grace_elapsed) : "")
       << ',' << isc << ',' << (r.sc && r.sc->decision.take_over ? 1 : 0) << ','
       << (r.sc ? std::string(to_string(r.sc->decision.cause)) : "") << ','
       << (r.sc ? std::string(to_string(r.sc->plan.maneuver)) : "") << ','
       << (r.sw ? detail::source_name(r.sw->setpoint.source) : "") << ','
       << (r.sw ? format_double(r.sw->setpoint.accel_request) : "") << ','
       << (r.sw ? format_double(r.sw->actuation.accel) : "") << ','
       << (r.label ? std::string(to_string(*r.label)) : "") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Metrics and campaigns

struct RunSummary {
  std::size_t run_id = 0;
  std::string scenario;
  std::optional<FaultSpec> fault;
  Outcome outcome = Outcome::MissionComplete;
  MrcGrade mrc_grade = MrcGrade::None;
  std::optional<TakeoverDecision> takeover;
  std::optional<double> latency;       // takeover decision time minus fault activation
  bool false_takeover = false;
  double max_true_risk_before_takeover = 0.0;
  bool hazard_while_latent = false;    // true risk >= R_max while an Nc fault was latent
  std::vector<VehicleLevelState> sequence;
  std::size_t rule_gaps = 0;
  std::size_t legality_violations = 0;
};

inline RunSummary summarize(const Trace& trace, const Classification& c, std::size_t run_id = 0) {
  RunSummary s;
  s.run_id = run_id;
  s.scenario = trace.scenario;
  if (!trace.faults.empty()) s.fault = trace.faults.front();
  s.outcome = trace.outcome;
  s.mrc_grade = trace.mrc_grade;
  s.takeover = trace.takeover;
  if (s.takeover && s.fault) s.latency = s.takeover->t - s.fault->t_on;

  bool risk_before = false;
  for (const auto& r : trace.records) {
    if (s.takeover && r.t > s.takeover->t + kTimeEps) break;
    if (r.true_risk >= trace.risk.r_max) {
      risk_before = true;
      if (r.latent_fault) s.hazard_while_latent = true;
    }
    s.max_true_risk_before_takeover = std::max(s.max_true_risk_before_takeover, r.true_risk);
  }
  s.false_takeover = s.takeover && trace.faults.empty() && !risk_before;
  s.sequence = state_sequence(c);
  s.rule_gaps = c.gaps.size();
  s.legality_violations = check_transition_legality(c).size();
  return s;
}

struct Metrics {
  std::size_t runs = 0;
  std::size_t crash_count = 0;
  std::size_t mrc_count = 0;
  std::size_t mission_complete_count = 0;
  std::size_t architectural_failure_count = 0;
  std::size_t false_takeover_count = 0;
  std::size_t latency_count = 0;
  double latency_sum = 0.0;
  double max_latency = 0.0;

  double mean_latency() const { return latency_count ? latency_sum / static_cast<double>(latency_count) : 0.0; }
  double availability() const { return runs ? static_cast<double>(mission_complete_count) / static_cast<double>(runs) : 0.0; }

  void add(const RunSummary& s) {
    ++runs;
    switch (s.outcome) {
      case Outcome::Crash: ++crash_count; break;
      case Outcome::MinimalRiskCondition: ++mrc_count; break;
      case Outcome::MissionComplete: ++mission_complete_count; break;
      case Outcome::ArchitecturalFailure: ++architectural_failure_count; break;
    }
    if (s.false_takeover) ++false_takeover_count;
    if (s.latency) {
      ++latency_count;
      latency_sum += *s.latency;
      max_latency = std::max(max_latency, *s.latency);
    }
  }

  void merge(const Metrics& o) {
    runs += o.runs;
    crash_count += o.crash_count;
    mrc_count += o.mrc_count;
    mission_complete_count += o.mission_complete_count;
    architectural_failure_count += o.architectural_failure_count;
    false_takeover_count += o.false_takeover_count;
    latency_count += o.latency_count;
    latency_sum += o.latency_sum;
    max_latency = std::max(max_latency, o.max_latency);
  }
};

inline Metrics compute_metrics(const std::vector<RunSummary>& runs) {
  Metrics m;
  for (const auto& r : runs) m.add(r);
  return m;
}

struct CampaignResult {
  std::vector<RunSummary> runs;
  Metrics metrics;
};

class CampaignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One single-fault campaign over a base scenario. The base scenario's own
/// faults are replaced by each campaign entry. Results are stored by run
/// index, so the table does not depend on the number of workers.
inline CampaignResult run_campaign(const ScenarioConfig& base, const FaultCatalog& catalog, unsigned parallelism,
                                   const RunOptions& opt = {}, std::size_t first_run_id = 0) {
  const auto specs = single_fault_campaign(catalog);
  std::vector<RunSummary> results(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<std::string> error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      ScenarioConfig cfg = base;
      cfg.faults.clear();
      if (specs[i]) cfg.faults.push_back(*specs[i]);
      try {
        Trace trace = run_scenario(cfg, opt);
        const Classification c = classify_trace(trace);
        results[i] = summarize(trace, c, first_run_id + i);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        const std::string what = specs[i] ? fault_code(*specs[i]) + " t_on=" + format_double(specs[i]->t_on) : "control";
        if (!error) error = "campaign run " + std::to_string(first_run_id + i) + " (" + base.name + ", " + what + ") failed: " + e.what();
      }
    }
  };

  const unsigned n = std::max(1u, parallelism);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) throw CampaignError(*error);

  CampaignResult out;
  out.runs = std::move(results);
  out.metrics = compute_metrics(out.runs);
  return out;
}

inline CampaignResult run_campaign(const ScenarioConfig& base, unsigned parallelism, const RunOptions& opt = {},
                                   std::size_t first_run_id = 0) {
  return run_campaign(base, default_catalog(base.actor_ids()), parallelism, opt, first_run_id);
}

inline void write_outcomes_header(std::ostream& os) {
  os << "run_id,fault_kind,target,t_on,detectability,outcome,takeover_cause,latency_s\n";
}

inline void write_outcome_row(std::ostream& os, const RunSummary& s) {
  os << s.run_id << ',';
  if (s.fault)
    os << to_string(s.fault->kind) << ',' << s.fault->target << ',' << format_double(s.fault->t_on) << ','
       << format_double(s.fault->detectability);
  else
    os << "none,,,";
  os << ',' << to_string(s.outcome) << ',' << (s.takeover ? std::string(to_string(s.takeover->cause)) : "") << ','
     << (s.latency ? format_double(*s.latency) : "") << '\n';
}

inline void write_summary_header(std::ostream& os) {
  os << "scenario,supervisor,runs,crash_count,mrc_count,mission_complete_count,architectural_failure_count,"
        "false_takeover_count,mean_latency_s,max_latency_s,availability\n";
}

inline void write_summary_row(std::ostream& os, const std::string& scenario, const std::string& supervisor,
                              const Metrics& m) {
  os << scenario << ',' << supervisor << ',' << m.runs << ',' << m.crash_count << ',' << m.mrc_count << ','
     << m.mission_complete_count << ',' << m.architectural_failure_count << ',' << m.false_takeover_count << ','
     << format_double(m.mean_latency()) << ',' << format_double(m.max_latency) << ',' << format_double(m.availability())
     << '\n';
}

}  // namespace adi
