#pragma once

// Deterministic discrete-time world kernel: straight multi-lane road,
// longitudinal point-mass kinematics with timed lane changes, open-loop
// scripted traffic actors and collision detection.
//
// Longitudinal position `s` is the REAR bumper of a vehicle; a vehicle
// occupies [s, s + length].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace adi {

inline constexpr double kStep = 0.1;           // scheduler period [s]
inline constexpr double kLaneChangeTime = 3.0; // T_lc [s]
inline constexpr double kMaxBrake = 8.0;       // a_phys_max, braking [m/s^2]
inline constexpr double kMaxAccel = 3.0;       // propulsion ceiling [m/s^2]
inline constexpr double kMaxSpeed = 40.0;      // v_max [m/s]
inline constexpr double kActorSpeedGain = 0.5; // k_v for scripted Cruise [1/s]
inline constexpr double kTimeEps = 1e-9;       // absorbs step_time() rounding

using VehicleId = std::int64_t;
inline constexpr VehicleId kEgoId = 0;

/// Integer step index -> time. All scheduling is done on step indices so
/// that t advances by exactly one period per step without drift.
constexpr double step_time(std::int64_t step) { return static_cast<double>(step) * kStep; }

struct RoadConfig {
  int lane_count = 2;
  bool has_shoulder = false;
  double segment_length = 5000.0;

  /// Shoulder lane index (only meaningful when has_shoulder).
  int shoulder_lane() const { return lane_count; }
  bool is_lane(int lane) const { return lane >= 0 && lane < lane_count; }
  bool is_drivable(int lane, bool safety_maneuver) const {
    return is_lane(lane) || (safety_maneuver && has_shoulder && lane == shoulder_lane());
  }
};

struct LaneChange {
  int target_lane = 0;
  double progress = 0.0; // fraction in [0, 1]
};

struct VehicleState {
  VehicleId id = kEgoId;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  int lane = 0;
  std::optional<LaneChange> lane_change;
  double length = 5.0;

  bool occupies(int l) const {
    return lane == l || (lane_change && lane_change->target_lane == l);
  }
  bool shares_lane_with(const VehicleState& other) const {
    if (occupies(other.lane)) return true;
    return other.lane_change && occupies(other.lane_change->target_lane);
  }
};

enum class LaneCommand : std::uint8_t { Keep, ChangeLeft, ChangeRight, ToShoulder };

struct Actuation {
  double accel = 0.0;
  LaneCommand lane_cmd = LaneCommand::Keep;
};

// Scripted actor behaviours. Lanes are numbered from the left (0) towards
// the shoulder, so ChangeRight increases the lane index.
struct Cruise { double v_target = 0.0; };
struct Brake { double a_brake = -kMaxBrake; };
struct CutIn { int target_lane = 0; };
struct Stop {};
using Behavior = std::variant<Cruise, Brake, CutIn, Stop>;

struct ScriptPhase {
  double start_t = 0.0;
  Behavior behavior;
};

struct ActorScript {
  std::vector<ScriptPhase> phases; // sorted by start_t

  /// Active phase at time t, or nullptr when t precedes the first phase.
  const ScriptPhase* phase_at(double t) const {
    const ScriptPhase* active = nullptr;
    for (const auto& p : phases) {
      if (p.start_t <= t + kTimeEps) active = &p;
      else break;
    }
    return active;
  }
};

struct Actor {
  VehicleState state;
  ActorScript script;
};

struct WorldState {
  std::int64_t step = 0;
  double t = 0.0;
  VehicleState ego;
  std::vector<Actor> actors; // sorted by id
  RoadConfig road;
};

struct CollisionRecord {
  VehicleId first = 0;
  VehicleId second = 0;
  double t = 0.0;
};

/// Exact constant-acceleration integration over dt with v clamped to
/// [0, kMaxSpeed]. Shared by the world and by every planner that predicts
/// ego motion, so predictions and the executed motion agree bit-for-bit.
struct LongitudinalState {
  double s = 0.0;
  double v = 0.0;
};

inline LongitudinalState integrate(LongitudinalState x, double a, double dt) {
  const double v_end = x.v + a * dt;
  if (v_end < 0.0) {
    // stops inside the interval
    const double t_stop = a < 0.0 ? x.v / -a : 0.0;
    return {x.s + 0.5 * x.v * t_stop, 0.0};
  }
  if (v_end > kMaxSpeed && a > 0.0) {
    const double t_cap = std::max(0.0, (kMaxSpeed - x.v) / a);
    const double s_cap = x.s + x.v * t_cap + 0.5 * a * t_cap * t_cap;
    return {s_cap + kMaxSpeed * (dt - t_cap), kMaxSpeed};
  }
  return {x.s + x.v * dt + 0.5 * a * dt * dt, v_end};
}

/// Target lane of a lane command, or nullopt when the command is Keep or
/// leads off the drivable road.
inline std::optional<int> lane_command_target(const VehicleState& v, LaneCommand cmd,
                                              const RoadConfig& road) {
  switch (cmd) {
    case LaneCommand::Keep:
      return std::nullopt;
    case LaneCommand::ChangeLeft:
      if (road.is_lane(v.lane - 1)) return v.lane - 1;
      return std::nullopt;
    case LaneCommand::ChangeRight:
      if (road.is_lane(v.lane + 1)) return v.lane + 1;
      return std::nullopt;
    case LaneCommand::ToShoulder:
      if (!road.has_shoulder || v.lane == road.shoulder_lane()) return std::nullopt;
      return v.lane + 1; // one lane at a time towards the shoulder
  }
  return std::nullopt;
}

/// Advances one vehicle by dt. `act` must already be clamped by the platform.
inline VehicleState step_vehicle(const VehicleState& state, const Actuation& act,
                                 const RoadConfig& road, double dt = kStep) {
  VehicleState next = state;
  const auto lon = integrate({state.s, state.v}, act.accel, dt);
  next.s = lon.s;
  next.v = lon.v;
  next.a = act.accel;

  if (next.lane_change) {
    next.lane_change->progress += dt / kLaneChangeTime;
    if (next.lane_change->progress >= 1.0 - 1e-9) {
      next.lane = next.lane_change->target_lane;
      next.lane_change.reset();
    }
  } else if (auto target = lane_command_target(state, act.lane_cmd, road)) {
    next.lane_change = LaneChange{*target, dt / kLaneChangeTime};
  }
  return next;
}

/// Scripted actuation for an actor at time t.
inline Actuation actor_behavior(const ActorScript& script, double t, const VehicleState& self) {
  const ScriptPhase* phase = script.phase_at(t);
  if (phase == nullptr) return {};
  return std::visit(
      [&](const auto& b) -> Actuation {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Cruise>) {
          const double a = std::clamp(kActorSpeedGain * (b.v_target - self.v), -kMaxBrake, kMaxAccel);
          return {a, LaneCommand::Keep};
        } else if constexpr (std::is_same_v<B, Brake>) {
          return {self.v > 0.0 ? std::max(b.a_brake, -kMaxBrake) : 0.0, LaneCommand::Keep};
        } else if constexpr (std::is_same_v<B, CutIn>) {
          LaneCommand cmd = LaneCommand::Keep;
          const int lane = self.lane_change ? self.lane_change->target_lane : self.lane;
          if (b.target_lane < lane) cmd = LaneCommand::ChangeLeft;
          else if (b.target_lane > lane) cmd = LaneCommand::ChangeRight;
          return {0.0, cmd};
        } else {
          return {self.v > 0.0 ? -kMaxBrake : 0.0, LaneCommand::Keep};
        }
      },
      phase->behavior);
}

/// Advances the world one period. The ego actuation is already clamped.
inline WorldState step_world(const WorldState& world, const Actuation& ego_act) {
  WorldState next = world;
  next.ego = step_vehicle(world.ego, ego_act, world.road);
  for (auto& actor : next.actors) {
    const Actuation act = actor_behavior(actor.script, world.t, actor.state);
    actor.state = step_vehicle(actor.state, act, world.road);
  }
  next.step = world.step + 1;
  next.t = step_time(next.step);
  return next;
}

/// Front-to-rear gap between two vehicles (negative when overlapping).
inline double longitudinal_gap(const VehicleState& a, const VehicleState& b) {
  const VehicleState& rear = a.s <= b.s ? a : b;
  const VehicleState& front = a.s <= b.s ? b : a;
  return front.s - rear.s - rear.length;
}

inline std::optional<CollisionRecord> detect_collision(const WorldState& world) {
  std::vector<const VehicleState*> all;
  all.reserve(world.actors.size() + 1);
  all.push_back(&world.ego);
  for (const auto& a : world.actors) all.push_back(&a.state);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i]->shares_lane_with(*all[j]) && longitudinal_gap(*all[i], *all[j]) <= 0.0)
        return CollisionRecord{all[i]->id, all[j]->id, world.t};
    }
  }
  return std::nullopt;
}

}  // namespace adi
