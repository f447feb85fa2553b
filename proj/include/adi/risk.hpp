#pragma once

// Runtime risk estimate over the monitored states and the external safety
// constraint (ESC) membership test built on it.
//
// Risk is the constant deceleration the ego needs so that no obstacle in an
// occupied lane is reached within the horizon (obstacles predicted at
// constant velocity), normalized by the assumed avoidance braking authority.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "adi/sim_core.hpp"

namespace adi {

/// Encodes "collision unavoidable within the horizon".
inline constexpr double kUnavoidableRisk = 10.0;

struct ObservedObject {
  VehicleId id = 0;
  double s = 0.0;
  double v = 0.0;
  int lane = 0;
  std::optional<int> target_lane; // set while the object is changing lanes
  double length = 5.0;
  double observed_t = 0.0;

  bool occupies(int l) const { return lane == l || (target_lane && *target_lane == l); }
};

struct MonitoredState {
  double ego_s = 0.0;
  double ego_v = 0.0;
  int ego_lane = 0;
  std::optional<int> ego_target_lane;
  double ego_length = 5.0;
  std::vector<ObservedObject> objects;

  bool ego_occupies(int l) const { return ego_lane == l || (ego_target_lane && *ego_target_lane == l); }
};

struct RiskParams {
  double horizon = 3.0;     // Δt [s]
  double r_max = 0.8;       // ESC threshold
  double a_avoid_max = 8.0; // braking authority assumed for avoidance [m/s^2]

  /// Same parameters with the braking authority limited to what the platform
  /// currently reports.
  RiskParams limited_to(double brake_capability) const {
    RiskParams p = *this;
    p.a_avoid_max = std::min(a_avoid_max, brake_capability);
    return p;
  }
};

struct Kinematic1D {
  double s = 0.0;
  double v = 0.0;
};

/// Minimal constant deceleration keeping the front gap positive over
/// [0, horizon] against an obstacle moving at constant velocity.
///
/// Returns nullopt when the input is already overlapping (gap <= 0) and
/// +infinity when the requirement exceeds `a_avoid_max`.
inline std::optional<double> required_deceleration(Kinematic1D ego, Kinematic1D obstacle,
                                                   double ego_length, double horizon,
                                                   double a_avoid_max = kMaxBrake) {
  const double gap = obstacle.s - ego.s - ego_length;
  if (gap <= 0.0) return std::nullopt;
  const double closing = ego.v - std::max(0.0, obstacle.v);
  if (closing <= 0.0) return 0.0;
  const double ttc = gap / closing;
  double a_req = 0.0;
  if (ttc >= horizon) {
    a_req = 0.0;
  } else if (2.0 * ttc <= horizon) {
    // closing speed reaches zero inside the horizon: classic stopping bound
    a_req = closing * closing / (2.0 * gap);
  } else {
    // still closing at the horizon: the gap must just stay open at t = horizon
    a_req = 2.0 * (closing * horizon - gap) / (horizon * horizon);
  }
  if (a_req > a_avoid_max) return std::numeric_limits<double>::infinity();
  return a_req;
}

/// True when the object is ahead of the ego in a lane the ego occupies
/// (including either lane of a lane change on either side).
inline bool is_relevant(const MonitoredState& m, const ObservedObject& o) {
  if (o.s < m.ego_s) return false;
  if (m.ego_occupies(o.lane)) return true;
  return o.target_lane && m.ego_occupies(*o.target_lane);
}

inline double risk_of(const MonitoredState& m, const ObservedObject& o, const RiskParams& p) {
  const auto a = required_deceleration({m.ego_s, m.ego_v}, {o.s, o.v}, m.ego_length, p.horizon,
                                       p.a_avoid_max);
  if (!a || std::isinf(*a)) return kUnavoidableRisk;
  return std::min(*a / p.a_avoid_max, kUnavoidableRisk);
}

inline double estimate_risk(const MonitoredState& m, const RiskParams& p) {
  double risk = 0.0;
  for (const auto& o : m.objects)
    if (is_relevant(m, o)) risk = std::max(risk, risk_of(m, o, p));
  return risk;
}

inline bool in_esc(const MonitoredState& m, const RiskParams& p) {
  return estimate_risk(m, p) < p.r_max;
}

}  // namespace adi
