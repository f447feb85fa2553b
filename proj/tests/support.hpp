#pragma once

#include <cmath>
#include <string>

#include "adi/adi.hpp"

namespace adi::test {

inline std::string scenario_path(const std::string& name) { return std::string(ADI_SCENARIO_DIR) + "/" + name + ".json"; }

inline ScenarioConfig scenario(const std::string& name) { return load_scenario(scenario_path(name)); }

inline SensorModel noiseless(SensorModel m) {
  m.sigma_s = 0.0;
  m.sigma_v = 0.0;
  return m;
}

inline Actor make_actor(VehicleId id, double s, double v, int lane, ActorScript script = {}) {
  Actor a;
  a.state.id = id;
  a.state.s = s;
  a.state.v = v;
  a.state.lane = lane;
  if (script.phases.empty()) script.phases.push_back({0.0, Cruise{v}});
  a.script = std::move(script);
  return a;
}

/// Ego at s = 0 plus one object `gap` ahead (front-to-rear) in the ego lane.
inline MonitoredState single_object(double ego_v, double gap, double obj_v, int lane = 0) {
  MonitoredState m;
  m.ego_v = ego_v;
  m.ego_lane = lane;
  ObservedObject o;
  o.id = 1;
  o.s = m.ego_s + m.ego_length + gap;
  o.v = obj_v;
  o.lane = lane;
  m.objects.push_back(o);
  return m;
}

/// Scene whose required deceleration is `risk * a_avoid` in the stopping
/// regime: closing speed c, gap c^2 / (2 a).
inline MonitoredState scene_with_risk(double risk, const RiskParams& p, double ego_v = 20.0, double closing = 5.0) {
  const double a = risk * p.a_avoid_max;
  return single_object(ego_v, closing * closing / (2.0 * a), ego_v - closing);
}

/// Independent check of the minimal non-colliding deceleration: bisection
/// over forward simulation at 1 ms.
inline double min_safe_decel(double v, double gap, double obj_v, double horizon, double hi = 50.0) {
  auto safe = [&](double d) {
    double g = gap, ve = v;
    const double dt = 1e-3;
    for (int k = 0; k < static_cast<int>(std::lround(horizon / dt)); ++k) {
      const double vn = std::max(0.0, ve - d * dt);
      const double moved = (ve > 0.0 && vn == 0.0 && d > 0.0) ? ve * ve / (2.0 * d) : 0.5 * (ve + vn) * dt;
      g += obj_v * dt - moved;
      ve = vn;
      if (g <= 0.0) return false;
    }
    return true;
  };
  if (safe(0.0)) return 0.0;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (safe(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline std::int64_t step_of(double t) { return std::llround(t / kStep); }

}  // namespace adi::test
