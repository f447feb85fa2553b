#pragma once

#include <cstdint>
#include <vector>

#include "adi/noise.hpp"
#include "adi/risk.hpp"
#include "adi/sim_core.hpp"

namespace adi {

/// Range-limited object sensor with additive Gaussian noise.
struct SensorModel {
  double range_ahead = 150.0;
  double range_behind = 50.0;
  double sigma_s = 0.2;
  double sigma_v = 0.1;
};

inline ObservedObject observe_vehicle(const VehicleState& v, double t) {
  ObservedObject o;
  o.id = v.id;
  o.s = v.s;
  o.v = v.v;
  o.lane = v.lane;
  if (v.lane_change) o.target_lane = v.lane_change->target_lane;
  o.length = v.length;
  o.observed_t = t;
  return o;
}

/// Actors within range of the ego, in id order. Noise draws are keyed by
/// (step, actor id) so the result is independent of actor list order.
inline std::vector<ObservedObject> sense_objects(const WorldState& world, const SensorModel& model,
                                                 const NoiseSource& noise) {
  std::vector<ObservedObject> out;
  for (const auto& actor : world.actors) {
    const double rel = actor.state.s - world.ego.s;
    if (rel > model.range_ahead || rel < -model.range_behind) continue;
    ObservedObject o = observe_vehicle(actor.state, world.t);
    if (model.sigma_s > 0.0) o.s += model.sigma_s * noise.normal(world.step, actor.state.id, 0);
    if (model.sigma_v > 0.0) o.v = std::max(0.0, o.v + model.sigma_v * noise.normal(world.step, actor.state.id, 1));
    out.push_back(o);
  }
  return out;
}

/// Ego localization (noise-free) packaged as a monitored state.
inline MonitoredState ego_monitored_state(const VehicleState& ego) {
  MonitoredState m;
  m.ego_s = ego.s;
  m.ego_v = ego.v;
  m.ego_lane = ego.lane;
  if (ego.lane_change) m.ego_target_lane = ego.lane_change->target_lane;
  m.ego_length = ego.length;
  return m;
}

/// Omniscient view used by the classifier: every actor, no noise.
inline MonitoredState ground_truth_state(const WorldState& world) {
  MonitoredState m = ego_monitored_state(world.ego);
  for (const auto& a : world.actors) m.objects.push_back(observe_vehicle(a.state, world.t));
  return m;
}

}  // namespace adi
