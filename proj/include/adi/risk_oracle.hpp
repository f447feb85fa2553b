#pragma once

// Brute-force reference for estimate_risk(): sweeps a grid of constant
// decelerations and forward-simulates ego and constant-velocity obstacles
// at 1 ms resolution. Shares no arithmetic with the closed form.

#include <cmath>
#include <cstddef>
#include <vector>

#include "adi/risk.hpp"

namespace adi {

struct OracleConfig {
  int candidates = 200;
  double dt = 1e-3;
};

namespace detail {

/// True when ego braking at `decel` keeps the gap to `obstacle` open over
/// the whole horizon.
inline bool survives(const MonitoredState& m, const ObservedObject& obstacle, double decel,
                     double horizon, double dt) {
  double ego_front = m.ego_s + m.ego_length;
  double ego_v = m.ego_v;
  double obs_rear = obstacle.s;
  const double obs_v = std::max(0.0, obstacle.v);
  if (obs_rear - ego_front <= 0.0) return false;
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  for (long k = 0; k < steps; ++k) {
    const double v_next = std::max(0.0, ego_v - decel * dt);
    ego_front += 0.5 * (ego_v + v_next) * dt;
    if (ego_v > 0.0 && v_next == 0.0 && decel > 0.0) {
      // exact partial step when the ego comes to rest
      ego_front -= 0.5 * (ego_v + v_next) * dt;
      ego_front += 0.5 * ego_v * (ego_v / decel);
    }
    ego_v = v_next;
    obs_rear += obs_v * dt;
    if (obs_rear - ego_front <= 0.0) return false;
  }
  return true;
}

}  // namespace detail

inline double risk_oracle(const MonitoredState& m, const RiskParams& p, const OracleConfig& cfg = {}) {
  double worst = 0.0;
  for (const auto& o : m.objects) {
    if (!is_relevant(m, o)) continue;
    double risk = kUnavoidableRisk;
    for (int i = 0; i < cfg.candidates; ++i) {
      const double decel = p.a_avoid_max * static_cast<double>(i) / (cfg.candidates - 1);
      if (detail::survives(m, o, decel, p.horizon, cfg.dt)) {
        risk = decel / p.a_avoid_max;
        break;
      }
    }
    worst = std::max(worst, risk);
  }
  return worst;
}

struct OracleGridPoint {
  double ego_v = 0.0;
  double gap = 0.0;
  double obstacle_v = 0.0;
  double estimate = 0.0;
  double oracle = 0.0;
};

/// Fixed evaluation grid: ego speed 5..35 m/s, gap 5..140 m, obstacle speed
/// 0..30 m/s, `per_axis` points per axis (10 -> 1000 points).
inline std::vector<OracleGridPoint> oracle_grid(const RiskParams& p, int per_axis = 10) {
  auto lin = [per_axis](double lo, double hi, int i) {
    return per_axis == 1 ? lo : lo + (hi - lo) * i / (per_axis - 1);
  };
  std::vector<OracleGridPoint> out;
  out.reserve(static_cast<std::size_t>(per_axis) * per_axis * per_axis);
  for (int a = 0; a < per_axis; ++a)
    for (int b = 0; b < per_axis; ++b)
      for (int c = 0; c < per_axis; ++c) {
        OracleGridPoint pt;
        pt.ego_v = lin(5.0, 35.0, a);
        pt.gap = lin(5.0, 140.0, b);
        pt.obstacle_v = lin(0.0, 30.0, c);
        MonitoredState m;
        m.ego_v = pt.ego_v;
        m.objects.push_back({1, m.ego_s + m.ego_length + pt.gap, pt.obstacle_v, 0, std::nullopt, 5.0, 0.0});
        pt.estimate = estimate_risk(m, p);
        pt.oracle = risk_oracle(m, p);
        out.push_back(pt);
      }
  return out;
}

}  // namespace adi
