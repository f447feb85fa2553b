#pragma once

// Typed fault catalog, activation windows and corruption of component
// outputs at channel boundaries. Hazards caused by other road users are not
// faults: they are authored as actor scripts.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adi/noise.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"

namespace adi {

enum class FaultKind : std::uint8_t {
  NcSilence,
  NcStuckOutput,
  NcRandomCorruption,
  NcSystematicParam,
  NcFalseNegative,
  NcFalsePositive,
  NcSensorBias,
  ScSilence,
  ScFalsePositivePerception,
  PlatformBrakeDegrade,
};

inline constexpr std::array kAllFaultKinds = {
    FaultKind::NcSilence,          FaultKind::NcStuckOutput,  FaultKind::NcRandomCorruption,
    FaultKind::NcSystematicParam,  FaultKind::NcFalseNegative, FaultKind::NcFalsePositive,
    FaultKind::NcSensorBias,       FaultKind::ScSilence,      FaultKind::ScFalsePositivePerception,
    FaultKind::PlatformBrakeDegrade,
};

inline constexpr std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::NcSilence: return "NcSilence";
    case FaultKind::NcStuckOutput: return "NcStuckOutput";
    case FaultKind::NcRandomCorruption: return "NcRandomCorruption";
    case FaultKind::NcSystematicParam: return "NcSystematicParam";
    case FaultKind::NcFalseNegative: return "NcFalseNegative";
    case FaultKind::NcFalsePositive: return "NcFalsePositive";
    case FaultKind::NcSensorBias: return "NcSensorBias";
    case FaultKind::ScSilence: return "ScSilence";
    case FaultKind::ScFalsePositivePerception: return "ScFalsePositivePerception";
    case FaultKind::PlatformBrakeDegrade: return "PlatformBrakeDegrade";
  }
  return "?";
}

inline std::optional<FaultKind> fault_kind_from_string(std::string_view s) {
  for (auto k : kAllFaultKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Row of the division-of-responsibilities table each kind exercises.
enum class ResponsibilityRow : std::uint8_t {
  FaultsInPlatform,
  RandomHwFaultsNc,
  RandomHwFaultsSc,
  SystematicFaultsNc,
  PerformanceLimitationsNc,
  PerformanceLimitationsSc,
};

inline constexpr ResponsibilityRow responsibility_row(FaultKind k) {
  switch (k) {
    case FaultKind::NcSilence:
    case FaultKind::NcStuckOutput:
    case FaultKind::NcRandomCorruption: return ResponsibilityRow::RandomHwFaultsNc;
    case FaultKind::NcSystematicParam: return ResponsibilityRow::SystematicFaultsNc;
    case FaultKind::NcFalseNegative:
    case FaultKind::NcFalsePositive:
    case FaultKind::NcSensorBias: return ResponsibilityRow::PerformanceLimitationsNc;
    case FaultKind::ScSilence: return ResponsibilityRow::RandomHwFaultsSc;
    case FaultKind::ScFalsePositivePerception: return ResponsibilityRow::PerformanceLimitationsSc;
    case FaultKind::PlatformBrakeDegrade: return ResponsibilityRow::FaultsInPlatform;
  }
  return ResponsibilityRow::FaultsInPlatform;
}

inline constexpr bool is_nc_fault(FaultKind k) {
  switch (k) {
    case FaultKind::NcSilence:
    case FaultKind::NcStuckOutput:
    case FaultKind::NcRandomCorruption:
    case FaultKind::NcSystematicParam:
    case FaultKind::NcFalseNegative:
    case FaultKind::NcFalsePositive:
    case FaultKind::NcSensorBias: return true;
    default: return false;
  }
}
inline constexpr bool is_sc_fault(FaultKind k) {
  return k == FaultKind::ScSilence || k == FaultKind::ScFalsePositivePerception;
}
inline constexpr bool is_nc_perception_fault(FaultKind k) {
  return k == FaultKind::NcFalseNegative || k == FaultKind::NcFalsePositive || k == FaultKind::NcSensorBias;
}
/// Kinds for which a self-detection probability is meaningful. A silent Nc
/// cannot report anything.
inline constexpr bool has_detectability(FaultKind k) { return is_nc_fault(k) && k != FaultKind::NcSilence; }

struct FaultParams {
  double range = 12.0;        // NcRandomCorruption: uniform noise half-width [m/s^2]
  double bias_s = 15.0;       // NcSensorBias: added to observed positions [m]
  double rel_s = 30.0;        // phantoms: distance ahead of the ego front at activation [m]
  double phantom_v = 0.0;     // phantoms: speed [m/s]
  std::string name = "brake_capability"; // NcSystematicParam parameter name
  double value = 16.0;        // NcSystematicParam value
  double factor = 0.5;        // PlatformBrakeDegrade multiplier
};

struct FaultSpec {
  FaultKind kind = FaultKind::NcSilence;
  std::string target;
  double t_on = 0.0;
  std::optional<double> duration; // nullopt = permanent
  FaultParams params;
  double detectability = 0.0;

  bool active_at(double t) const {
    if (t + kTimeEps < t_on) return false;
    return !duration || t + kTimeEps < t_on + *duration;
  }
};

/// The boundary a kind corrupts, used to validate `target`.
inline bool target_valid(FaultKind k, std::string_view target, const std::vector<VehicleId>& actor_ids) {
  switch (k) {
    case FaultKind::NcSilence: return target == "nc";
    case FaultKind::NcStuckOutput:
    case FaultKind::NcRandomCorruption: return target == "nc.setpoint";
    case FaultKind::NcSystematicParam: return target == "nc.planner";
    case FaultKind::NcFalsePositive:
    case FaultKind::NcSensorBias: return target == "nc.perception";
    case FaultKind::NcFalseNegative: {
      if (!target.starts_with("actor:")) return false;
      try {
        const auto id = std::stoll(std::string(target.substr(6)));
        return std::find(actor_ids.begin(), actor_ids.end(), id) != actor_ids.end();
      } catch (...) {
        return false;
      }
    }
    case FaultKind::ScSilence: return target == "sc" || target == "sc.standby";
    case FaultKind::ScFalsePositivePerception: return target == "sc.perception" || target == "sc.standby.perception";
    case FaultKind::PlatformBrakeDegrade: return target == "platform.brake";
  }
  return false;
}

inline std::optional<VehicleId> target_actor(const FaultSpec& f) {
  if (!f.target.starts_with("actor:")) return std::nullopt;
  return std::stoll(f.target.substr(6));
}

/// Indices of the specs active at time t, in declaration order.
inline std::vector<std::size_t> active_faults(const std::vector<FaultSpec>& specs, double t) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].active_at(t)) out.push_back(i);
  return out;
}

inline std::string fault_code(const FaultSpec& f) { return std::string(to_string(f.kind)) + "@" + f.target; }

inline PlatformFault to_platform_fault(const FaultSpec& f) {
  return PlatformFault{fault_code(f), f.params.factor, false};
}

/// Mutable per-run state a fault needs (values frozen at activation).
struct FaultRuntime {
  bool activated = false;
  double stuck_accel = 0.0;
  double phantom_anchor_s = 0.0;
  int phantom_lane = 0;
};

/// Setpoint corruption at the Nc output boundary (flow V).
inline Setpoint apply_setpoint_fault(Setpoint sp, const FaultSpec& f, const FaultRuntime& rt,
                                     const NoiseSource& noise, std::int64_t step) {
  switch (f.kind) {
    case FaultKind::NcStuckOutput:
      sp.accel_request = rt.stuck_accel;
      break;
    case FaultKind::NcRandomCorruption:
      sp.accel_request += noise.uniform(step, 0, 0, -f.params.range, f.params.range);
      break;
    default:
      break;
  }
  return sp;
}

/// Phantom object produced by a false-positive fault at time t.
inline ObservedObject phantom_object(const FaultSpec& f, const FaultRuntime& rt, double t, VehicleId id) {
  ObservedObject o;
  o.id = id;
  o.s = rt.phantom_anchor_s + f.params.phantom_v * (t - f.t_on);
  o.v = f.params.phantom_v;
  o.lane = rt.phantom_lane;
  o.observed_t = t;
  return o;
}

inline constexpr VehicleId kNcPhantomId = -1;
inline constexpr VehicleId kScPhantomId = -2;

/// Perception corruption applied after sensing (flow M -> A).
inline void apply_perception_fault(std::vector<ObservedObject>& objects, const FaultSpec& f,
                                   const FaultRuntime& rt, double t, VehicleId phantom_id) {
  switch (f.kind) {
    case FaultKind::NcFalseNegative: {
      const auto id = target_actor(f);
      std::erase_if(objects, [&](const ObservedObject& o) { return id && o.id == *id; });
      break;
    }
    case FaultKind::NcSensorBias:
      for (auto& o : objects) o.s += f.params.bias_s;
      break;
    case FaultKind::NcFalsePositive:
    case FaultKind::ScFalsePositivePerception:
      objects.push_back(phantom_object(f, rt, t, phantom_id));
      break;
    default:
      break;
  }
}

// ---------------------------------------------------------------------------
// Single-fault campaign enumeration

inline constexpr std::array<double, 3> kCampaignActivationTimes = {2.0, 5.0, 8.0};
inline constexpr std::array<double, 2> kCampaignDetectabilities = {0.0, 1.0};

struct CatalogEntry {
  FaultKind kind;
  std::vector<std::string> targets;
  FaultParams params;
};

using FaultCatalog = std::vector<CatalogEntry>;

/// One entry per kind; false negatives target every scripted actor.
inline FaultCatalog default_catalog(const std::vector<VehicleId>& actor_ids) {
  FaultCatalog cat;
  for (auto k : kAllFaultKinds) {
    CatalogEntry e{k, {}, {}};
    switch (k) {
      case FaultKind::NcSilence: e.targets = {"nc"}; break;
      case FaultKind::NcStuckOutput:
      case FaultKind::NcRandomCorruption: e.targets = {"nc.setpoint"}; break;
      case FaultKind::NcSystematicParam: e.targets = {"nc.planner"}; break;
      case FaultKind::NcFalseNegative:
        for (auto id : actor_ids) e.targets.push_back("actor:" + std::to_string(id));
        break;
      case FaultKind::NcFalsePositive:
      case FaultKind::NcSensorBias: e.targets = {"nc.perception"}; break;
      case FaultKind::ScSilence: e.targets = {"sc"}; break;
      case FaultKind::ScFalsePositivePerception: e.targets = {"sc.perception"}; break;
      case FaultKind::PlatformBrakeDegrade: e.targets = {"platform.brake"}; break;
    }
    if (!e.targets.empty()) cat.push_back(std::move(e));
  }
  return cat;
}

/// Fault list of every campaign run: the fault-free control run first
/// (nullopt), then kind x target x activation time x detectability.
inline std::vector<std::optional<FaultSpec>> single_fault_campaign(const FaultCatalog& catalog) {
  std::vector<std::optional<FaultSpec>> runs;
  runs.emplace_back(std::nullopt);
  for (const auto& entry : catalog) {
    for (const auto& target : entry.targets) {
      for (double t_on : kCampaignActivationTimes) {
        if (has_detectability(entry.kind)) {
          for (double d : kCampaignDetectabilities)
            runs.emplace_back(FaultSpec{entry.kind, target, t_on, std::nullopt, entry.params, d});
        } else {
          runs.emplace_back(FaultSpec{entry.kind, target, t_on, std::nullopt, entry.params, 0.0});
        }
      }
    }
  }
  return runs;
}

}  // namespace adi
