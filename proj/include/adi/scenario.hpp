#pragma once

// Scenario files: loading, complete validation with field-path diagnostics,
// and serialization back to JSON.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adi/faults.hpp"
#include "adi/platform.hpp"
#include "adi/risk.hpp"
#include "adi/sim_core.hpp"

namespace adi {

inline constexpr int kScenarioSchemaVersion = 1;

enum class SupervisorConfig : std::uint8_t { LiveSignalSimplex, DuplicatedSc };

inline constexpr std::string_view to_string(SupervisorConfig c) {
  return c == SupervisorConfig::DuplicatedSc ? "DuplicatedSc" : "LiveSignalSimplex";
}

inline std::optional<SupervisorConfig> supervisor_config_from_string(std::string_view s) {
  if (s == "LiveSignalSimplex") return SupervisorConfig::LiveSignalSimplex;
  if (s == "DuplicatedSc") return SupervisorConfig::DuplicatedSc;
  return std::nullopt;
}

struct EgoInit {
  double s = 0.0;
  double v = 25.0;
  int lane = 0;
  double length = 5.0;
};

struct ActorInit {
  VehicleId id = 1;
  double s = 0.0;
  double v = 0.0;
  int lane = 0;
  double length = 5.0;
  ActorScript script;
};

struct ScenarioConfig {
  std::string name = "unnamed";
  RoadConfig road;
  EgoInit ego;
  double set_speed = 25.0;
  PlatformBaseline platform;
  std::vector<ActorInit> actors;
  std::vector<FaultSpec> faults;
  RiskParams risk;
  SupervisorConfig supervisor = SupervisorConfig::LiveSignalSimplex;
  double duration = 30.0;
  std::uint64_t seed = 1;

  std::vector<VehicleId> actor_ids() const {
    std::vector<VehicleId> ids;
    for (const auto& a : actors) ids.push_back(a.id);
    return ids;
  }

  WorldState initial_world() const {
    WorldState w;
    w.road = road;
    w.ego = VehicleState{kEgoId, ego.s, ego.v, 0.0, ego.lane, std::nullopt, ego.length};
    for (const auto& a : actors)
      w.actors.push_back(Actor{VehicleState{a.id, a.s, a.v, 0.0, a.lane, std::nullopt, a.length}, a.script});
    std::sort(w.actors.begin(), w.actors.end(), [](const Actor& x, const Actor& y) { return x.state.id < y.state.id; });
    return w;
  }
};

struct ValidationError {
  std::string path;
  std::string message;
};

inline std::string format_errors(const std::vector<ValidationError>& errors) {
  std::ostringstream os;
  for (const auto& e : errors) os << e.path << ": " << e.message << '\n';
  return os.str();
}

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ValidationError> errors)
      : std::runtime_error(format_errors(errors)), errors_(std::move(errors)) {}
  const std::vector<ValidationError>& errors() const { return errors_; }

 private:
  std::vector<ValidationError> errors_;
};

/// Semantic checks on an already-typed configuration.
inline std::vector<ValidationError> validate(const ScenarioConfig& c) {
  std::vector<ValidationError> err;
  auto fail = [&](std::string path, std::string msg) { err.push_back({std::move(path), std::move(msg)}); };
  auto finite = [](double x) { return std::isfinite(x); };

  if (c.road.lane_count < 1) fail("road.lane_count", "must be >= 1");
  if (!(c.road.segment_length > 0.0)) fail("road.segment_length", "must be > 0");

  if (!c.road.is_lane(c.ego.lane)) fail("ego.lane", "not a lane of the road");
  if (!(c.ego.v >= 0.0 && c.ego.v <= kMaxSpeed)) fail("ego.v", "must be in [0, 40]");
  if (!(c.ego.length > 0.0)) fail("ego.length", "must be > 0");
  if (!finite(c.ego.s)) fail("ego.s", "must be finite");
  if (!(c.set_speed > 0.0 && c.set_speed <= kMaxSpeed)) fail("set_speed", "must be in (0, 40]");

  if (!(c.platform.brake_capability > 0.0 && c.platform.brake_capability <= kMaxBrake))
    fail("platform.brake_capability", "must be in (0, 8]");

  std::set<VehicleId> ids;
  for (std::size_t i = 0; i < c.actors.size(); ++i) {
    const auto& a = c.actors[i];
    const std::string p = "actors[" + std::to_string(i) + "]";
    if (a.id <= kEgoId) fail(p + ".id", "must be > 0 (0 is the ego)");
    if (!ids.insert(a.id).second) fail(p + ".id", "duplicate actor id " + std::to_string(a.id));
    if (!c.road.is_lane(a.lane)) fail(p + ".lane", "not a lane of the road");
    if (!(a.v >= 0.0 && a.v <= kMaxSpeed)) fail(p + ".v", "must be in [0, 40]");
    if (!(a.length > 0.0)) fail(p + ".length", "must be > 0");
    if (!finite(a.s)) fail(p + ".s", "must be finite");
    if (a.script.phases.empty()) {
      fail(p + ".script", "must contain at least one phase");
      continue;
    }
    if (a.script.phases.front().start_t > kTimeEps) fail(p + ".script[0].start_t", "script must cover t = 0");
    for (std::size_t k = 0; k < a.script.phases.size(); ++k) {
      const auto& ph = a.script.phases[k];
      const std::string pp = p + ".script[" + std::to_string(k) + "]";
      if (k > 0 && !(ph.start_t > a.script.phases[k - 1].start_t))
        fail(pp + ".start_t", "phases must be sorted by strictly increasing start_t");
      if (const auto* b = std::get_if<Cruise>(&ph.behavior); b && !(b->v_target >= 0.0 && b->v_target <= kMaxSpeed))
        fail(pp + ".v_target", "must be in [0, 40]");
      if (const auto* b = std::get_if<Brake>(&ph.behavior); b && !(b->a_brake >= -kMaxBrake && b->a_brake <= 0.0))
        fail(pp + ".a_brake", "must be in [-8, 0]");
      if (const auto* b = std::get_if<CutIn>(&ph.behavior); b && !c.road.is_lane(b->target_lane))
        fail(pp + ".target_lane", "not a lane of the road");
    }
  }

  if (err.empty()) {
    if (const auto hit = detect_collision(c.initial_world()))
      fail("actors", "vehicles " + std::to_string(hit->first) + " and " + std::to_string(hit->second) +
                         " overlap at t = 0");
  }

  const auto actor_ids = c.actor_ids();
  for (std::size_t i = 0; i < c.faults.size(); ++i) {
    const auto& f = c.faults[i];
    const std::string p = "faults[" + std::to_string(i) + "]";
    if (!target_valid(f.kind, f.target, actor_ids))
      fail(p + ".target", "unknown target '" + f.target + "' for " + std::string(to_string(f.kind)));
    if (!(f.t_on >= 0.0 && f.t_on < c.duration)) fail(p + ".t_on", "must be in [0, duration)");
    if (f.duration && !(*f.duration > 0.0)) fail(p + ".duration", "must be > 0 or null (permanent)");
    if (!(f.detectability >= 0.0 && f.detectability <= 1.0)) fail(p + ".detectability", "must be in [0, 1]");
    if (!has_detectability(f.kind) && f.detectability != 0.0)
      fail(p + ".detectability", "only meaningful for Nc-internal kinds; must be 0");
    if (!(f.params.range >= 0.0)) fail(p + ".params.range", "must be >= 0");
    if (!(f.params.factor > 0.0 && f.params.factor <= 1.0)) fail(p + ".params.factor", "must be in (0, 1]");
    if (!(f.params.phantom_v >= 0.0)) fail(p + ".params.phantom_v", "must be >= 0");
    if (f.kind == FaultKind::NcSystematicParam) {
      if (f.params.name != "brake_capability" && f.params.name != "headway")
        fail(p + ".params.name", "must be brake_capability or headway");
      if (!(f.params.value > 0.0)) fail(p + ".params.value", "must be > 0");
    }
  }

  if (!(c.risk.horizon > 0.0)) fail("risk.horizon", "must be > 0");
  if (!(c.risk.r_max > 0.0 && c.risk.r_max < kUnavoidableRisk)) fail("risk.r_max", "must be in (0, 10)");
  if (!(c.risk.a_avoid_max > 0.0 && c.risk.a_avoid_max <= kMaxBrake)) fail("risk.a_avoid_max", "must be in (0, 8]");
  if (!(c.duration > 0.0 && c.duration <= 3600.0)) fail("duration", "must be in (0, 3600]");
  return err;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

/// Typed field reader that records every problem instead of throwing.
class Reader {
 public:
  explicit Reader(std::vector<ValidationError>& errors) : errors_(errors) {}

  const json* field(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors_.push_back({join(path, key), "missing required field"});
      return nullptr;
    }
    return &*it;
  }

  void number(const json& obj, const std::string& key, const std::string& path, double& out, bool required = false) {
    if (const json* v = field(obj, key, path, required)) {
      if (v->is_number()) out = v->get<double>();
      else errors_.push_back({join(path, key), "expected a number"});
    }
  }

  void integer(const json& obj, const std::string& key, const std::string& path, int& out, bool required = false) {
    if (const json* v = field(obj, key, path, required)) {
      if (v->is_number_integer()) out = v->get<int>();
      else errors_.push_back({join(path, key), "expected an integer"});
    }
  }

  void id(const json& obj, const std::string& key, const std::string& path, std::int64_t& out, bool required) {
    if (const json* v = field(obj, key, path, required)) {
      if (v->is_number_integer()) out = v->get<std::int64_t>();
      else errors_.push_back({join(path, key), "expected an integer"});
    }
  }

  void boolean(const json& obj, const std::string& key, const std::string& path, bool& out, bool required = false) {
    if (const json* v = field(obj, key, path, required)) {
      if (v->is_boolean()) out = v->get<bool>();
      else errors_.push_back({join(path, key), "expected true or false"});
    }
  }

  void text(const json& obj, const std::string& key, const std::string& path, std::string& out, bool required = false) {
    if (const json* v = field(obj, key, path, required)) {
      if (v->is_string()) out = v->get<std::string>();
      else errors_.push_back({join(path, key), "expected a string"});
    }
  }

  bool object(const json* v, const std::string& path) {
    if (v && !v->is_object()) {
      errors_.push_back({path, "expected an object"});
      return false;
    }
    return v != nullptr;
  }

  bool array(const json* v, const std::string& path) {
    if (v && !v->is_array()) {
      errors_.push_back({path, "expected an array"});
      return false;
    }
    return v != nullptr;
  }

  void error(std::string path, std::string message) { errors_.push_back({std::move(path), std::move(message)}); }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

 private:
  std::vector<ValidationError>& errors_;
};

inline ScriptPhase read_phase(Reader& r, const json& j, const std::string& path) {
  ScriptPhase ph;
  r.number(j, "start_t", path, ph.start_t, true);
  std::string kind;
  r.text(j, "behavior", path, kind, true);
  if (kind == "Cruise") {
    Cruise b;
    r.number(j, "v_target", path, b.v_target, true);
    ph.behavior = b;
  } else if (kind == "Brake") {
    Brake b;
    r.number(j, "a_brake", path, b.a_brake, true);
    ph.behavior = b;
  } else if (kind == "CutIn") {
    CutIn b;
    r.integer(j, "target_lane", path, b.target_lane, true);
    ph.behavior = b;
  } else if (kind == "Stop") {
    ph.behavior = Stop{};
  } else if (!kind.empty()) {
    r.error(Reader::join(path, "behavior"), "unknown behavior '" + kind + "' (Cruise, Brake, CutIn, Stop)");
  }
  return ph;
}

inline FaultSpec read_fault(Reader& r, const json& j, const std::string& path) {
  FaultSpec f;
  std::string kind;
  r.text(j, "kind", path, kind, true);
  if (auto k = fault_kind_from_string(kind)) f.kind = *k;
  else if (!kind.empty()) r.error(Reader::join(path, "kind"), "unknown fault kind '" + kind + "'");
  r.text(j, "target", path, f.target, true);
  r.number(j, "t_on", path, f.t_on, true);
  if (const json* d = r.field(j, "duration", path, false); d && !d->is_null()) {
    if (d->is_number()) f.duration = d->get<double>();
    else r.error(Reader::join(path, "duration"), "expected a number or null");
  }
  r.number(j, "detectability", path, f.detectability);
  const std::string pp = Reader::join(path, "params");
  if (const json* p = r.field(j, "params", path, false); r.object(p, pp)) {
    r.number(*p, "range", pp, f.params.range);
    r.number(*p, "bias_s", pp, f.params.bias_s);
    r.number(*p, "rel_s", pp, f.params.rel_s);
    r.number(*p, "phantom_v", pp, f.params.phantom_v);
    r.text(*p, "name", pp, f.params.name);
    r.number(*p, "value", pp, f.params.value);
    r.number(*p, "factor", pp, f.params.factor);
  }
  return f;
}

}  // namespace detail

/// Parses and validates; throws ScenarioError listing every problem.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using detail::Reader;
  using nlohmann::json;
  std::vector<ValidationError> errors;
  Reader r(errors);
  ScenarioConfig c;
  if (!j.is_object()) throw ScenarioError(std::vector<ValidationError>{{"", "scenario must be a JSON object"}});

  int version = 0;
  r.integer(j, "schema_version", "", version, true);
  if (r.field(j, "schema_version", "", false) && version != kScenarioSchemaVersion)
    r.error("schema_version", "unsupported version " + std::to_string(version));
  r.text(j, "name", "", c.name);

  if (const json* road = r.field(j, "road", "", true); r.object(road, "road")) {
    r.integer(*road, "lane_count", "road", c.road.lane_count, true);
    r.boolean(*road, "has_shoulder", "road", c.road.has_shoulder);
    r.number(*road, "segment_length", "road", c.road.segment_length);
  }
  if (const json* ego = r.field(j, "ego", "", true); r.object(ego, "ego")) {
    r.number(*ego, "s", "ego", c.ego.s);
    r.number(*ego, "v", "ego", c.ego.v, true);
    r.integer(*ego, "lane", "ego", c.ego.lane, true);
    r.number(*ego, "length", "ego", c.ego.length);
  }
  r.number(j, "set_speed", "", c.set_speed, true);
  if (const json* p = r.field(j, "platform", "", false); r.object(p, "platform")) {
    r.number(*p, "brake_capability", "platform", c.platform.brake_capability);
    r.boolean(*p, "lane_change_available", "platform", c.platform.lane_change_available);
  }

  if (const json* actors = r.field(j, "actors", "", false); r.array(actors, "actors")) {
    for (std::size_t i = 0; i < actors->size(); ++i) {
      const json& a = (*actors)[i];
      const std::string p = "actors[" + std::to_string(i) + "]";
      if (!r.object(&a, p)) continue;
      ActorInit ai;
      r.id(a, "id", p, ai.id, true);
      r.number(a, "s", p, ai.s, true);
      r.number(a, "v", p, ai.v, true);
      r.integer(a, "lane", p, ai.lane, true);
      r.number(a, "length", p, ai.length);
      if (const json* script = r.field(a, "script", p, true); r.array(script, p + ".script")) {
        for (std::size_t k = 0; k < script->size(); ++k) {
          const std::string pp = p + ".script[" + std::to_string(k) + "]";
          if (r.object(&(*script)[k], pp)) ai.script.phases.push_back(detail::read_phase(r, (*script)[k], pp));
        }
      }
      c.actors.push_back(std::move(ai));
    }
  }

  if (const json* faults = r.field(j, "faults", "", false); r.array(faults, "faults")) {
    for (std::size_t i = 0; i < faults->size(); ++i) {
      const std::string p = "faults[" + std::to_string(i) + "]";
      if (r.object(&(*faults)[i], p)) c.faults.push_back(detail::read_fault(r, (*faults)[i], p));
    }
  }

  if (const json* risk = r.field(j, "risk", "", false); r.object(risk, "risk")) {
    r.number(*risk, "horizon", "risk", c.risk.horizon);
    r.number(*risk, "r_max", "risk", c.risk.r_max);
    r.number(*risk, "a_avoid_max", "risk", c.risk.a_avoid_max);
  }
  std::string sup = std::string(to_string(c.supervisor));
  r.text(j, "supervisor", "", sup);
  if (auto s = supervisor_config_from_string(sup)) c.supervisor = *s;
  else r.error("supervisor", "must be LiveSignalSimplex or DuplicatedSc");
  r.number(j, "duration", "", c.duration, true);
  if (const json* seed = r.field(j, "seed", "", false)) {
    if (seed->is_number_unsigned()) c.seed = seed->get<std::uint64_t>();
    else r.error("seed", "expected a non-negative integer");
  }

  // Semantic checks run on whatever parsed; a path already reported keeps its first message.
  for (auto& e : validate(c)) {
    const bool seen = std::any_of(errors.begin(), errors.end(), [&](const ValidationError& x) { return x.path == e.path; });
    if (!seen) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(std::vector<ValidationError>{{"", "cannot open '" + path + "'"}});
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::vector<ValidationError>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  return scenario_from_json(j);
}

inline nlohmann::ordered_json phase_to_json(const ScriptPhase& ph) {
  nlohmann::ordered_json j;
  j["start_t"] = ph.start_t;
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Cruise>) {
          j["behavior"] = "Cruise";
          j["v_target"] = b.v_target;
        } else if constexpr (std::is_same_v<B, Brake>) {
          j["behavior"] = "Brake";
          j["a_brake"] = b.a_brake;
        } else if constexpr (std::is_same_v<B, CutIn>) {
          j["behavior"] = "CutIn";
          j["target_lane"] = b.target_lane;
        } else {
          j["behavior"] = "Stop";
        }
      },
      ph.behavior);
  return j;
}

inline nlohmann::ordered_json fault_to_json(const FaultSpec& f) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(f.kind);
  j["target"] = f.target;
  j["t_on"] = f.t_on;
  j["duration"] = f.duration ? nlohmann::ordered_json(*f.duration) : nlohmann::ordered_json(nullptr);
  j["detectability"] = f.detectability;
  j["params"] = {{"range", f.params.range},       {"bias_s", f.params.bias_s}, {"rel_s", f.params.rel_s},
                 {"phantom_v", f.params.phantom_v}, {"name", f.params.name},     {"value", f.params.value},
                 {"factor", f.params.factor}};
  return j;
}

inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = c.name;
  j["road"] = {{"lane_count", c.road.lane_count},
               {"has_shoulder", c.road.has_shoulder},
               {"segment_length", c.road.segment_length}};
  j["ego"] = {{"s", c.ego.s}, {"v", c.ego.v}, {"lane", c.ego.lane}, {"length", c.ego.length}};
  j["set_speed"] = c.set_speed;
  j["platform"] = {{"brake_capability", c.platform.brake_capability},
                   {"lane_change_available", c.platform.lane_change_available}};
  j["actors"] = nlohmann::ordered_json::array();
  for (const auto& a : c.actors) {
    nlohmann::ordered_json ja;
    ja["id"] = a.id;
    ja["s"] = a.s;
    ja["v"] = a.v;
    ja["lane"] = a.lane;
    ja["length"] = a.length;
    ja["script"] = nlohmann::ordered_json::array();
    for (const auto& ph : a.script.phases) ja["script"].push_back(phase_to_json(ph));
    j["actors"].push_back(std::move(ja));
  }
  j["faults"] = nlohmann::ordered_json::array();
  for (const auto& f : c.faults) j["faults"].push_back(fault_to_json(f));
  j["risk"] = {{"horizon", c.risk.horizon}, {"r_max", c.risk.r_max}, {"a_avoid_max", c.risk.a_avoid_max}};
  j["supervisor"] = to_string(c.supervisor);
  j["duration"] = c.duration;
  j["seed"] = c.seed;
  return j;
}

}  // namespace adi
