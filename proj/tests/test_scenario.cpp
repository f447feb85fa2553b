#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace adi;
using nlohmann::json;

namespace {

json base_json() {
  std::ifstream in(adi::test::scenario_path("stopped_obstacle"));
  return json::parse(in);
}

std::vector<std::string> error_paths(const json& j) {
  try {
    scenario_from_json(j);
  } catch (const ScenarioError& e) {
    std::vector<std::string> out;
    for (const auto& err : e.errors()) out.push_back(err.path);
    return out;
  }
  return {};
}

bool contains(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST(Scenario, ShippedFilesLoad) {
  for (const auto& e : std::filesystem::directory_iterator(ADI_SCENARIO_DIR)) {
    if (e.path().extension() != ".json" || e.path().filename() == "schema.json") continue;
    EXPECT_NO_THROW(load_scenario(e.path().string())) << e.path();
  }
}

TEST(Scenario, MissingFileIsValidationError) { EXPECT_THROW(load_scenario("/nonexistent.json"), ScenarioError); }

TEST(Scenario, MalformedJson) { EXPECT_THROW(load_scenario(__FILE__), ScenarioError); }

TEST(Scenario, MissingFieldReportsPath) {
  json j = base_json();
  j["ego"].erase("v");
  EXPECT_TRUE(contains(error_paths(j), "ego.v"));
}

TEST(Scenario, WrongTypeReportsPath) {
  json j = base_json();
  j["road"]["lane_count"] = "two";
  EXPECT_TRUE(contains(error_paths(j), "road.lane_count"));
}

TEST(Scenario, ScriptMustCoverStart) {
  json j = base_json();
  j["actors"][0]["script"][0]["start_t"] = 1.0;
  EXPECT_TRUE(contains(error_paths(j), "actors[0].script[0].start_t"));
}

TEST(Scenario, UnsortedPhases) {
  json j = base_json();
  j["actors"][0]["script"] = json::array({{{"start_t", 0.0}, {"behavior", "Stop"}}, {{"start_t", 0.0}, {"behavior", "Stop"}}});
  EXPECT_TRUE(contains(error_paths(j), "actors[0].script[1].start_t"));
}

TEST(Scenario, UnknownBehaviorAndKind) {
  json j = base_json();
  j["actors"][0]["script"][0]["behavior"] = "Hover";
  j["faults"] = json::array({{{"kind", "NcMeltdown"}, {"target", "nc"}, {"t_on", 1.0}}});
  const auto paths = error_paths(j);
  EXPECT_TRUE(contains(paths, "actors[0].script[0].behavior"));
  EXPECT_TRUE(contains(paths, "faults[0].kind"));
}

TEST(Scenario, FaultTargetAndRanges) {
  json j = base_json();
  j["faults"] = json::array({{{"kind", "NcFalseNegative"}, {"target", "actor:9"}, {"t_on", 1.0}},
                             {{"kind", "NcSilence"}, {"target", "nc"}, {"t_on", 99.0}, {"detectability", 0.5}},
                             {{"kind", "PlatformBrakeDegrade"}, {"target", "platform.brake"}, {"t_on", 1.0},
                              {"params", {{"factor", 1.5}}}}});
  const auto paths = error_paths(j);
  EXPECT_TRUE(contains(paths, "faults[0].target"));
  EXPECT_TRUE(contains(paths, "faults[1].t_on"));
  EXPECT_TRUE(contains(paths, "faults[1].detectability"));
  EXPECT_TRUE(contains(paths, "faults[2].params.factor"));
}

TEST(Scenario, AllErrorsCollected) {
  json j = base_json();
  j["ego"]["lane"] = 7;
  j["risk"]["r_max"] = -1.0;
  j["duration"] = 0.0;
  j["supervisor"] = "Triplex";
  const auto paths = error_paths(j);
  EXPECT_TRUE(contains(paths, "ego.lane"));
  EXPECT_TRUE(contains(paths, "risk.r_max"));
  EXPECT_TRUE(contains(paths, "duration"));
  EXPECT_TRUE(contains(paths, "supervisor"));
}

TEST(Scenario, InitialOverlapRejected) {
  json j = base_json();
  j["actors"][0]["s"] = 2.0;
  EXPECT_TRUE(contains(error_paths(j), "actors"));
}

TEST(Scenario, SchemaVersionChecked) {
  json j = base_json();
  j["schema_version"] = 2;
  EXPECT_TRUE(contains(error_paths(j), "schema_version"));
}

TEST(Scenario, JsonRoundTrip) {
  for (const char* name : {"lead_hard_brake", "adjacent_cut_in", "degraded_platform", "silent_nc_stopped_obstacle"}) {
    const ScenarioConfig a = adi::test::scenario(name);
    const auto dumped = scenario_to_json(a).dump();
    const ScenarioConfig b = scenario_from_json(json::parse(dumped));
    EXPECT_EQ(scenario_to_json(b).dump(), dumped) << name;
  }
}

TEST(Scenario, PermanentFaultDurationIsNull) {
  const ScenarioConfig c = adi::test::scenario("silent_nc_stopped_obstacle");
  ASSERT_EQ(c.faults.size(), 1u);
  EXPECT_FALSE(c.faults[0].duration);
  EXPECT_TRUE(scenario_to_json(c)["faults"][0]["duration"].is_null());
}
