#include <gtest/gtest.h>

#include "support.hpp"

using namespace adi;
using adi::test::make_actor;
using adi::test::noiseless;
using adi::test::single_object;

namespace {

WorldState world_with(std::vector<Actor> actors, double ego_v = 20.0, int ego_lane = 0) {
  WorldState w;
  w.ego.v = ego_v;
  w.ego.lane = ego_lane;
  w.actors = std::move(actors);
  return w;
}

SituationAssessment assess(const MonitoredState& m, const RiskParams& p = {}) {
  NcObservation obs;
  obs.ego.s = m.ego_s;
  obs.ego.v = m.ego_v;
  obs.ego.lane = m.ego_lane;
  obs.objects = m.objects;
  WorldModelNc wm;
  return analyze_nc(obs, wm, p);
}

}  // namespace

TEST(SenseNc, OutOfRangeObjectAbsent) {
  const WorldState w = world_with({make_actor(1, 200.0, 0.0, 0), make_actor(2, 100.0, 0.0, 0)});
  const auto obs = sense_nc(w, {}, NoiseSource(1, Stream::NcSensor));
  ASSERT_EQ(obs.objects.size(), 1u);
  EXPECT_EQ(obs.objects[0].id, 2);
}

TEST(SenseNc, FalseNegativeHidesTarget) {
  const WorldState w = world_with({make_actor(3, 40.0, 10.0, 0), make_actor(4, 60.0, 10.0, 1)});
  const FaultSpec fn{FaultKind::NcFalseNegative, "actor:3", 0.0};
  const FaultRuntime rt;
  const ActiveFault af{0, &fn, &rt};
  const auto obs = sense_nc(w, std::span(&af, 1), NoiseSource(1, Stream::NcSensor));
  ASSERT_EQ(obs.objects.size(), 1u);
  EXPECT_EQ(obs.objects[0].id, 4);
}

TEST(SenseNc, ZeroNoiseIsGroundTruth) {
  const WorldState w = world_with({make_actor(1, 40.0, 12.5, 1)});
  const auto obs = sense_nc(w, {}, NoiseSource(1, Stream::NcSensor), noiseless(NcConfig{}.sensor));
  ASSERT_EQ(obs.objects.size(), 1u);
  EXPECT_EQ(obs.objects[0].s, 40.0);
  EXPECT_EQ(obs.objects[0].v, 12.5);
  EXPECT_EQ(obs.objects[0].lane, 1);
}

TEST(AnalyzeNc, EmptyIsRiskFree) {
  NcObservation obs;
  WorldModelNc wm;
  const auto as = analyze_nc(obs, wm, RiskParams{});
  EXPECT_EQ(as.risk, 0.0);
  EXPECT_TRUE(wm.tracks.empty());
}

TEST(AnalyzeNc, TrackAgingAndDrop) {
  NcObservation obs;
  obs.ego.v = 20.0;
  ObservedObject o;
  o.id = 1;
  o.s = 30.0;
  obs.objects = {o};
  WorldModelNc wm;
  const RiskParams p;
  const double seen_risk = analyze_nc(obs, wm, p).risk;
  EXPECT_GT(seen_risk, 0.0);

  NcObservation empty = obs;
  empty.objects.clear();
  for (int i = 0; i < 5; ++i) analyze_nc(empty, wm, p);
  ASSERT_EQ(wm.tracks.size(), 1u);
  EXPECT_NEAR(wm.tracks[0].age, 0.5, 1e-9);

  analyze_nc(obs, wm, p);  // re-observed
  ASSERT_EQ(wm.tracks.size(), 1u);
  EXPECT_EQ(wm.tracks[0].age, 0.0);

  for (int i = 0; i < 10; ++i) analyze_nc(empty, wm, p);
  EXPECT_EQ(wm.tracks.size(), 1u);  // exactly 1.0 s unobserved
  const auto as = analyze_nc(empty, wm, p);
  EXPECT_TRUE(wm.tracks.empty());
  EXPECT_EQ(as.risk, 0.0);
}

TEST(DecideBehavior, RiskFreeKeepsLane) {
  EXPECT_EQ(decide_behavior(assess(MonitoredState{}), PlatformStatus{}, RiskParams{}), NcBehavior::KeepLane);
}

TEST(DecideBehavior, ThresholdTriggersSafetyManeuver) {
  const auto as = assess(single_object(20.0, 25.0, 0.0));
  ASSERT_NEAR(as.risk, 1.0, 1e-12);
  EXPECT_EQ(decide_behavior(as, PlatformStatus{}, RiskParams{}), NcBehavior::SafetyManeuver);
  EXPECT_EQ(decide_behavior(assess(MonitoredState{}), PlatformStatus{}, RiskParams{}, true), NcBehavior::SafetyManeuver);
}

TEST(DecideBehavior, SlowLeadWithFreeLeftLane) {
  // ego lane 1 at 20 m/s, lead 30 m ahead at 20 m/s: 1.5 s gap time, lane 0 empty
  MonitoredState m = single_object(20.0, 30.0, 20.0, 1);
  const auto as = assess(m);
  ASSERT_NEAR(as.lead_gap_time, 1.5, 1e-12);
  EXPECT_EQ(decide_behavior(as, PlatformStatus{}, RiskParams{}), NcBehavior::ChangeLaneLeft);

  PlatformStatus no_lc;
  no_lc.lane_change_available = false;
  EXPECT_EQ(decide_behavior(as, no_lc, RiskParams{}), NcBehavior::KeepLane);

  ObservedObject blocker;
  blocker.id = 2;
  blocker.s = m.ego_s + 2.0;
  blocker.v = 20.0;
  blocker.lane = 0;
  m.objects.push_back(blocker);
  EXPECT_EQ(decide_behavior(assess(m), PlatformStatus{}, RiskParams{}), NcBehavior::KeepLane);
}

TEST(PlanTrajectory, AtSetSpeedIsStraight) {
  NcConfig cfg;
  MonitoredState m;
  m.ego_v = cfg.set_speed;
  const auto plan = plan_trajectory(NcBehavior::KeepLane, assess(m), PlatformStatus{}, RiskParams{}, {}, cfg);
  EXPECT_EQ(plan.setpoint.accel_request, 0.0);
  EXPECT_EQ(plan.setpoint.lane_cmd, LaneCommand::Keep);
  ASSERT_EQ(plan.trajectory.samples.size(), 20u);
  for (const auto& s : plan.trajectory.samples) EXPECT_EQ(s.v, cfg.set_speed);
}

TEST(PlanTrajectory, SafetyManeuverSpeedDecreasesToZero) {
  NcConfig cfg;
  cfg.plan_horizon = 8.0;
  MonitoredState m;
  m.ego_v = 20.0;
  const auto plan = plan_trajectory(NcBehavior::SafetyManeuver, assess(m), PlatformStatus{}, RiskParams{}, {}, cfg);
  EXPECT_EQ(plan.trajectory.intent, Intent::SafetyManeuver);
  EXPECT_EQ(plan.setpoint.intent, Intent::SafetyManeuver);
  double prev = m.ego_v;
  for (const auto& s : plan.trajectory.samples) {
    EXPECT_LE(s.v, prev);
    prev = s.v;
  }
  EXPECT_EQ(plan.trajectory.samples.back().v, 0.0);
}

TEST(PlanTrajectory, DegradedBrakeBoundsEveryStep) {
  PlatformStatus st;
  st.brake_capability = 4.0;
  st.degraded = true;
  const PlannerBeliefs beliefs{4.0, 2.0};
  for (auto [gap, behavior] : {std::pair{8.0, NcBehavior::SafetyManeuver}, std::pair{8.0, NcBehavior::KeepLane}}) {
    const auto as = assess(single_object(25.0, gap, 0.0));
    const auto plan = plan_trajectory(behavior, as, st, RiskParams{}.limited_to(4.0), beliefs);
    double v = as.monitored.ego_v;
    for (const auto& s : plan.trajectory.samples) {
      EXPECT_GE(s.a, -4.0);
      EXPECT_LE((v - s.v) / kStep, 4.0 + 1e-9);
      v = s.v;
    }
  }
}

TEST(SelfDiagnose, CertainFaultReportedOnFirstStep) {
  const FaultSpec f{FaultKind::NcStuckOutput, "nc.setpoint", 2.0, std::nullopt, {}, 1.0};
  const FaultRuntime rt;
  const ActiveFault af{0, &f, &rt};
  std::vector<std::size_t> reported;
  const auto st = self_diagnose(20, std::span(&af, 1), reported, NoiseSource(3, Stream::NcDiagnosis), 20);
  ASSERT_EQ(st.self_diagnosed_errors.size(), 1u);
  EXPECT_EQ(st.self_diagnosed_errors[0], "NcStuckOutput@nc.setpoint");
}

TEST(SelfDiagnose, UndetectableFaultNeverReported) {
  const FaultSpec f{FaultKind::NcSensorBias, "nc.perception", 0.0, std::nullopt, {}, 0.0};
  const FaultRuntime rt;
  const ActiveFault af{0, &f, &rt};
  std::vector<std::size_t> reported;
  const NoiseSource noise(3, Stream::NcDiagnosis);
  for (std::int64_t k = 0; k < 500; ++k)
    EXPECT_TRUE(self_diagnose(static_cast<std::uint64_t>(k), std::span(&af, 1), reported, noise, k).self_diagnosed_errors.empty());
}

TEST(NominalChannel, HeartbeatAdvancesEveryStep) {
  NominalChannel nc(NcConfig{}, 1);
  WorldState w;
  w.ego.v = 25.0;
  const auto a = nc.step(w, PlatformStatus{}, {}, false);
  const auto b = nc.step(w, PlatformStatus{}, {}, false);
  EXPECT_EQ(b.status.heartbeat, a.status.heartbeat + 1);
}

TEST(NominalChannel, LostSupervisorForcesLatchedManeuver) {
  NominalChannel nc(NcConfig{}, 1);
  WorldState w;
  w.ego.v = 25.0;
  EXPECT_EQ(nc.step(w, PlatformStatus{}, {}, true).behavior, NcBehavior::SafetyManeuver);
  EXPECT_TRUE(nc.safety_maneuver_latched());
  EXPECT_EQ(nc.step(w, PlatformStatus{}, {}, false).behavior, NcBehavior::SafetyManeuver);
}

TEST(NominalChannel, ManeuverBrakingNeverRelaxes) {
  // Obstacle forces a hard stop, then vanishes from view; braking must persist.
  NcConfig cfg;
  cfg.sensor = noiseless(cfg.sensor);
  NominalChannel nc(cfg, 1);
  WorldState w = world_with({make_actor(1, 30.0, 0.0, 0)}, 20.0);
  const double first = nc.step(w, PlatformStatus{}, {}, false).setpoint.accel_request;
  ASSERT_LT(first, -3.0);
  w.actors.clear();
  for (int i = 0; i < 20; ++i) EXPECT_LE(nc.step(w, PlatformStatus{}, {}, false).setpoint.accel_request, first);
}
