#include <gtest/gtest.h>

#include "support.hpp"

using namespace adi;

TEST(ExecuteSetpoint, WithinCapabilityIsIdentity) {
  PlatformStatus st;
  EXPECT_EQ(execute_setpoint({SetpointSource::Nominal, -8.0}, st).accel, -8.0);
}

TEST(ExecuteSetpoint, ClampsToDegradedBrake) {
  PlatformStatus st;
  st.brake_capability = 4.0;
  EXPECT_EQ(execute_setpoint({SetpointSource::Nominal, -8.0}, st).accel, -4.0);
  EXPECT_EQ(execute_setpoint({SetpointSource::Nominal, 9.0}, st).accel, kMaxAccel);
}

TEST(ExecuteSetpoint, LaneChangeSuppressedWhenUnavailable) {
  PlatformStatus st;
  st.lane_change_available = false;
  EXPECT_EQ(execute_setpoint({SetpointSource::Nominal, 0.0, LaneCommand::ChangeLeft}, st).lane_cmd, LaneCommand::Keep);
}

TEST(ExecuteSetpoint, ShoulderOnlyDuringSafetyManeuver) {
  RoadConfig road;
  road.has_shoulder = true;
  PlatformStatus st;
  const Setpoint normal{SetpointSource::Nominal, -1.0, LaneCommand::ToShoulder, Intent::Normal};
  EXPECT_EQ(execute_setpoint(normal, st, road).lane_cmd, LaneCommand::Keep);
  const Setpoint sm{SetpointSource::Supervisor, -1.0, LaneCommand::ToShoulder, Intent::SafetyManeuver};
  EXPECT_EQ(execute_setpoint(sm, st, road).lane_cmd, LaneCommand::ToShoulder);
  st.lane_change_available = false;
  EXPECT_EQ(execute_setpoint(sm, st, road).lane_cmd, LaneCommand::ToShoulder);
}

TEST(ReportStatus, NoFaults) {
  const PlatformStatus st = report_status({});
  EXPECT_EQ(st.brake_capability, 8.0);
  EXPECT_FALSE(st.degraded);
  EXPECT_TRUE(st.fault_codes.empty());
}

TEST(ReportStatus, BrakeDegradeHalvesCapability) {
  const PlatformStatus st = report_status({PlatformFault{"brake_degrade", 0.5, false}});
  EXPECT_EQ(st.brake_capability, 4.0);
  EXPECT_TRUE(st.degraded);
  ASSERT_EQ(st.fault_codes.size(), 1u);
  EXPECT_EQ(st.fault_codes[0], "brake_degrade");
}

TEST(ReportStatus, BothCodesListed) {
  const PlatformStatus st =
      report_status({PlatformFault{"a", 0.5, false}, PlatformFault{"b", 1.0, true}});
  EXPECT_EQ(st.fault_codes, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(st.lane_change_available);
}

TEST(ReportStatus, BaselineCapability) {
  PlatformBaseline base;
  base.brake_capability = 4.0;
  EXPECT_EQ(report_status({}, base).brake_capability, 4.0);
  EXPECT_TRUE(report_status({}, base).degraded);
}
