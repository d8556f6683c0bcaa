#include "lcl/tasks.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "lcl/error.hpp"
#include "lcl/plants.hpp"

namespace {

using namespace lcl;

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

TEST(MinJerk, EndpointsAndMidpoint) {
  Eigen::VectorXd start(2), goal(2);
  start << 0.5, -1.0;
  goal << 1.5, 2.0;
  const double T = 1.7;

  const ReferencePoint a = min_jerk(start, goal, T, 0.0);
  const ReferencePoint b = min_jerk(start, goal, T, T);
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(a.pos[i], start[i]);
    EXPECT_DOUBLE_EQ(b.pos[i], goal[i]);
    EXPECT_DOUBLE_EQ(a.vel[i], 0.0);
    EXPECT_DOUBLE_EQ(b.vel[i], 0.0);
    EXPECT_DOUBLE_EQ(a.acc[i], 0.0);
    EXPECT_DOUBLE_EQ(b.acc[i], 0.0);
  }

  // The shape polynomial passes through 1/2 exactly at u = 1/2.
  const ReferencePoint m = min_jerk(start, goal, T, 0.5 * T);
  for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(m.pos[i], 0.5 * (start[i] + goal[i]));
}

TEST(MinJerk, ClampsOutsideTheWindow) {
  const Eigen::VectorXd start = vec1(1.0);
  const Eigen::VectorXd goal = vec1(3.0);
  const ReferencePoint before = min_jerk(start, goal, 2.0, -0.5);
  const ReferencePoint after = min_jerk(start, goal, 2.0, 7.0);
  EXPECT_DOUBLE_EQ(before.pos[0], 1.0);
  EXPECT_DOUBLE_EQ(after.pos[0], 3.0);
  EXPECT_DOUBLE_EQ(before.vel[0], 0.0);
  EXPECT_DOUBLE_EQ(after.vel[0], 0.0);
}

TEST(MinJerk, DerivativesMatchFiniteDifferences) {
  const Eigen::VectorXd start = vec1(-0.3);
  const Eigen::VectorXd goal = vec1(2.1);
  const double T = 1.3;
  const double h = 1e-6;
  for (int k = 1; k < 20; ++k) {
    const double t = T * k / 20.0;
    const ReferencePoint mid = min_jerk(start, goal, T, t);
    const ReferencePoint lo = min_jerk(start, goal, T, t - h);
    const ReferencePoint hi = min_jerk(start, goal, T, t + h);
    EXPECT_NEAR(mid.vel[0], (hi.pos[0] - lo.pos[0]) / (2.0 * h), 1e-6);
    EXPECT_NEAR(mid.acc[0], (hi.vel[0] - lo.vel[0]) / (2.0 * h), 1e-5);
  }
}

TEST(MinJerk, RejectsBadDuration) {
  EXPECT_THROW(min_jerk(vec1(0.0), vec1(1.0), 0.0, 0.0), ConfigError);
  EXPECT_THROW(min_jerk(vec1(0.0), vec1(1.0), -1.0, 0.0), ConfigError);
}

TEST(DesiredNext, HandComputedSample) {
  ReferencePoint ref;
  ref.pos = vec1(1.0);
  ref.vel = vec1(0.5);
  ref.acc = vec1(2.0);
  PdGains gains;
  gains.kp = 10.0;
  gains.kd = 4.0;

  const DesiredNext d = desired_next(vec1(0.8), vec1(0.1), ref, gains, 0.01);
  // accel = 2 + 10*0.2 + 4*0.4 = 5.6; vel = 0.1 + 0.056; pos = 0.8 + 0.01*0.156
  EXPECT_DOUBLE_EQ(d.accel[0], 5.6);
  EXPECT_DOUBLE_EQ(d.vel[0], 0.156);
  EXPECT_DOUBLE_EQ(d.pos[0], 0.80156);
}

TEST(DesiredNext, OnReferenceReducesToTheReferenceAcceleration) {
  ReferencePoint ref;
  ref.pos = vec1(0.7);
  ref.vel = vec1(-0.2);
  ref.acc = vec1(1.3);
  const DesiredNext d = desired_next(vec1(0.7), vec1(-0.2), ref, PdGains{}, 0.01);
  EXPECT_DOUBLE_EQ(d.accel[0], 1.3);
}

TEST(HopperProfile, StartsAndEndsAtSpringEquilibrium) {
  const PlantSpec spec = default_hopper();
  const double x_set = -spec.mass[0] * spec.gravity / spec.contact_stiffness;
  const HopperProfile p = HopperProfile::make(0.04, 2.4, spec);

  const ReferencePoint a = p.at(0.0);
  const ReferencePoint b = p.at(p.duration());
  EXPECT_DOUBLE_EQ(a.pos[0], x_set);
  EXPECT_DOUBLE_EQ(b.pos[0], x_set);
  EXPECT_DOUBLE_EQ(a.vel[0], 0.0);
  EXPECT_NEAR(b.vel[0], 0.0, 1e-12);
  // At rest the reference ground reaction carries the weight exactly.
  EXPECT_DOUBLE_EQ(a.force, spec.mass[0] * spec.gravity);
}

TEST(HopperProfile, ReactionForceIsNonNegativeAndZeroInFlight) {
  const PlantSpec spec = default_hopper();
  const HopperProfile p = HopperProfile::make(0.05, 2.4, spec);
  bool saw_flight = false;
  for (double t = 0.0; t <= p.duration(); t += 1e-3) {
    const ReferencePoint r = p.at(t);
    EXPECT_GE(r.force, 0.0);
    if (!r.in_contact) {
      saw_flight = true;
      EXPECT_DOUBLE_EQ(r.force, 0.0);
      EXPECT_NEAR(r.acc[0], -spec.gravity, 1e-9);
      EXPECT_GE(r.pos[0], -1e-12);
    }
  }
  EXPECT_TRUE(saw_flight);
}

TEST(HopperProfile, ApexMatchesTheRequestedHeight) {
  const PlantSpec spec = default_hopper();
  for (double H : {0.02, 0.04, 0.06}) {
    const HopperProfile p = HopperProfile::make(H, 2.4, spec);
    double apex = -1.0;
    for (double t = 0.0; t <= p.duration(); t += 1e-4) apex = std::max(apex, p.at(t).pos[0]);
    EXPECT_NEAR(apex, H, 1e-6) << "H=" << H;
  }
}

TEST(HopperProfile, PositionVelocityAccelerationAreConsistent) {
  const PlantSpec spec = default_hopper();
  const HopperProfile p = HopperProfile::make(0.04, 2.4, spec);
  const double h = 1e-6;
  // Interior samples; central differences straddle segment joints too, which
  // only works because the profile is built C^2 continuous.
  for (int k = 1; k < 2000; ++k) {
    const double t = p.duration() * k / 2000.0;
    const ReferencePoint lo = p.at(t - h);
    const ReferencePoint mid = p.at(t);
    const ReferencePoint hi = p.at(t + h);
    EXPECT_NEAR(mid.vel[0], (hi.pos[0] - lo.pos[0]) / (2.0 * h), 1e-5) << "t=" << t;
    EXPECT_NEAR(mid.acc[0], (hi.vel[0] - lo.vel[0]) / (2.0 * h), 1e-4) << "t=" << t;
  }
}

TEST(HopperProfile, ReintegrationReproducesThePositions) {
  const PlantSpec spec = default_hopper();
  const HopperProfile p = HopperProfile::make(0.04, 2.4, spec);
  const double h = 1e-5;
  double x = p.at(0.0).pos[0];
  double v = p.at(0.0).vel[0];
  double worst = 0.0;
  for (double t = 0.0; t + h <= p.duration(); t += h) {
    // Midpoint acceleration keeps the integration error at O(h^2).
    const double a = p.at(t + 0.5 * h).acc[0];
    v += h * a;
    x += h * v;
    worst = std::max(worst, std::abs(x - p.at(t + h).pos[0]));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(HopperProfile, PeakActuatorForceRespectsTheLimit) {
  const PlantSpec spec = default_hopper();
  for (double H : {0.02, 0.04, 0.06}) {
    const HopperProfile p = HopperProfile::make(H, 2.4, spec);
    EXPECT_GT(p.peak_actuator_force(), 0.0);
    EXPECT_LE(p.peak_actuator_force(), spec.torque_limit[0]);
  }
}

TEST(HopperProfile, RejectsInfeasibleRequests) {
  const PlantSpec spec = default_hopper();
  EXPECT_THROW(HopperProfile::make(0.04, 0.5, spec), ConfigError);   // cycle cannot fit
  EXPECT_THROW(HopperProfile::make(5.0, 60.0, spec), ConfigError);   // beyond the actuator
  EXPECT_THROW(HopperProfile::make(-0.1, 2.4, spec), ConfigError);
  EXPECT_THROW(HopperProfile::make(0.04, 2.4, default_pendulum()), ConfigError);
}

TEST(MakeTarget, DeterministicPerTargetId) {
  const PlantSpec spec = default_pendulum();
  const TrajectorySpec a = make_target(spec, TaskSpace::kJoint, 3, 1.5);
  const TrajectorySpec b = make_target(spec, TaskSpace::kJoint, 3, 1.5);
  EXPECT_EQ(a.goal[0], b.goal[0]);
  EXPECT_EQ(a.start_q[0], b.start_q[0]);

  const TrajectorySpec c = make_target(spec, TaskSpace::kJoint, 4, 1.5);
  EXPECT_NE(a.goal[0], c.goal[0]);
}

TEST(MakeTarget, PendulumGoalsStayInTheSampledBand) {
  const PlantSpec spec = default_pendulum();
  for (int id = 0; id < 50; ++id) {
    const TrajectorySpec t = make_target(spec, TaskSpace::kJoint, id, 1.5);
    EXPECT_EQ(t.start_q.size(), 1);
    EXPECT_DOUBLE_EQ(t.start_q[0], 0.0);
    EXPECT_GE(std::abs(t.goal[0]), 0.8);
    EXPECT_LE(std::abs(t.goal[0]), 2.4);
  }
}

TEST(MakeTarget, ArmJointGoalsMoveEveryJoint) {
  const PlantSpec spec = default_arm(2);
  for (int id = 0; id < 20; ++id) {
    const TrajectorySpec t = make_target(spec, TaskSpace::kJoint, id, 2.0);
    ASSERT_EQ(t.goal.size(), 2);
    EXPECT_DOUBLE_EQ(t.start_q[0], -M_PI / 2.0);
    for (int i = 0; i < 2; ++i) {
      const double step = std::abs(t.goal[i] - t.start_q[i]);
      EXPECT_GE(step, 0.4);
      EXPECT_LE(step, 1.2);
    }
  }
}

TEST(MakeTarget, ArmReachGoalsAreReachable) {
  const PlantSpec spec = default_arm(3);
  const double reach = spec.length.sum();
  for (int id = 0; id < 50; ++id) {
    const TrajectorySpec t = make_target(spec, TaskSpace::kEndEffector, id, 2.0);
    ASSERT_EQ(t.goal.size(), 2);
    const double r = t.goal.norm();
    EXPECT_GE(r, 0.35 * reach - 1e-12);
    EXPECT_LE(r, 0.8 * reach + 1e-12);
  }
}

TEST(MakeTarget, HopperHeightsStayInTheSampledBand) {
  const PlantSpec spec = default_hopper();
  for (int id = 0; id < 50; ++id) {
    const TrajectorySpec t = make_target(spec, TaskSpace::kHopperHeight, id, 2.4);
    EXPECT_GE(t.goal[0], 0.02);
    EXPECT_LE(t.goal[0], 0.06);
  }
}

TEST(MakeTarget, RejectsMismatchedTaskSpaces) {
  EXPECT_THROW(make_target(default_pendulum(), TaskSpace::kEndEffector, 0, 1.5), ConfigError);
  EXPECT_THROW(make_target(default_arm(2), TaskSpace::kHopperHeight, 0, 2.0), ConfigError);
  EXPECT_THROW(make_target(default_hopper(), TaskSpace::kJoint, 0, 2.4), ConfigError);
}

TEST(ReferenceTrajectory, JointSpaceInterpolatesBetweenStartAndGoal) {
  const PlantSpec spec = default_arm(2);
  const TrajectorySpec t = make_target(spec, TaskSpace::kJoint, 0, 2.0);
  const ReferenceTrajectory ref(t, spec);
  EXPECT_EQ(ref.task_dim(), 2);
  EXPECT_DOUBLE_EQ(ref.at(0.0).pos[0], t.start_q[0]);
  EXPECT_DOUBLE_EQ(ref.at(2.0).pos[1], t.goal[1]);
}

TEST(ReferenceTrajectory, ReachTasksStartAtTheForwardKinematics) {
  const PlantSpec spec = default_arm(3);
  const TrajectorySpec t = make_target(spec, TaskSpace::kEndEffector, 1, 2.0);
  const ReferenceTrajectory ref(t, spec);
  EXPECT_EQ(ref.task_dim(), 2);
  const Eigen::Vector2d ee = fk_ee_pos(t.start_q, spec);
  EXPECT_DOUBLE_EQ(ref.at(0.0).pos[0], ee[0]);
  EXPECT_DOUBLE_EQ(ref.at(0.0).pos[1], ee[1]);
  EXPECT_NEAR(ref.at(2.0).pos[0], t.goal[0], 1e-12);
}

TEST(ReferenceTrajectory, HopperTasksCarryTheContactProfile) {
  const PlantSpec spec = default_hopper();
  const TrajectorySpec t = make_target(spec, TaskSpace::kHopperHeight, 0, 2.4);
  const ReferenceTrajectory ref(t, spec);
  EXPECT_EQ(ref.task_dim(), 1);
  EXPECT_TRUE(ref.at(0.0).in_contact);
  EXPECT_GT(ref.at(0.0).force, 0.0);
  double apex = -1.0;
  for (double s = 0.0; s <= 2.4; s += 1e-3) apex = std::max(apex, ref.at(s).pos[0]);
  EXPECT_NEAR(apex, t.goal[0], 1e-5);
}

TEST(TaskSpaceNames, RoundTrip) {
  for (TaskSpace s : {TaskSpace::kJoint, TaskSpace::kEndEffector, TaskSpace::kHopperHeight}) {
    EXPECT_EQ(task_space_from_name(task_space_name(s)), s);
  }
  EXPECT_THROW(task_space_from_name("cartesian"), ConfigError);
}

}  // namespace
