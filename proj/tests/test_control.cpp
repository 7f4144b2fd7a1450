#include "xplorer/control.hpp"

#include <gtest/gtest.h>

#include <random>

namespace xpl {
namespace {

constexpr double kDtCtrl = 0.01;

VehicleState hovering_at(const Vec3& x) {
  VehicleState s;
  s.x = x;
  return s;
}

TEST(Position, EquilibriumThrust) {
  BodyParams body;
  PpidController c(body, {});
  const Vec3 x(0.0, 0.0, -0.7);
  const PositionOutput out = c.ppid_position(hovering_at(x), x, 0.0, Vec3::Zero(), kDtCtrl);
  EXPECT_NEAR(out.thrust, body.mass * body.gravity, 1e-6);
  EXPECT_LT((out.R_d - Mat3::Identity()).norm(), 1e-12);
}

TEST(Position, ClimbDemandsMoreThrust) {
  BodyParams body;
  PpidController c(body, {});
  const Vec3 x(0.0, 0.0, -0.7);
  const PositionOutput out =
      c.ppid_position(hovering_at(x), x - Vec3::UnitZ(), 0.0, Vec3::Zero(), kDtCtrl);
  EXPECT_GT(out.thrust, body.mass * body.gravity);
}

TEST(Position, VelocityCommandSaturates) {
  PpidGains g;
  PpidController c({}, g);
  const PositionOutput out = c.ppid_position(hovering_at(Vec3::Zero()), Vec3(100.0, 0.0, 0.0), 0.0,
                                             Vec3::Zero(), kDtCtrl);
  EXPECT_NEAR(out.vel_cmd.norm(), g.v_limit, 1e-12);
}

TEST(Attitude, AlignedGivesZeroTorque) {
  PpidController c({}, {});
  EXPECT_EQ(c.ppid_attitude(VehicleState{}, Mat3::Identity(), kDtCtrl), Vec3::Zero());
}

TEST(Attitude, YawErrorDecoupled) {
  PpidController c({}, {});
  const Vec3 tau = c.ppid_attitude(VehicleState{}, rot_z(0.1), kDtCtrl);
  EXPECT_GT(tau.z(), 0.0);
  EXPECT_NEAR(tau.x(), 0.0, 1e-12);
  EXPECT_NEAR(tau.y(), 0.0, 1e-12);
}

TEST(Attitude, ThrustAxisFrame) {
  const Vec3 b3 = Vec3(0.1, -0.2, 1.0).normalized();
  const Mat3 r = attitude_from_thrust_axis(b3, 0.4);
  EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT((r.col(2) - b3).norm(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

TEST(ClosedLoop, RandomSetpointsStayFiniteAndSaturated) {
  BodyParams body;
  PpidGains g;
  PpidController c(body, g);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  VehicleState s = hovering_at(Vec3(0.0, 0.0, -1.0));
  Setpoint sp;
  Command cmd;
  const double dt = 1.0 / 500.0;
  for (int k = 0; k < 100000; ++k) {
    if (k % 1000 == 0) sp.r_d = Vec3(u(rng), u(rng), -1.0 + 0.25 * u(rng));
    if (k % 5 == 0) {
      cmd = c.step(s, sp, kDtCtrl);
      ASSERT_GE(cmd.thrust, 0.0);
      ASSERT_LE(cmd.thrust, g.thrust_max);
      ASSERT_TRUE((cmd.torque.cwiseAbs().array() <= g.torque_max.array() + 1e-15).all());
    }
    s = step_rigid_body(s, cmd.thrust, cmd.torque, {}, body, dt);
    ASSERT_TRUE(s.valid(ArmParams{}));
  }
}

TEST(ClosedLoop, HalfMetreStepWithoutOvershoot) {
  BodyParams body;
  PpidController c(body, {});
  VehicleState s = hovering_at(Vec3(0.0, 0.0, -0.7));
  Setpoint sp;
  sp.r_d = Vec3(0.5, 0.0, -0.7);
  Command cmd;
  const double dt = 1.0 / 500.0;
  double peak = 0.0;
  double rise = -1.0;
  for (int k = 0; k < 5000; ++k) {
    if (k % 5 == 0) cmd = c.step(s, sp, kDtCtrl);
    s = step_rigid_body(s, cmd.thrust, cmd.torque, {}, body, dt);
    peak = std::max(peak, s.x.x());
    if (rise < 0.0 && s.x.x() >= 0.45) rise = k * dt;
  }
  EXPECT_GT(rise, 0.0);
  EXPECT_LT(rise, 3.0);
  EXPECT_LT(peak, 0.5 * 1.05);
  EXPECT_NEAR(s.x.x(), 0.5, 1e-3);
}

TEST(Admittance, UnforcedReturnsToNominal) {
  Admittance a;
  const Vec3 r_star(1.0, 2.0, -0.7);
  std::pair<Vec3, double> out;
  for (int k = 0; k < 10; ++k) out = a.reshape(Vec3(3.0, 0.0, 0.0), 0.5, r_star, 0.3, kDtCtrl);
  for (int k = 0; k < 5000; ++k) out = a.reshape(Vec3::Zero(), 0.0, r_star, 0.3, kDtCtrl);
  EXPECT_LT((out.first - r_star).norm(), 1e-6);
  EXPECT_NEAR(out.second, 0.3, 1e-3);
}

TEST(Admittance, SteadyStateOffset) {
  Admittance a;
  std::pair<Vec3, double> out;
  for (int k = 0; k < 2000; ++k) out = a.reshape(Vec3(0.5, 0.0, 0.0), 0.0, Vec3::Zero(), 0.0, kDtCtrl);
  EXPECT_NEAR(out.first.x(), 0.5 / 24.5, 1e-9);
  EXPECT_NEAR(out.first.x(), 0.0204, 1e-4);
}

TEST(Admittance, AltitudeNeverReshaped) {
  Admittance a;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Vec3 r_star(0.0, 0.0, -0.7);
  for (int k = 0; k < 1000; ++k) {
    const auto out = a.reshape(Vec3(u(rng), u(rng), u(rng)), u(rng), r_star, 0.0, kDtCtrl);
    ASSERT_EQ(out.first.z(), r_star.z());
  }
}

TEST(Admittance, SteadyStateLawRandomErrors) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    AdmittanceParams p;
    p.delta_f_des = Vec3(u(rng), u(rng), 0.0);
    Admittance a(p);
    const Vec3 fused(u(rng), u(rng), 0.0);
    const Vec3 r_star(u(rng), u(rng), -0.7);
    std::pair<Vec3, double> out;
    for (int k = 0; k < 1000; ++k) out = a.reshape(fused, 0.0, r_star, 0.0, kDtCtrl);
    const Vec3 lhs(p.K[0] * (out.first.x() - r_star.x()), p.K[1] * (out.first.y() - r_star.y()), 0.0);
    const Vec3 rhs = fused - p.delta_f_des;
    ASSERT_LT((lhs.head<2>() - rhs.head<2>()).norm(), 1e-3);
  }
}

TEST(Admittance, RejectsBadParams) {
  AdmittanceParams p;
  p.m_v = 0.0;
  EXPECT_THROW(Admittance{p}, std::invalid_argument);
  p = {};
  p.K[0] = -1.0;
  EXPECT_THROW(Admittance{p}, std::invalid_argument);
}

TEST(Recovery, DisplacedAgainstApproach) {
  const Vec3 pose(1.0, 2.0, -0.7);
  const Setpoint sp = recovery_setpoint(Vec3(1.0, 0.0, 0.0), pose, 0.2, 0.5);
  EXPECT_LT((sp.r_d - pose - Vec3(-0.5, 0.0, 0.0)).norm(), 1e-15);
  EXPECT_EQ(sp.mode, Mode::Yield);
  EXPECT_EQ(sp.psi_d, 0.2);
  EXPECT_EQ(recovery_setpoint(Vec3::Zero(), pose, 0.0, 0.5).r_d, pose);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 v(u(rng), u(rng), u(rng));
    ASSERT_LT((recovery_setpoint(v, pose, 0.0, 0.5).r_d - pose).dot(v), 0.0);
  }
}

TEST(Modes, Selection) {
  EXPECT_EQ(select_mode(Mission::Explore, false, false), Mode::StaticWrench);
  EXPECT_EQ(select_mode(Mission::StaticWrench, false, false), Mode::StaticWrench);
  EXPECT_EQ(select_mode(Mission::Cob, true, false), Mode::Yield);
  EXPECT_EQ(select_mode(Mission::Cob, false, true), Mode::Yield);
  EXPECT_EQ(select_mode(Mission::Cob, false, false), Mode::DisturbanceReject);
  EXPECT_EQ(select_mode(Mission::Hover, false, false), Mode::DisturbanceReject);
}

TEST(Gains, Validation) {
  PpidGains g;
  EXPECT_NO_THROW(g.validate());
  g.att_p.x() = -1.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.thrust_max = 0.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace xpl
