#include "xplorer/estimator.hpp"

#include <gtest/gtest.h>

#include <random>

namespace xpl {
namespace {

TEST(Filters, ConstantPassesThrough) {
  ArmAngleFilter f;
  std::array<double, kArmCount> y{};
  for (int k = 0; k < 200; ++k) y = f.step({0.05, -0.02, 0.0, 0.1});
  EXPECT_NEAR(y[0], 0.05, 1e-9);
  EXPECT_NEAR(y[1], -0.02, 1e-9);
  EXPECT_NEAR(y[3], 0.1, 1e-9);
}

TEST(Filters, MedianRemovesSingleSpike) {
  MedianFilter m(5);
  for (int k = 0; k < 10; ++k) {
    const double x = k == 6 ? 100.0 : 1.0;
    EXPECT_DOUBLE_EQ(m.step(x), 1.0);
  }
}

TEST(Filters, LowPassStepRisesMonotonically) {
  const double alpha = 0.5;
  LowPass lp(alpha);
  lp.step(0.0);
  double prev = 0.0;
  int crossed = -1;
  for (int k = 1; k <= 50; ++k) {
    const double y = lp.step(1.0);
    ASSERT_GE(y, prev);
    prev = y;
    if (crossed < 0 && y >= 0.95) crossed = k;
  }
  // 3/alpha samples at unit rate bound the 95% crossing of a first-order response.
  EXPECT_GT(crossed, 0);
  EXPECT_LE(crossed, static_cast<int>(std::ceil(3.0 / alpha)));
}

TEST(Filters, NotchHasUnityDcAndRejectsCenter) {
  Notch n(7.0, 4.0, 50.0);
  double y = 0.0;
  for (int k = 0; k < 500; ++k) y = n.step(2.0);
  EXPECT_NEAR(y, 2.0, 1e-9);
  Notch c(7.0, 4.0, 50.0);
  double peak = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double out = c.step(std::sin(2.0 * kPi * 7.0 * k / 50.0));
    if (k > 1500) peak = std::max(peak, std::abs(out));
  }
  EXPECT_LT(peak, 1e-3);
}

TEST(Filters, NanReplacedAndCounted) {
  ArmAngleFilter f;
  f.step({0.1, 0.1, 0.1, 0.1});
  const auto y = f.step({std::numeric_limits<double>::quiet_NaN(), 0.1, 0.1, 0.1});
  EXPECT_TRUE(std::isfinite(y[0]));
  EXPECT_EQ(f.nan_count(), 1);
}

TEST(Filters, BankValidation) {
  FilterBank b;
  EXPECT_NO_THROW(b.validate());
  b.median_window = 4;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = {};
  b.lpf_alpha = 0.0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = {};
  b.bandstop_center = 30.0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  EXPECT_GT(FilterBank{}.arm_group_delay_samples(), 0.0);
}

TEST(ArmForce, ZeroDeflectionDecaysToZero) {
  ArmParams arm;
  FilterBank bank;
  double f = 0.7;
  for (int k = 0; k < 500; ++k) f = estimate_arm_force(0.0, f, arm, bank, 0.02);
  EXPECT_NEAR(f, 0.0, 1e-12);
}

TEST(ArmForce, HeldDeflectionGivesUnitForce) {
  ArmParams arm;
  FilterBank bank;
  double f = 0.0;
  const double target = arm_spring_force(0.08646, arm);
  double prev = 0.0;
  for (int k = 0; k < 500; ++k) {
    f = estimate_arm_force(0.08646, f, arm, bank, 0.02);
    ASSERT_GE(f, prev);
    ASSERT_LE(f, target + 1e-12);
    prev = f;
  }
  EXPECT_NEAR(f, 1.307 * 0.08646 / 0.113, 1e-9);
  EXPECT_NEAR(f, 1.0, 1e-4);
}

TEST(ArmForce, WorldRotationChain) {
  const Vec3 w = arm_force_to_world(1.0, 2, 0.0, Mat3::Identity());
  EXPECT_LT((w - rot_z(-kPi / 4) * Vec3::UnitX()).norm(), 1e-15);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double f = u(rng);
    const Mat3 R = exp_so3(Vec3(u(rng), u(rng), u(rng)) * 0.3);
    for (int i = 1; i <= kArmCount; ++i) {
      ASSERT_NEAR(arm_force_to_world(f, i, 0.1 * u(rng), R).norm(), std::abs(f), 1e-12);
    }
  }
}

TEST(ComForce, HoverBalances) {
  BodyParams body;
  const Vec3 f = estimate_com_force(Vec3::Zero(), body.mass * body.gravity / kThrustScale,
                                    Mat3::Identity(), body);
  EXPECT_LT(f.norm(), 1e-12);
}

TEST(ComForce, UnitAcceleration) {
  BodyParams body;
  const Vec3 f = estimate_com_force(Vec3(1.0, 0.0, 0.0), body.mass * body.gravity / kThrustScale,
                                    Mat3::Identity(), body);
  EXPECT_NEAR(f.x(), 1.12, 1e-12);
  EXPECT_NEAR(f.z(), 0.0, 1e-12);
}

TEST(Indicator, ThresholdRule) {
  EXPECT_EQ(contact_indicator({0, 0, 0, 0}, 0.05), 0);
  EXPECT_EQ(contact_indicator({0.1, 0, 0, 0}, 0.05), 1);
  EXPECT_EQ(contact_indicator({0.02, 0.02, 0, 0}, 0.05), 0);
  EXPECT_EQ(contact_indicator({-0.03, 0.03, 0, 0}, 0.05), 1);
}

TEST(Fusion, Degeneracies) {
  const Vec3 com(1.25, -0.5, 0.1);
  const Vec3 arms(0.8, 0.3, -0.2);
  EXPECT_EQ(fuse_forces(com, arms, 0, Vec3(10, 10, 10), 0.02), com);
  EXPECT_EQ(fuse_forces(com, arms, 1, Vec3::Zero(), 0.02), arms);
  EXPECT_EQ(fuse_forces(com, arms, 1, Vec3(100, 100, 100), 0.02), com);
}

TEST(Fusion, GainClampedAndConvex) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 rate(u(rng), u(rng), u(rng));
    const Vec3 kappa = fusion_gain(rate, 0.02);
    ASSERT_GE(kappa.minCoeff(), 0.0);
    ASSERT_LE(kappa.maxCoeff(), 1.0);
    const Vec3 com(u(rng), u(rng), u(rng));
    const Vec3 arms(u(rng), u(rng), u(rng));
    const Vec3 f = fuse_forces(com, arms, 1, rate, 0.02);
    for (int j = 0; j < 3; ++j) {
      ASSERT_GE(f[j], std::min(com[j], arms[j]) - 1e-9);
      ASSERT_LE(f[j], std::max(com[j], arms[j]) + 1e-9);
    }
  }
}

TEST(Frames, WorldToBody) {
  const Vec3 f(0.3, -1.0, 2.0);
  EXPECT_EQ(world_to_body(f, Mat3::Identity()), f);
  EXPECT_LT((world_to_body(Vec3::UnitX(), rot_z(kPi / 2)) - Vec3(0, -1, 0)).norm(), 1e-15);
  const Mat3 R = exp_so3(Vec3(0.4, -0.2, 1.3));
  EXPECT_LT((world_to_body(R * f, R) - f).norm(), 1e-12);
}

TEST(YawObserver, QuietStaysZero) {
  MomentumObserver obs(BodyParams{}.inertia, 10.0);
  for (int k = 0; k < 100; ++k) obs.update(Vec3::Zero(), Vec3::Zero(), 0.02);
  EXPECT_EQ(obs.estimate(), Vec3::Zero());
}

TEST(YawObserver, ConvergesToAppliedTorque) {
  const double k_o = 10.0;
  const double dt = 0.002;
  BodyParams body;
  MomentumObserver obs(body.inertia, k_o);
  VehicleState s;
  Wrench ext;
  ext.torque = Vec3(0.0, 0.0, 0.1);
  double t = 0.0;
  obs.update(s.omega, Vec3::Zero(), dt);
  while (t < 5.0 / k_o) {
    s = step_rigid_body(s, body.mass * body.gravity, Vec3::Zero(), ext, body, dt);
    obs.update(s.omega, Vec3::Zero(), dt);
    t += dt;
  }
  EXPECT_NEAR(obs.estimate().z(), 0.1, 1e-3);
  EXPECT_GT(obs.estimate().z(), 0.0);
}

TEST(Estimator, HoverPacketGivesZero) {
  BodyParams body;
  Estimator est(body, {}, {});
  SensorPacket pkt;
  pkt.thrust_cmd = body.mass * body.gravity / kThrustScale;
  for (int k = 0; k < 20; ++k) est.update(pkt);
  EXPECT_EQ(est.last().upsilon, 0);
  EXPECT_LT(est.last().fused.norm(), 1e-12);
  EXPECT_EQ(est.last().fused, est.last().com);
}

TEST(Estimator, HeldArmDeflectionSettlesOnArmPath) {
  BodyParams body;
  ArmParams arm;
  Estimator est(body, arm, {});
  SensorPacket pkt;
  pkt.thrust_cmd = body.mass * body.gravity / kThrustScale;
  pkt.theta = {0.08646, 0.0, 0.0, 0.0};
  for (int k = 0; k < 200; ++k) est.update(pkt);
  const ForceEstimate& e = est.last();
  EXPECT_EQ(e.upsilon, 1);
  EXPECT_NEAR(e.per_arm[0].norm(), 1.0, 1e-3);
  EXPECT_NEAR(arm_load(e), 1.0, 1e-3);
  EXPECT_LT((e.fused - e.per_arm[0]).norm(), 1e-9);
}

}  // namespace
}  // namespace xpl
