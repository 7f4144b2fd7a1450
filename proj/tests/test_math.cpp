#include "xplorer/math.hpp"

#include <gtest/gtest.h>

#include <random>

namespace xpl {
namespace {

TEST(Math, HatVeeRoundTrip) {
  const Vec3 a(0.3, -1.2, 2.5);
  const Vec3 b(-0.7, 0.4, 1.1);
  EXPECT_LT((hat(a) * b - a.cross(b)).norm(), 1e-15);
  EXPECT_LT((vee(hat(a)) - a).norm(), 1e-15);
}

TEST(Math, RotZQuarterTurn) {
  EXPECT_LT((rot_z(kPi / 2) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_NEAR(yaw_of(rot_z(0.7)), 0.7, 1e-15);
}

TEST(Math, ExpLogInverse) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 w(u(rng), u(rng), u(rng));
    const Mat3 r = exp_so3(w);
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    if (w.norm() < kPi - 1e-3) {
      EXPECT_LT((log_so3(r) - w).norm(), 1e-9);
    }
  }
}

TEST(Math, OrthonormalizeRestoresRotation) {
  Mat3 r = exp_so3(Vec3(0.2, -0.4, 1.0));
  r(0, 1) += 1e-4;
  r(2, 0) -= 2e-4;
  const Mat3 q = orthonormalize(r);
  EXPECT_LT((q.transpose() * q - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-14);
}

TEST(Math, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - a, 2 * kPi), 0.0, 1e-12);
  }
}

TEST(Math, FormatSigRoundTrips) {
  for (double x : {0.0, 1.0, -1.5, 1.0 / 3.0, 123456789.0, 1e-7, -2.5e12}) {
    EXPECT_EQ(parse_double(format_sig(x)), quantize_sig(x));
  }
  EXPECT_EQ(format_sig(0.1), "0.1");
  EXPECT_EQ(format_sig(1.0 / 3.0), "0.333333333");
}

TEST(Math, ParseDoubleRejectsGarbage) {
  EXPECT_THROW(parse_double("1.0x"), std::invalid_argument);
  EXPECT_THROW(parse_double(""), std::invalid_argument);
  EXPECT_DOUBLE_EQ(parse_double(" 2.5 "), 2.5);
}

}  // namespace
}  // namespace xpl
