#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace xpl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

// Skew-symmetric matrix such that hat(a) * b = a x b.
Mat3 hat(const Vec3& a);
Vec3 vee(const Mat3& m);

// Rotation about the z axis by angle (rad).
Mat3 rot_z(double angle);

// Exponential and logarithm on SO(3).
Mat3 exp_so3(const Vec3& w);
Vec3 log_so3(const Mat3& r);

// Gram-Schmidt on the columns; result is orthonormal with det +1.
Mat3 orthonormalize(const Mat3& r);

// Z-Y-X yaw of a body-to-world rotation.
double yaw_of(const Mat3& r);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

bool all_finite(const Vec3& v);
bool all_finite(const Mat3& m);

// Shortest round-trip text at 9 significant digits, and its parsed value.
std::string format_sig(double x);
double quantize_sig(double x);
double parse_double(std::string_view s);

inline Vec2 unit2(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace xpl
