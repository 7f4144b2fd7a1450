#include "xplorer/math.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace xpl {

Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat3 rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

Mat3 exp_so3(const Vec3& w) {
  const double th = w.norm();
  const Mat3 k = hat(w);
  if (th < 1e-8) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Mat3::Identity() + (std::sin(th) / th) * k +
         ((1.0 - std::cos(th)) / (th * th)) * k * k;
}

Vec3 log_so3(const Mat3& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double th = std::acos(c);
  const Vec3 axis_raw = vee(r - r.transpose());
  if (th < 1e-8) {
    return 0.5 * axis_raw;
  }
  if (kPi - th < 1e-6) {
    // Near a half turn: take the axis from the symmetric part.
    const Mat3 b = 0.5 * (r + Mat3::Identity());
    Eigen::Index i = 0;
    b.diagonal().maxCoeff(&i);
    Vec3 axis = b.col(i) / std::sqrt(std::max(b(i, i), 1e-300));
    axis.normalize();
    return th * axis;
  }
  return (th / (2.0 * std::sin(th))) * axis_raw;
}

Mat3 orthonormalize(const Mat3& r) {
  Vec3 c0 = r.col(0).normalized();
  Vec3 c1 = r.col(1) - c0.dot(r.col(1)) * c0;
  c1.normalize();
  Vec3 c2 = c0.cross(c1);
  Mat3 out;
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c2;
  return out;
}

double yaw_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

bool all_finite(const Vec3& v) { return v.allFinite(); }
bool all_finite(const Mat3& m) { return m.allFinite(); }

std::string format_sig(double x) {
  std::array<char, 48> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 9);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

double quantize_sig(double x) { return parse_double(format_sig(x)); }

}  // namespace xpl
