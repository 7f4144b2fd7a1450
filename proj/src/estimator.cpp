#include "xplorer/estimator.hpp"

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

namespace xpl {

void FilterBank::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(median_window >= 1 && median_window % 2 == 1, "estimator.median_window must be odd >= 1");
  require(accel_median_window >= 1 && accel_median_window % 2 == 1,
          "estimator.accel_median_window must be odd >= 1");
  require(lpf_alpha > 0.0 && lpf_alpha <= 1.0, "estimator.lpf_alpha must lie in (0, 1]");
  require(accel_lpf_alpha > 0.0 && accel_lpf_alpha <= 1.0,
          "estimator.accel_lpf_alpha must lie in (0, 1]");
  require(K_I > 0.0, "estimator.K_I must be > 0");
  require(xi_f > 0.0, "estimator.xi_f must be > 0");
  require(theta_th > 0.0, "estimator.theta_th must be > 0");
  require(K_o > 0.0, "estimator.K_o must be > 0");
  require(rate > 0.0, "estimator rate must be > 0");
  if (bandstop) {
    require(bandstop_center > 0.0 && bandstop_center < 0.5 * rate,
            "estimator.bandstop_center must lie below Nyquist");
    require(bandstop_width > 0.0, "estimator.bandstop_width must be > 0");
  }
}

double FilterBank::arm_group_delay_samples() const {
  double d = 0.5 * (median_window - 1) + (1.0 - lpf_alpha) / lpf_alpha;
  if (bandstop) d += Notch(bandstop_center, bandstop_width, rate).group_delay_dc();
  return d;
}

double MedianFilter::step(double x) {
  buf_.push_back(x);
  if (static_cast<int>(buf_.size()) > window_) buf_.pop_front();
  std::vector<double> tmp(buf_.begin(), buf_.end());
  const auto mid = tmp.begin() + static_cast<long>(tmp.size() / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  if (tmp.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(tmp.begin(), mid);
  return 0.5 * (lo + hi);
}

double LowPass::step(double x) {
  if (!primed_) {
    y_ = x;
    primed_ = true;
  } else {
    y_ += alpha_ * (x - y_);
  }
  return y_;
}

Notch::Notch(double center_hz, double width_hz, double rate_hz) {
  const double w0 = 2.0 * kPi * center_hz / rate_hz;
  const double q = center_hz / width_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  b0_ = 1.0 / a0;
  b1_ = -2.0 * std::cos(w0) / a0;
  b2_ = 1.0 / a0;
  a1_ = -2.0 * std::cos(w0) / a0;
  a2_ = (1.0 - alpha) / a0;
}

double Notch::step(double x) {
  if (!primed_) {
    x1_ = x2_ = y1_ = y2_ = x;
    primed_ = true;
  }
  const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
  x2_ = x1_;
  x1_ = x;
  y2_ = y1_;
  y1_ = y;
  return y;
}

double Notch::group_delay_dc() const {
  auto phase = [&](double w) {
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    const std::complex<double> h = (b0_ + b1_ * z1 + b2_ * z2) / (1.0 + a1_ * z1 + a2_ * z2);
    return std::arg(h);
  };
  const double dw = 1e-5;
  return -(phase(dw) - phase(-dw)) / (2.0 * dw);
}

ArmAngleFilter::ArmAngleFilter(const FilterBank& bank) : bandstop_(bank.bandstop) {
  for (int i = 0; i < kArmCount; ++i) {
    median_[i] = MedianFilter(bank.median_window);
    lpf_[i] = LowPass(bank.lpf_alpha);
    if (bandstop_) notch_[i] = Notch(bank.bandstop_center, bank.bandstop_width, bank.rate);
  }
}

std::array<double, kArmCount> ArmAngleFilter::step(const std::array<double, kArmCount>& raw) {
  std::array<double, kArmCount> out{};
  for (int i = 0; i < kArmCount; ++i) {
    double x = raw[i];
    if (!std::isfinite(x)) {
      x = last_valid_[i];
      ++nan_count_;
    } else {
      last_valid_[i] = x;
    }
    double y = lpf_[i].step(median_[i].step(x));
    if (bandstop_) y = notch_[i].step(y);
    out[i] = y;
  }
  return out;
}

double arm_spring_force(double theta, const ArmParams& arm) {
  return arm.stiffness * theta / arm.lever;
}

double estimate_arm_force(double theta, double prev_estimate, const ArmParams& arm,
                          const FilterBank& bank, double dt) {
  return prev_estimate + dt * bank.K_I * (arm_spring_force(theta, arm) - prev_estimate);
}

Vec3 arm_force_to_world(double f_arm, int i, double theta, const Mat3& R, const ArmParams& arm) {
  return R * (arm_rotation(arm_deflection_angle(i, theta, arm)) * Vec3(f_arm, 0.0, 0.0));
}

Vec3 estimate_com_force(const Vec3& accel, double f_cmd_normalized, const Mat3& R,
                        const BodyParams& body) {
  const double f = kThrustScale * f_cmd_normalized;
  return body.mass * accel - body.mass * body.gravity * Vec3::UnitZ() + f * (R * Vec3::UnitZ());
}

int contact_indicator(const std::array<double, kArmCount>& theta, double theta_th) {
  double s = 0.0;
  for (double th : theta) s += std::abs(th);
  return s > theta_th ? 1 : 0;
}

Vec3 fusion_gain(const Vec3& com_rate, double xi_f) {
  return (xi_f * com_rate.cwiseAbs()).cwiseMax(0.0).cwiseMin(1.0);
}

Vec3 fuse_forces(const Vec3& com, const Vec3& arm_sum, int upsilon, const Vec3& com_rate,
                 double xi_f) {
  if (upsilon == 0) return com;
  const Vec3 kappa = fusion_gain(com_rate, xi_f);
  return kappa.cwiseProduct(com) + (Vec3::Ones() - kappa).cwiseProduct(arm_sum);
}

Vec3 world_to_body(const Vec3& f, const Mat3& R) { return R.transpose() * f; }

Vec3 MomentumObserver::update(const Vec3& omega, const Vec3& tau_mean, double dt) {
  const Vec3 l = inertia_ * omega;
  if (!primed_) {
    primed_ = true;
    l0_ = l;
    prev_omega_ = omega;
    return est_;
  }
  const Vec3 lp = inertia_ * prev_omega_;
  integral_ += dt * (tau_mean + lp.cross(prev_omega_) + est_);
  est_ = gain_ * (l - l0_ - integral_);
  prev_omega_ = omega;
  return est_;
}

void SensorPacket::quantize() {
  t = quantize_sig(t);
  for (double& th : theta) th = quantize_sig(th);
  for (int k = 0; k < 3; ++k) {
    accel[k] = quantize_sig(accel[k]);
    omega[k] = quantize_sig(omega[k]);
    torque_mean[k] = quantize_sig(torque_mean[k]);
    for (int j = 0; j < 3; ++j) R(k, j) = quantize_sig(R(k, j));
  }
  thrust_cmd = quantize_sig(thrust_cmd);
}

Estimator::Estimator(BodyParams body, ArmParams arm, FilterBank bank)
    : body_(std::move(body)),
      arm_(std::move(arm)),
      bank_(bank),
      arm_filter_(bank),
      thrust_median_(bank.accel_median_window),
      thrust_lpf_(bank.accel_lpf_alpha),
      yaw_obs_(body_.inertia, bank.K_o) {
  bank_.validate();
  for (int k = 0; k < 3; ++k) {
    acc_median_[k] = MedianFilter(bank.accel_median_window);
    acc_lpf_[k] = LowPass(bank.accel_lpf_alpha);
  }
}

const ForceEstimate& Estimator::update(const SensorPacket& pkt) {
  const double dt = 1.0 / bank_.rate;
  ForceEstimate e;
  e.theta = arm_filter_.step(pkt.theta);
  Vec3 arm_sum = Vec3::Zero();
  for (int i = 0; i < kArmCount; ++i) {
    arm_est_[i] = estimate_arm_force(e.theta[i], arm_est_[i], arm_, bank_, dt);
    e.per_arm[i] = arm_force_to_world(arm_est_[i], i + 1, e.theta[i], pkt.R, arm_);
    arm_sum += e.per_arm[i];
  }
  Vec3 acc;
  for (int k = 0; k < 3; ++k) acc[k] = acc_lpf_[k].step(acc_median_[k].step(pkt.accel[k]));
  const double thrust = thrust_lpf_.step(thrust_median_.step(pkt.thrust_cmd));
  e.com = estimate_com_force(acc, thrust, pkt.R, body_);
  const Vec3 rate = primed_ ? Vec3((e.com - prev_com_) / dt) : Vec3::Zero();
  primed_ = true;
  prev_com_ = e.com;
  e.upsilon = contact_indicator(e.theta, bank_.theta_th);
  e.kappa = fusion_gain(rate, bank_.xi_f);
  e.fused = fuse_forces(e.com, arm_sum, e.upsilon, rate, bank_.xi_f);
  e.body = world_to_body(e.fused, pkt.R);
  e.yaw_torque = yaw_obs_.update(pkt.omega, pkt.torque_mean, dt).z();
  out_ = e;
  return out_;
}

double arm_load(const ForceEstimate& est) {
  double sum = 0.0;
  for (const auto& f : est.per_arm) sum += f.norm();
  return sum;
}

}  // namespace xpl
