#pragma once

#include "xplorer/math.hpp"
#include "xplorer/sim_core.hpp"

#include <array>
#include <deque>

namespace xpl {

inline constexpr double kThrustScale = 32.5;  // N per unit normalized command

struct FilterBank {
  int median_window = 3;
  double lpf_alpha = 0.5;
  bool bandstop = true;
  double bandstop_center = 7.0;  // Hz
  double bandstop_width = 4.0;   // Hz, full width
  double K_I = 20.0;
  double xi_f = 0.02;
  double theta_th = 0.035;
  double K_o = 10.0;
  double rate = 50.0;  // Hz
  int accel_median_window = 3;
  double accel_lpf_alpha = 0.5;

  void validate() const;
  // Low-frequency group delay of the arm-angle chain, in samples.
  double arm_group_delay_samples() const;
};

// Median over a sliding window; partial windows at start-up.
class MedianFilter {
 public:
  explicit MedianFilter(int window = 1) : window_(window) {}
  double step(double x);
  void reset() { buf_.clear(); }

 private:
  int window_;
  std::deque<double> buf_;
};

// First-order low-pass y += alpha * (x - y), initialized to the first sample.
class LowPass {
 public:
  explicit LowPass(double alpha = 1.0) : alpha_(alpha) {}
  double step(double x);

 private:
  double alpha_;
  double y_ = 0.0;
  bool primed_ = false;
};

// Second-order notch (unity DC gain), initialized at steady state.
class Notch {
 public:
  Notch() = default;
  Notch(double center_hz, double width_hz, double rate_hz);
  double step(double x);
  double group_delay_dc() const;

 private:
  double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0, a1_ = 0.0, a2_ = 0.0;
  double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
  bool primed_ = false;
};

class ArmAngleFilter {
 public:
  explicit ArmAngleFilter(const FilterBank& bank = {});
  std::array<double, kArmCount> step(const std::array<double, kArmCount>& raw);
  long nan_count() const { return nan_count_; }

 private:
  bool bandstop_;
  std::array<MedianFilter, kArmCount> median_;
  std::array<LowPass, kArmCount> lpf_;
  std::array<Notch, kArmCount> notch_;
  std::array<double, kArmCount> last_valid_{};
  long nan_count_ = 0;
};

// Quasi-static spring inversion: force normal to the arm.
double arm_spring_force(double theta, const ArmParams& arm);

// One observer step; returns the updated arm-force estimate (N, arm frame).
double estimate_arm_force(double theta, double prev_estimate, const ArmParams& arm,
                          const FilterBank& bank, double dt);

Vec3 arm_force_to_world(double f_arm, int i, double theta, const Mat3& R,
                        const ArmParams& arm = {});

Vec3 estimate_com_force(const Vec3& accel, double f_cmd_normalized, const Mat3& R,
                        const BodyParams& body);

int contact_indicator(const std::array<double, kArmCount>& theta, double theta_th);

Vec3 fusion_gain(const Vec3& com_rate, double xi_f);

Vec3 fuse_forces(const Vec3& com, const Vec3& arm_sum, int upsilon, const Vec3& com_rate,
                 double xi_f);

Vec3 world_to_body(const Vec3& f, const Mat3& R);

class MomentumObserver {
 public:
  MomentumObserver(Mat3 inertia, double gain) : inertia_(std::move(inertia)), gain_(gain) {}
  // Omega sampled now; tau_mean is the commanded torque averaged over the last interval.
  Vec3 update(const Vec3& omega, const Vec3& tau_mean, double dt);
  const Vec3& estimate() const { return est_; }

 private:
  Mat3 inertia_;
  double gain_;
  bool primed_ = false;
  Vec3 l0_ = Vec3::Zero();
  Vec3 integral_ = Vec3::Zero();
  Vec3 est_ = Vec3::Zero();
  Vec3 prev_omega_ = Vec3::Zero();
};

struct SensorPacket {
  double t = 0.0;
  std::array<double, kArmCount> theta{};
  Vec3 accel = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  double thrust_cmd = 0.0;  // normalized
  Vec3 torque_mean = Vec3::Zero();

  // Rounds every field to the trace precision so replays see identical inputs.
  void quantize();
};

struct ForceEstimate {
  std::array<Vec3, kArmCount> per_arm{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<double, kArmCount> theta{};
  Vec3 com = Vec3::Zero();
  Vec3 fused = Vec3::Zero();
  Vec3 body = Vec3::Zero();
  Vec3 kappa = Vec3::Zero();
  int upsilon = 0;
  double yaw_torque = 0.0;
};

// Total contact load carried by the arms, sum of per-arm force magnitudes.
double arm_load(const ForceEstimate& est);

class Estimator {
 public:
  Estimator(BodyParams body, ArmParams arm, FilterBank bank);
  const ForceEstimate& update(const SensorPacket& pkt);
  const ForceEstimate& last() const { return out_; }
  const FilterBank& bank() const { return bank_; }
  long nan_count() const { return arm_filter_.nan_count(); }

 private:
  BodyParams body_;
  ArmParams arm_;
  FilterBank bank_;
  ArmAngleFilter arm_filter_;
  std::array<double, kArmCount> arm_est_{};
  std::array<MedianFilter, 3> acc_median_;
  std::array<LowPass, 3> acc_lpf_;
  MedianFilter thrust_median_;
  LowPass thrust_lpf_;
  MomentumObserver yaw_obs_;
  bool primed_ = false;
  Vec3 prev_com_ = Vec3::Zero();
  ForceEstimate out_;
};

}  // namespace xpl
