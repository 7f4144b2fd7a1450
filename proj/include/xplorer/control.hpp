#pragma once

#include "xplorer/math.hpp"
#include "xplorer/sim_core.hpp"

#include <array>
#include <optional>

namespace xpl {

struct PpidGains {
  Vec3 pos_p{1.0, 1.0, 1.5};
  Vec3 vel_p{3.0, 3.0, 4.0};
  Vec3 vel_i{3.0, 3.0, 3.0};
  Vec3 vel_d{0.0, 0.0, 0.0};
  double vel_i_limit = 3.0;  // m/s^2 contributed by the integrator
  Vec3 att_p{10.0, 10.0, 3.0};
  Vec3 rate_p{40.0, 40.0, 8.0};
  Vec3 rate_i{0.0, 0.0, 0.0};
  Vec3 rate_d{0.0, 0.0, 0.0};
  double rate_i_limit = 5.0;  // rad/s^2
  double tilt_max = 25.0 * kPi / 180.0;
  double thrust_max = 32.5;
  Vec3 torque_max{1.0, 1.0, 0.3};
  double v_limit = 4.0;

  void validate() const;
};

enum class Mode { StaticWrench, DisturbanceReject, Yield };
enum class Mission { Hover, StaticWrench, Explore, Cob };

const char* to_string(Mode m);

struct Setpoint {
  Vec3 r_d = Vec3::Zero();
  double psi_d = 0.0;
  Vec3 r_d_star = Vec3::Zero();
  double psi_d_star = 0.0;
  Vec3 v_ff = Vec3::Zero();
  Mode mode = Mode::DisturbanceReject;
};

struct PositionOutput {
  double thrust = 0.0;
  Mat3 R_d = Mat3::Identity();
  Vec3 accel_cmd = Vec3::Zero();
  Vec3 vel_cmd = Vec3::Zero();
};

class PpidController {
 public:
  PpidController(BodyParams body, PpidGains gains);

  PositionOutput ppid_position(const VehicleState& s, const Vec3& r_d, double psi_d,
                               const Vec3& v_ff, double dt);
  Vec3 ppid_attitude(const VehicleState& s, const Mat3& R_d, double dt);
  Command step(const VehicleState& s, const Setpoint& sp, double dt);
  void reset();

  const PpidGains& gains() const { return gains_; }
  const PositionOutput& last_position() const { return last_pos_; }

 private:
  BodyParams body_;
  PpidGains gains_;
  Vec3 vel_int_ = Vec3::Zero();
  Vec3 rate_int_ = Vec3::Zero();
  std::optional<Vec3> prev_vel_err_;
  std::optional<Vec3> prev_rate_err_;
  PositionOutput last_pos_;
};

// Attitude with body z along b3 (down-pointing thrust reaction) and heading psi.
Mat3 attitude_from_thrust_axis(const Vec3& b3, double psi);

struct AdmittanceParams {
  double m_v = 1.0;
  double I_vz = 1.0;
  std::array<double, 4> D{24.5, 24.5, 0.0, 1.0};
  std::array<double, 4> K{24.5, 24.5, 0.0, 1.0};
  Vec3 delta_f_des = Vec3::Zero();

  void validate() const;
};

class Admittance {
 public:
  explicit Admittance(AdmittanceParams p = {});
  // Returns reshaped (r_d, psi_d); yaw reshaping optional per call.
  std::pair<Vec3, double> reshape(const Vec3& fused, double yaw_torque, const Vec3& r_star,
                                  double psi_star, double dt, bool yaw_active = true);
  void reset();
  void reset_yaw();
  AdmittanceParams& params() { return p_; }
  const AdmittanceParams& params() const { return p_; }
  const Vec3& offset() const { return e_; }
  double yaw_offset() const { return epsi_; }

 private:
  AdmittanceParams p_;
  Vec3 e_ = Vec3::Zero();
  Vec3 e_dot_ = Vec3::Zero();
  double epsi_ = 0.0;
  double epsi_dot_ = 0.0;
};

Setpoint recovery_setpoint(const Vec3& pre_collision_v, const Vec3& pose, double psi, double c);

Mode select_mode(Mission mission, bool impact, bool recovering);

}  // namespace xpl
