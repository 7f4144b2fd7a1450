#include "xplorer/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace xpl {

namespace {

Vec3 clamp_abs(const Vec3& v, const Vec3& lim) { return v.cwiseMax(-lim).cwiseMin(lim); }

Vec3 clamp_norm(const Vec3& v, double lim) {
  const double n = v.norm();
  return n > lim ? Vec3(v * (lim / n)) : v;
}

}  // namespace

void PpidGains::validate() const {
  auto nonneg = [](const Vec3& v) { return (v.array() >= 0.0).all(); };
  if (!nonneg(pos_p) || !nonneg(vel_p) || !nonneg(vel_i) || !nonneg(vel_d) || !nonneg(att_p) ||
      !nonneg(rate_p) || !nonneg(rate_i) || !nonneg(rate_d)) {
    throw std::invalid_argument("control gains must be >= 0");
  }
  if (!(thrust_max > 0.0) || !(torque_max.array() > 0.0).all() || !(tilt_max > 0.0) ||
      !(v_limit > 0.0) || !(vel_i_limit > 0.0) || !(rate_i_limit > 0.0)) {
    throw std::invalid_argument("control limits must be > 0");
  }
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::StaticWrench: return "STATIC_WRENCH";
    case Mode::DisturbanceReject: return "DISTURBANCE_REJECT";
    case Mode::Yield: return "YIELD";
  }
  return "UNKNOWN";
}

PpidController::PpidController(BodyParams body, PpidGains gains)
    : body_(std::move(body)), gains_(std::move(gains)) {
  gains_.validate();
}

void PpidController::reset() {
  vel_int_.setZero();
  rate_int_.setZero();
  prev_vel_err_.reset();
  prev_rate_err_.reset();
}

Mat3 attitude_from_thrust_axis(const Vec3& b3, double psi) {
  const Vec3 b1c(std::cos(psi), std::sin(psi), 0.0);
  Vec3 b2 = b3.cross(b1c);
  if (b2.norm() < 1e-9) b2 = b3.cross(Vec3(-std::sin(psi), std::cos(psi), 0.0)).cross(b3);
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);
  Mat3 r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b3;
  return r;
}

PositionOutput PpidController::ppid_position(const VehicleState& s, const Vec3& r_d, double psi_d,
                                             const Vec3& v_ff, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("control dt must be > 0");
  PositionOutput out;
  out.vel_cmd = clamp_norm(gains_.pos_p.cwiseProduct(r_d - s.x) + v_ff, gains_.v_limit);
  const Vec3 err = out.vel_cmd - s.v;
  const Vec3 ki_lim = Vec3::Constant(gains_.vel_i_limit);
  for (int k = 0; k < 3; ++k) {
    if (gains_.vel_i[k] > 0.0) {
      vel_int_[k] = std::clamp(vel_int_[k] + err[k] * dt, -ki_lim[k] / gains_.vel_i[k],
                               ki_lim[k] / gains_.vel_i[k]);
    }
  }
  const Vec3 derr = prev_vel_err_ ? Vec3((err - *prev_vel_err_) / dt) : Vec3::Zero();
  prev_vel_err_ = err;
  out.accel_cmd = gains_.vel_p.cwiseProduct(err) + gains_.vel_i.cwiseProduct(vel_int_) +
                  gains_.vel_d.cwiseProduct(derr);

  // Thrust direction: f R e3 = m (g e3 - a).
  Vec3 demand = body_.gravity * Vec3::UnitZ() - out.accel_cmd;
  if (demand.z() < 0.1 * body_.gravity) demand.z() = 0.1 * body_.gravity;
  const double horiz = demand.head<2>().norm();
  const double horiz_max = demand.z() * std::tan(gains_.tilt_max);
  if (horiz > horiz_max) demand.head<2>() *= horiz_max / horiz;
  const Vec3 b3 = demand.normalized();
  out.R_d = attitude_from_thrust_axis(b3, psi_d);
  out.thrust = std::clamp(body_.mass * demand.dot(s.R * Vec3::UnitZ()), 0.0, gains_.thrust_max);
  last_pos_ = out;
  return out;
}

Vec3 PpidController::ppid_attitude(const VehicleState& s, const Mat3& R_d, double dt) {
  const Vec3 att_err = log_so3(s.R.transpose() * R_d);
  const Vec3 rate_sp = gains_.att_p.cwiseProduct(att_err);
  const Vec3 err = rate_sp - s.omega;
  for (int k = 0; k < 3; ++k) {
    if (gains_.rate_i[k] > 0.0) {
      const double lim = gains_.rate_i_limit / gains_.rate_i[k];
      rate_int_[k] = std::clamp(rate_int_[k] + err[k] * dt, -lim, lim);
    }
  }
  const Vec3 derr = prev_rate_err_ ? Vec3((err - *prev_rate_err_) / dt) : Vec3::Zero();
  prev_rate_err_ = err;
  const Vec3 alpha = gains_.rate_p.cwiseProduct(err) + gains_.rate_i.cwiseProduct(rate_int_) +
                     gains_.rate_d.cwiseProduct(derr);
  const Vec3 h = body_.inertia * s.omega;
  return clamp_abs(body_.inertia * alpha - h.cross(s.omega), gains_.torque_max);
}

Command PpidController::step(const VehicleState& s, const Setpoint& sp, double dt) {
  const PositionOutput pos = ppid_position(s, sp.r_d, sp.psi_d, sp.v_ff, dt);
  Command cmd;
  cmd.thrust = pos.thrust;
  cmd.torque = ppid_attitude(s, pos.R_d, dt);
  return cmd;
}

void AdmittanceParams::validate() const {
  if (!(m_v > 0.0) || !(I_vz > 0.0)) throw std::invalid_argument("admittance m_v, I_vz must be > 0");
  for (int k = 0; k < 4; ++k) {
    if (!(D[k] >= 0.0) || !(K[k] >= 0.0)) {
      throw std::invalid_argument("admittance D, K entries must be >= 0");
    }
  }
  if (!delta_f_des.allFinite()) throw std::invalid_argument("admittance desired force not finite");
}

Admittance::Admittance(AdmittanceParams p) : p_(p) { p_.validate(); }

void Admittance::reset() {
  e_.setZero();
  e_dot_.setZero();
  reset_yaw();
}

void Admittance::reset_yaw() {
  epsi_ = 0.0;
  epsi_dot_ = 0.0;
}

std::pair<Vec3, double> Admittance::reshape(const Vec3& fused, double yaw_torque,
                                            const Vec3& r_star, double psi_star, double dt,
                                            bool yaw_active) {
  if (!(dt > 0.0)) throw std::invalid_argument("admittance dt must be > 0");
  const Vec3 drive = fused - p_.delta_f_des;
  for (int k = 0; k < 3; ++k) {
    if (p_.D[k] == 0.0 && p_.K[k] == 0.0) {
      e_[k] = 0.0;
      e_dot_[k] = 0.0;
      continue;
    }
    e_dot_[k] += dt * (drive[k] - p_.D[k] * e_dot_[k] - p_.K[k] * e_[k]) / p_.m_v;
    e_[k] += dt * e_dot_[k];
  }
  if (yaw_active) {
    epsi_dot_ += dt * (yaw_torque - p_.D[3] * epsi_dot_ - p_.K[3] * epsi_) / p_.I_vz;
    epsi_ += dt * epsi_dot_;
  } else {
    reset_yaw();
  }
  return {r_star + e_, psi_star + epsi_};
}

Setpoint recovery_setpoint(const Vec3& pre_collision_v, const Vec3& pose, double psi, double c) {
  Setpoint sp;
  sp.mode = Mode::Yield;
  sp.r_d_star = pose;
  sp.psi_d = sp.psi_d_star = psi;
  sp.r_d = pre_collision_v.norm() > 0.0 ? Vec3(pose - c * pre_collision_v) : pose;
  return sp;
}

Mode select_mode(Mission mission, bool impact, bool recovering) {
  if (mission == Mission::Cob && (impact || recovering)) return Mode::Yield;
  if (mission == Mission::Explore || mission == Mission::StaticWrench) return Mode::StaticWrench;
  return Mode::DisturbanceReject;
}

}  // namespace xpl
