#include "xplorer/explorer.hpp"

#include <algorithm>
#include <stdexcept>

namespace xpl {

void ExplorerParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(psi_dot_0 > 0.0 && psi_dot_c > 0.0 && delta_0x > 0.0 && delta_0y > 0.0 &&
              delta_psi_0 > 0.0 && d_step > 0.0 && f_des > 0.0,
          "explorer thresholds must be positive");
  require(delta_psi_0 > delta_0x && delta_psi_0 > delta_0y,
          "explorer.delta_psi_0 must exceed explorer.delta_0");
  require(force_window >= 1, "explorer.force_window must be >= 1");
  require(yaw_rate_cutoff > 0.0, "explorer.yaw_rate_cutoff must be > 0");
  require(rearm_yaw_rate > 0.0, "explorer.rearm_yaw_rate must be > 0");
  require(contact_distance >= 0.0 && turn_radius_start >= 0.0 && turn_radius_end >= 0.0,
          "explorer contact distance and turn radii must be >= 0");
  require(loop_radius > 0.0 && loop_leave_radius > loop_radius,
          "explorer loop radii must satisfy 0 < loop_radius < loop_leave_radius");
}

const char* to_string(Dir d) {
  switch (d) {
    case Dir::PosX: return "+X";
    case Dir::NegX: return "-X";
    case Dir::PosY: return "+Y";
    case Dir::NegY: return "-Y";
  }
  return "?";
}

Vec3 dir_vector(Dir d) {
  switch (d) {
    case Dir::PosX: return Vec3::UnitX();
    case Dir::NegX: return -Vec3::UnitX();
    case Dir::PosY: return Vec3::UnitY();
    case Dir::NegY: return -Vec3::UnitY();
  }
  return Vec3::Zero();
}

bool one_hot(const ContactNormal& cn) {
  int ones = 0;
  for (int c : cn) {
    if (c != 0 && c != 1) return false;
    ones += c;
  }
  return ones == 1;
}

int normal_index(const ContactNormal& cn) {
  if (!one_hot(cn)) throw std::invalid_argument("contact normal is not one-hot");
  for (int k = 0; k < 4; ++k) {
    if (cn[k] == 1) return k;
  }
  return -1;
}

Vec3 normal_vector(const ContactNormal& cn) {
  static const std::array<Dir, 4> axes{Dir::PosX, Dir::NegX, Dir::PosY, Dir::NegY};
  return dir_vector(axes[normal_index(cn)]);
}

ContactNormal update_contact_normal(const Vec3& f, Dir lambda, const ContactNormal& cn,
                                    const ExplorerParams& p) {
  if (lambda == Dir::PosX || lambda == Dir::NegX) {
    if (f.x() > p.delta_0x) return {1, 0, 0, 0};
    if (f.x() < -p.delta_0x) return {0, 1, 0, 0};
  } else {
    if (f.y() > p.delta_0y) return {0, 0, 1, 0};
    if (f.y() < -p.delta_0y) return {0, 0, 0, 1};
  }
  return cn;
}

Dir update_move_direction(const ContactNormal& cn) {
  switch (normal_index(cn)) {
    case 0: return Dir::PosY;
    case 1: return Dir::NegY;
    case 2: return Dir::NegX;
    default: return Dir::PosX;
  }
}

BodyStep exploration_step(double yaw_rate, const Vec3& f, double psi_admit,
                          const ExplorerParams& p) {
  BodyStep out;
  out.psi_sp = psi_admit;
  const bool quiet_force = std::abs(f.x()) < p.delta_0x && std::abs(f.y()) < p.delta_0y;
  if (std::abs(yaw_rate) < p.psi_dot_0 && quiet_force) {
    out.offset = Vec3(p.d_step, 0.0, 0.0);
    out.gamma = 1;
  } else if (std::abs(yaw_rate) > p.psi_dot_0) {
    out.gamma = 2;
  } else {
    out.gamma = 3;
  }
  return out;
}

BodyStep tactile_turn_step(double yaw_rate, const Vec3& f, const ExplorerParams& p,
                           ExplorerState& s, double dt) {
  BodyStep out;
  out.gamma = 2;
  const double rx = f.x() / p.delta_0x;
  const double ry = f.y() / p.delta_0y;
  if (rx * rx + ry * ry < 1.0) s.turn_released = true;
  if (s.turn_released && f.head<2>().norm() >= p.delta_psi_0) {
    out.gamma = 3;
    out.psi_sp = s.psi_sp;
    return out;
  }
  const double sign = yaw_rate > 0.0 ? 1.0 : (yaw_rate < 0.0 ? -1.0 : 0.0);
  double inc = sign * p.psi_dot_c * dt;
  if (std::abs(s.turn_accum + inc) >= kPi) {
    inc = sign * kPi - s.turn_accum;
    out.gamma = 3;
  }
  s.turn_accum += inc;
  s.psi_sp += inc;
  out.psi_sp = s.psi_sp;
  return out;
}

BodyStep tactile_traverse_step(double yaw_rate, const Vec3& f, double psi_admit,
                               const ExplorerParams& p, ExplorerState& s) {
  BodyStep out;
  out.psi_sp = psi_admit;
  ContactNormal cn = update_contact_normal(f, s.lambda, s.C_n, p);
  if (!one_hot(cn)) {
    // No normal yet and the trigger was off the move axis: take the dominant axis.
    const bool x_dom = std::abs(f.x()) >= std::abs(f.y());
    if (x_dom && f.x() != 0.0) cn = f.x() > 0.0 ? ContactNormal{1, 0, 0, 0} : ContactNormal{0, 1, 0, 0};
    if (!x_dom) cn = f.y() > 0.0 ? ContactNormal{0, 0, 1, 0} : ContactNormal{0, 0, 0, 1};
  }
  if (one_hot(cn) && cn != s.C_n) {
    s.C_n = cn;
    const Dir next = update_move_direction(cn);
    if (next != s.lambda) {
      s.lambda_prev = s.lambda;
      s.lambda = next;
    }
  }
  if (std::abs(yaw_rate) > p.psi_dot_0) {
    out.gamma = 2;
    return out;
  }
  out.gamma = 3;
  out.offset = p.d_step * dir_vector(s.lambda);
  return out;
}

Vec3 setpoint_to_world(const Vec3& body_offset, const Mat3& R) { return R * body_offset; }

Explorer::Explorer(ExplorerParams p, AdmittanceParams admittance)
    : p_(std::move(p)), admit_(admittance) {
  p_.validate();
}

ExplorerOutput Explorer::step(const Vec3& pose, const Mat3& R, double yaw_rate_raw,
                              const ForceEstimate& est, bool est_fresh, double t, double dt) {
  const double alpha = 1.0 - std::exp(-2.0 * kPi * p_.yaw_rate_cutoff * dt);
  yaw_rate_ = primed_ ? yaw_rate_ + alpha * (yaw_rate_raw - yaw_rate_) : yaw_rate_raw;
  if (!primed_) s_.psi_sp = s_.heading = yaw_of(R);
  primed_ = true;
  if (est_fresh) {
    window_.push_back(est.body);
    if (static_cast<int>(window_.size()) > p_.force_window) window_.pop_front();
    Vec3 sum = Vec3::Zero();
    for (const auto& f : window_) sum += f;
    force_ = -sum / static_cast<double>(window_.size());
  }

  const double psi_now = yaw_of(R);
  const int before = s_.gamma;
  if (!s_.turn_armed && s_.gamma != 2 &&
      std::abs(yaw_rate_) < p_.rearm_yaw_rate) {
    s_.turn_armed = true;
  }
  const double trigger_rate = s_.turn_armed ? yaw_rate_ : 0.0;
  BodyStep bs;
  switch (s_.gamma) {
    case 1: bs = exploration_step(trigger_rate, force_, s_.heading, p_); break;
    case 2: bs = tactile_turn_step(s_.turn_sign, force_, p_, s_, dt); break;
    default: bs = tactile_traverse_step(trigger_rate, force_, s_.heading, p_, s_); break;
  }
  if (bs.gamma == 2 && before != 2) {
    const Vec3 n = one_hot(s_.C_n) ? normal_vector(s_.C_n) : Vec3::Zero();
    s_.pivot_normal = n;
    s_.pivot = Vec3(pose.x(), pose.y(), p_.hover_z) + setpoint_to_world(p_.contact_distance * n, R);
    s_.pivot.z() = p_.hover_z;
    s_.psi_sp = psi_now;
    s_.turn_accum = 0.0;
    s_.turn_released = false;
    s_.turn_sign = yaw_rate_ > 0.0 ? 1.0 : -1.0;
    admit_.reset_yaw();
  }
  if (before == 2 && bs.gamma != 2) {
    s_.heading = s_.psi_sp;
    s_.turn_armed = false;
  }
  if (bs.gamma == 3 && before == 1 && !s_.first_contact) {
    s_.first_contact = Vec3(pose.x(), pose.y(), p_.hover_z);
  }
  s_.gamma = bs.gamma;

  ExplorerOutput out;
  Setpoint& sp = out.sp;
  sp.mode = Mode::StaticWrench;
  if (s_.gamma == 2) {
    const double progress = std::min(1.0, std::abs(s_.turn_accum) / (kPi / 2));
    const double radius = p_.turn_radius_start + (p_.turn_radius_end - p_.turn_radius_start) * progress;
    sp.r_d = sp.r_d_star = s_.pivot - setpoint_to_world(radius * s_.pivot_normal, R);
    sp.r_d.z() = sp.r_d_star.z() = p_.hover_z;
    sp.psi_d = sp.psi_d_star = s_.psi_sp;
    out.body_offset = R.transpose() * (sp.r_d - pose);
  } else {
    Vec3 offset = bs.offset;
    if (before != s_.gamma) offset.setZero();
    out.body_offset = offset;
    Vec3 r_star = pose + setpoint_to_world(offset, R);
    r_star.z() = p_.hover_z;
    admit_.params().delta_f_des =
        (s_.gamma == 3 && one_hot(s_.C_n)) ? Vec3(-p_.f_des * (R * normal_vector(s_.C_n)))
                                           : Vec3::Zero();
    admit_.params().delta_f_des.z() = 0.0;
    const auto [r_d, psi_d] = admit_.reshape(est.fused, est.yaw_torque, r_star, s_.heading, dt, true);
    sp.r_d_star = r_star;
    sp.psi_d_star = s_.heading;
    sp.r_d = r_d;
    sp.psi_d = psi_d;
    s_.psi_sp = psi_d;
  }

  if (s_.first_contact) {
    const double d = (pose.head<2>() - s_.first_contact->head<2>()).norm();
    if (d > p_.loop_leave_radius) s_.left_vicinity = true;
    if (s_.left_vicinity && !s_.loop_closed && d < p_.loop_radius) {
      s_.loop_closed = true;
      s_.loop_closed_time = t;
      out.loop_closed_now = true;
    }
  }
  return out;
}

}  // namespace xpl
