#include "xplorer/sim_core.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace xpl {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_dt(double dt) {
  require(std::isfinite(dt) && dt > 0.0 && dt <= 0.01,
          "dt must lie in (0, 0.01], got " + std::to_string(dt));
}

Vec3 planar(const Vec2& p, double z) { return {p.x(), p.y(), z}; }

Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return a + t * ab;
}

bool inside(const Polygon& poly, const Vec2& p) {
  bool in = false;
  const auto& vs = poly.vertices;
  for (std::size_t i = 0, j = vs.size() - 1; i < vs.size(); j = i++) {
    const Vec2& a = vs[i];
    const Vec2& b = vs[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xc) in = !in;
    }
  }
  return in;
}

double signed_area(const Polygon& poly) {
  double s = 0.0;
  const auto& vs = poly.vertices;
  for (std::size_t i = 0, j = vs.size() - 1; i < vs.size(); j = i++) {
    s += vs[j].x() * vs[i].y() - vs[i].x() * vs[j].y();
  }
  return 0.5 * s;
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

}  // namespace

double BodyParams::guard_radius() const {
  return footprint_radius - arm_radius * std::cos(kPi / 4);
}

void BodyParams::validate() const {
  require(mass > 0.0, "body.mass must be > 0");
  require(inertia.isApprox(inertia.transpose(), 1e-12), "body inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  require(eig.eigenvalues().minCoeff() > 0.0, "body inertia must be positive definite");
  require(footprint_radius > 0.0, "body.footprint_radius must be > 0");
  require(guard_radius() > 0.0, "body.footprint_radius must exceed the arm offset");
  require(v_limit > 0.0, "body.v_limit must be > 0");
  require(center_radius >= 0.0, "body.center_radius must be >= 0");
}

void ArmParams::validate() const {
  require(inertia > 0.0 && damping > 0.0 && stiffness > 0.0 && lever > 0.0,
          "arm inertia, damping, stiffness and lever must be > 0");
  require(theta_max > 0.0 && theta_max <= 30.0 * kPi / 180.0 + 1e-12,
          "arm.theta_max must lie in (0, 30 deg]");
  for (int i = 0; i < kArmCount; ++i) {
    require(std::abs(std::abs(nu[i]) - kPi / 2) < 1e-12, "arm nu must be +-pi/2");
  }
}

void Environment::validate() const {
  require(wall_stiffness > 0.0, "env.wall_stiffness must be > 0");
  require(wall_damping >= 0.0, "env.wall_damping must be >= 0");
  require(restitution >= 0.0 && restitution < 1.0, "env.restitution must lie in [0, 1)");
  require(mu_c >= 0.0, "env.mu_c must be >= 0");
  require(mu_t >= 0.0 && mu_t <= 1.0, "env.mu_t must lie in [0, 1]");
  require(friction_v_eps > 0.0, "env.friction_v_eps must be > 0");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& vs = obstacles[k].vertices;
    const std::string tag = "obstacle " + std::to_string(k);
    require(vs.size() >= 3, tag + " needs at least 3 vertices");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Vec2& a = vs[i];
      const Vec2& b = vs[(i + 1) % vs.size()];
      require(a.allFinite(), tag + " has a non-finite vertex");
      require((b - a).norm() > 1e-9, tag + " has a zero-length edge at vertex " + std::to_string(i));
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 2; j < vs.size(); ++j) {
        if (i == 0 && j == vs.size() - 1) continue;
        require(!segments_cross(vs[i], vs[(i + 1) % vs.size()], vs[j], vs[(j + 1) % vs.size()]),
                tag + " is not simple");
      }
    }
    require(std::abs(signed_area(obstacles[k])) > 1e-12, tag + " has zero area");
  }
}

bool VehicleState::valid(const ArmParams& arm, double tol) const {
  if (!x.allFinite() || !v.allFinite() || !R.allFinite() || !omega.allFinite()) return false;
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = R.determinant();
  if (ortho >= tol || std::abs(det - 1.0) > tol) return false;
  return std::all_of(arms.begin(), arms.end(), [&](const ArmState& a) {
    return std::isfinite(a.theta) && std::isfinite(a.theta_dot) &&
           std::abs(a.theta) <= arm.theta_max;
  });
}

std::optional<SurfaceQuery> nearest_surface(const Environment& env, const Vec2& p) {
  std::optional<SurfaceQuery> best;
  for (const auto& poly : env.obstacles) {
    const auto& vs = poly.vertices;
    double dmin = std::numeric_limits<double>::infinity();
    Vec2 cmin = Vec2::Zero();
    Vec2 edge_dir = Vec2::UnitX();
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Vec2& a = vs[i];
      const Vec2& b = vs[(i + 1) % vs.size()];
      const Vec2 c = closest_on_segment(p, a, b);
      const double d = (p - c).norm();
      if (d < dmin) {
        dmin = d;
        cmin = c;
        edge_dir = (b - a).normalized();
      }
    }
    const bool in = inside(poly, p);
    SurfaceQuery q;
    q.closest = cmin;
    q.distance = in ? -dmin : dmin;
    if (dmin > 1e-12) {
      q.normal = (p - cmin) / dmin;
      if (in) q.normal = -q.normal;
    } else {
      // On the boundary: outward edge normal from the winding.
      const double orient = signed_area(poly) > 0.0 ? 1.0 : -1.0;
      q.normal = orient * Vec2(edge_dir.y(), -edge_dir.x());
    }
    if (!best || q.distance < best->distance) best = q;
  }
  return best;
}

VehicleState step_rigid_body(const VehicleState& state, double thrust, const Vec3& torque,
                             const Wrench& ext, const BodyParams& body, double dt) {
  check_dt(dt);
  require(std::isfinite(thrust) && torque.allFinite(), "non-finite thrust or torque command");
  require(ext.force.allFinite() && ext.torque.allFinite(), "non-finite external wrench");
  const Vec3 e3 = Vec3::UnitZ();
  VehicleState out = state;
  const Vec3 net = body.mass * body.gravity * e3 - thrust * (state.R * e3) + ext.force;
  out.v = state.v + dt * (net / body.mass);
  out.x = state.x + dt * out.v;
  const Vec3 h = body.inertia * state.omega;
  const Vec3 omega_dot = body.inertia.ldlt().solve(torque + ext.torque + h.cross(state.omega));
  out.omega = state.omega + dt * omega_dot;
  out.R = orthonormalize(state.R * exp_so3(out.omega * dt));
  return out;
}

ArmState step_arm(const ArmState& arm, const ArmParams& p, double ext_torque, double dt) {
  check_dt(dt);
  require(std::isfinite(arm.theta) && std::isfinite(arm.theta_dot) && std::isfinite(ext_torque),
          "non-finite arm input");
  // Trapezoidal rule: exactly dissipative for b > 0 and unforced.
  const double beta = 0.5 * p.damping + 0.25 * p.stiffness * dt;
  const double jdt = p.inertia / dt;
  ArmState out;
  out.theta_dot =
      ((jdt - beta) * arm.theta_dot + ext_torque - p.stiffness * arm.theta) / (jdt + beta);
  out.theta = arm.theta + 0.5 * dt * (arm.theta_dot + out.theta_dot);
  if (std::abs(out.theta) > p.theta_max) {
    out.theta = std::copysign(p.theta_max, out.theta);
    out.theta_dot = 0.0;
  }
  return out;
}

double arm_energy(const ArmState& arm, const ArmParams& p) {
  return 0.5 * p.inertia * arm.theta_dot * arm.theta_dot + 0.5 * p.stiffness * arm.theta * arm.theta;
}

Mat3 arm_rotation(double varphi) { return rot_z(varphi); }

double arm_deflection_angle(int i, double theta, const ArmParams& params) {
  require(i >= 1 && i <= kArmCount, "arm index must be in 1..4");
  return params.nu[i - 1] + params.mu[i - 1] + theta;
}

double arm_sign(int i, const ArmParams& params) { return params.nu[i] > 0.0 ? 1.0 : -1.0; }

Vec3 hinge_body(int i, const BodyParams& body, const ArmParams& arm) {
  const Vec2 h = (body.arm_radius - arm.lever) * unit2(arm.mu[i]);
  return planar(h, 0.0);
}

Vec3 guard_center_body(int i, double theta, const BodyParams& body, const ArmParams& arm) {
  const Vec2 g = (body.arm_radius - arm.lever) * unit2(arm.mu[i]) +
                 arm.lever * unit2(arm.mu[i] + arm_sign(i, arm) * theta);
  return planar(g, 0.0);
}

Vec3 arm_normal_body(int i, double theta, const ArmParams& arm) {
  return arm_rotation(arm_deflection_angle(i + 1, theta, arm)) * Vec3::UnitX();
}

namespace {

// Hinge torque in theta coordinates from a body-frame force at the guard.
double arm_torque(int i, double theta, const Vec3& f_body, const ArmParams& arm) {
  const double s = arm_sign(i, arm);
  const Vec2 u = unit2(arm.mu[i] + s * theta);
  return s * arm.lever * (u.x() * f_body.y() - u.y() * f_body.x());
}

Vec3 guard_velocity_body(int i, const VehicleState& st, const BodyParams& body,
                         const ArmParams& arm) {
  const Vec3 g = guard_center_body(i, st.arms[i].theta, body, arm);
  const double s = arm_sign(i, arm);
  const Vec2 tang = unit2(arm.mu[i] + s * st.arms[i].theta + kPi / 2);
  return st.omega.cross(g) + planar(s * st.arms[i].theta_dot * arm.lever * tang, 0.0);
}

std::optional<ContactEvent> probe(const VehicleState& st, const Environment& env,
                                  const Vec3& center_body, const Vec3& rel_vel_body, double radius,
                                  int index) {
  const Vec3 cw = st.x + st.R * center_body;
  const auto q = nearest_surface(env, Vec2(cw.x(), cw.y()));
  if (!q || q->distance >= radius) return std::nullopt;
  ContactEvent ev;
  ev.arm_index = index;
  ev.normal = planar(q->normal, 0.0);
  ev.point = planar(q->closest, cw.z());
  ev.penetration = radius - q->distance;
  const Vec3 vel = st.v + st.R * rel_vel_body;
  const double vn = vel.dot(ev.normal);
  ev.approach_speed = std::max(0.0, -vn);
  ev.normal_force =
      std::max(0.0, env.wall_stiffness * ev.penetration + env.wall_damping * ev.approach_speed);
  return ev;
}

Vec3 contact_force(const ContactEvent& ev, const Vec3& vel, const Environment& env) {
  Vec3 vt = vel - vel.dot(ev.normal) * ev.normal;
  vt.z() = 0.0;
  const double s = std::max(vt.norm(), env.friction_v_eps);
  return ev.normal_force * ev.normal - env.mu_c * ev.normal_force * vt / s;
}

}  // namespace

std::vector<ContactEvent> detect_contacts(const VehicleState& state, const Environment& env,
                                          const BodyParams& body, const ArmParams& arm,
                                          const std::array<bool, kArmCount + 1>& was_touching) {
  std::vector<ContactEvent> out;
  for (int i = 0; i < kArmCount; ++i) {
    auto ev = probe(state, env, guard_center_body(i, state.arms[i].theta, body, arm),
                    guard_velocity_body(i, state, body, arm), body.guard_radius(), i);
    if (ev) {
      ev->impulsive = !was_touching[i] && ev->approach_speed > env.v_impulse;
      out.push_back(*ev);
    }
  }
  if (body.center_radius > 0.0) {
    auto ev = probe(state, env, Vec3::Zero(), Vec3::Zero(), body.center_radius, kCenterContact);
    if (ev) {
      ev->impulsive = !was_touching[kArmCount] && ev->approach_speed > env.v_impulse;
      out.push_back(*ev);
    }
  }
  return out;
}

Vec3 resolve_collision(const Vec3& v, const Vec3& normal, double e, double mu_t) {
  const double vn = v.dot(normal);
  if (!(vn < 0.0)) return v;
  const Vec3 vt = v - vn * normal;
  return -e * vn * normal + (1.0 - mu_t) * vt;
}

PhysicsWorld::PhysicsWorld(BodyParams body, ArmParams arm, Environment env, VehicleState initial)
    : body_(std::move(body)), arm_(std::move(arm)), env_(std::move(env)), state_(initial) {
  body_.validate();
  arm_.validate();
  env_.validate();
  require(state_.valid(arm_), "initial vehicle state violates invariants");
}

const StepTruth& PhysicsWorld::step(const Command& cmd, double dt) {
  check_dt(dt);
  truth_ = StepTruth{};
  auto contacts = detect_contacts(state_, env_, body_, arm_, touching_);

  const ContactEvent* hit = nullptr;
  for (const auto& ev : contacts) {
    if (ev.impulsive && (!hit || ev.approach_speed > hit->approach_speed)) hit = &ev;
  }
  if (hit) {
    truth_.impact = true;
    truth_.pre_impact_velocity = state_.v;
    const Vec3 v_post = resolve_collision(state_.v, hit->normal, env_.restitution, env_.mu_t);
    truth_.impact_not_approaching = (v_post == state_.v);
    const Vec3 dv_body = state_.R.transpose() * (v_post - state_.v);
    state_.v = v_post;
    for (const auto& ev : contacts) {
      if (ev.arm_index == kCenterContact) continue;
      auto& a = state_.arms[ev.arm_index];
      a.theta_dot += dv_body.dot(arm_normal_body(ev.arm_index, a.theta, arm_)) / arm_.lever;
    }
    contacts = detect_contacts(state_, env_, body_, arm_, touching_);
    for (auto& ev : contacts) ev.impulsive = ev.impulsive || ev.arm_index == hit->arm_index;
  }

  Wrench ext;
  std::array<double, kArmCount> arm_tau{};
  const Mat3 rt = state_.R.transpose();
  for (const auto& ev : contacts) {
    const bool is_arm = ev.arm_index != kCenterContact;
    const Vec3 rel = is_arm ? guard_velocity_body(ev.arm_index, state_, body_, arm_) : Vec3::Zero();
    const Vec3 f_wall = contact_force(ev, state_.v + state_.R * rel, env_);
    if (!is_arm) {
      ext.force += f_wall;
      ext.torque += (rt * (ev.point - state_.x)).cross(rt * f_wall);
      continue;
    }
    // Guards transmit only the arm-normal component, applied at the arm-frame origin.
    const double th = state_.arms[ev.arm_index].theta;
    const Vec3 a = arm_normal_body(ev.arm_index, th, arm_);
    const Vec3 f_body = (rt * f_wall).dot(a) * a;
    ext.force += state_.R * f_body;
    ext.torque += guard_center_body(ev.arm_index, th, body_, arm_).cross(f_body);
    arm_tau[ev.arm_index] += arm_torque(ev.arm_index, th, f_body, arm_);
  }
  for (int i = 0; i < kArmCount; ++i) {
    const double fa = disturbance_.arm_force[i];
    if (fa == 0.0) continue;
    const double th = state_.arms[i].theta;
    const Vec3 f_body = fa * arm_normal_body(i, th, arm_);
    ext.force += state_.R * f_body;
    ext.torque += guard_center_body(i, th, body_, arm_).cross(f_body);
    arm_tau[i] += arm_.lever * fa;
  }
  ext.force += disturbance_.com_force;
  ext.torque += disturbance_.body_torque;

  state_ = step_rigid_body(state_, cmd.thrust, cmd.torque, ext, body_, dt);
  for (int i = 0; i < kArmCount; ++i) state_.arms[i] = step_arm(state_.arms[i], arm_, arm_tau[i], dt);

  touching_.fill(false);
  for (const auto& ev : contacts) {
    touching_[ev.arm_index == kCenterContact ? kArmCount : ev.arm_index] = true;
  }
  truth_.external_force = ext.force;
  truth_.external_torque = ext.torque;
  truth_.contacts = std::move(contacts);
  return truth_;
}

}  // namespace xpl
