#pragma once

#include "xplorer/math.hpp"

#include <array>
#include <optional>
#include <vector>

namespace xpl {

inline constexpr int kArmCount = 4;
inline constexpr int kCenterContact = -1;

struct BodyParams {
  double mass = 1.12;
  Mat3 inertia = Eigen::Vector3d(0.01, 0.01, 0.02).asDiagonal();
  double gravity = 9.81;
  double arm_radius = 0.15;        // body center to arm-frame origin
  double footprint_radius = 0.21;  // body center to outer guard edge along a body axis
  double center_radius = 0.15;     // central hull disk
  double v_limit = 4.0;

  // Guard circle radius around each arm-frame origin.
  double guard_radius() const;
  void validate() const;
};

struct ArmParams {
  double inertia = 0.0015;
  double damping = 0.009;
  double stiffness = 1.307;
  double lever = 0.113;
  double theta_max = 30.0 * kPi / 180.0;
  std::array<double, kArmCount> nu{-kPi / 2, -kPi / 2, kPi / 2, kPi / 2};
  std::array<double, kArmCount> mu{3 * kPi / 4, kPi / 4, -kPi / 4, -3 * kPi / 4};

  void validate() const;
};

struct ArmState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

struct VehicleState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  std::array<ArmState, kArmCount> arms{};

  bool valid(const ArmParams& arm, double tol = 1e-9) const;
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

struct Polygon {
  std::vector<Vec2> vertices;  // closed implicitly, either winding
};

struct Environment {
  std::vector<Polygon> obstacles;
  double wall_stiffness = 800.0;
  double wall_damping = 40.0;
  double mu_c = 0.3;
  double friction_v_eps = 0.02;
  double restitution = 0.09;
  double mu_t = 0.5;
  double v_impulse = 0.3;

  void validate() const;
};

struct ContactEvent {
  int arm_index = kCenterContact;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();  // outward surface normal, world frame
  double penetration = 0.0;
  double normal_force = 0.0;
  double approach_speed = 0.0;
  bool impulsive = false;
};

// Signed distance result from a point to the nearest obstacle boundary.
struct SurfaceQuery {
  double distance = 0.0;  // negative inside
  Vec2 closest = Vec2::Zero();
  Vec2 normal = Vec2::UnitX();
};

std::optional<SurfaceQuery> nearest_surface(const Environment& env, const Vec2& p);

VehicleState step_rigid_body(const VehicleState& state, double thrust, const Vec3& torque,
                             const Wrench& ext, const BodyParams& body, double dt);

ArmState step_arm(const ArmState& arm, const ArmParams& params, double ext_torque, double dt);

double arm_energy(const ArmState& arm, const ArmParams& params);

// Arm frame to body frame: rotation about z.
Mat3 arm_rotation(double varphi);

// varphi for arm index i in 1..4.
double arm_deflection_angle(int i, double theta, const ArmParams& params = {});

// Physical in-plane rotation direction of arm i (0-based); positive theta maps
// to a rotation of sign(i) * theta about the hinge.
double arm_sign(int i, const ArmParams& params);

// Body-frame location of the arm-frame origin (guard center) and its hinge.
Vec3 guard_center_body(int i, double theta, const BodyParams& body, const ArmParams& arm);
Vec3 hinge_body(int i, const BodyParams& body, const ArmParams& arm);

// Unit arm-normal direction a1 in the body frame.
Vec3 arm_normal_body(int i, double theta, const ArmParams& arm);

std::vector<ContactEvent> detect_contacts(const VehicleState& state, const Environment& env,
                                          const BodyParams& body, const ArmParams& arm,
                                          const std::array<bool, kArmCount + 1>& was_touching = {});

// Velocity after an impact against a surface with outward normal.
Vec3 resolve_collision(const Vec3& v, const Vec3& normal, double e, double mu_t);

struct Command {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();
};

// Externally imposed loads, independent of contacts.
struct Disturbance {
  Vec3 com_force = Vec3::Zero();              // world frame, at CoM
  Vec3 body_torque = Vec3::Zero();            // body frame
  std::array<double, kArmCount> arm_force{};  // along each arm normal, at the guard
};

struct StepTruth {
  Vec3 external_force = Vec3::Zero();  // total non-gravity, non-thrust force on the body
  Vec3 external_torque = Vec3::Zero();
  std::vector<ContactEvent> contacts;
  bool impact = false;
  Vec3 pre_impact_velocity = Vec3::Zero();
  bool impact_not_approaching = false;
};

class PhysicsWorld {
 public:
  PhysicsWorld(BodyParams body, ArmParams arm, Environment env, VehicleState initial);

  const StepTruth& step(const Command& cmd, double dt);

  const VehicleState& state() const { return state_; }
  VehicleState& mutable_state() { return state_; }
  const StepTruth& last() const { return truth_; }
  const BodyParams& body() const { return body_; }
  const ArmParams& arm() const { return arm_; }
  const Environment& env() const { return env_; }
  Disturbance& disturbance() { return disturbance_; }

 private:
  BodyParams body_;
  ArmParams arm_;
  Environment env_;
  VehicleState state_;
  Disturbance disturbance_;
  StepTruth truth_;
  std::array<bool, kArmCount + 1> touching_{};
};

}  // namespace xpl
