#pragma once

#include "xplorer/control.hpp"
#include "xplorer/estimator.hpp"
#include "xplorer/math.hpp"

#include <array>
#include <deque>
#include <optional>

namespace xpl {

struct ExplorerParams {
  double psi_dot_0 = 0.4;
  double psi_dot_c = 0.26;
  double delta_0x = 1.5;
  double delta_0y = 1.5;
  double delta_psi_0 = 1.6;
  double d_step = 0.25;
  double f_des = 1.25;
  int force_window = 50;             // estimator samples
  double yaw_rate_cutoff = 5.0;      // Hz
  double hover_z = -0.7;             // NED, 0.7 m above ground
  double loop_radius = 0.21;         // closure tolerance
  double loop_leave_radius = 0.42;   // must first leave this neighbourhood
  double rearm_yaw_rate = 0.1;      // yaw rate below which the turn trigger re-arms
  double contact_distance = 0.21;    // body center to the contact point on a flat face
  double turn_radius_start = 0.23;   // arc radius about the contact point as a turn begins
  double turn_radius_end = 0.16;     // arc radius after a quarter turn

  void validate() const;
};

enum class Dir { PosX, NegX, PosY, NegY };

const char* to_string(Dir d);
Vec3 dir_vector(Dir d);  // body-frame unit axis

using ContactNormal = std::array<int, 4>;  // one-hot over (+X, -X, +Y, -Y)

bool one_hot(const ContactNormal& cn);
int normal_index(const ContactNormal& cn);
Vec3 normal_vector(const ContactNormal& cn);  // body-frame axis pointing at the obstacle

struct ExplorerState {
  int gamma = 1;
  ContactNormal C_n{0, 0, 0, 0};
  Dir lambda = Dir::PosX;
  Dir lambda_prev = Dir::PosX;
  double psi_sp = 0.0;
  double heading = 0.0;  // yaw reference outside turning episodes
  double turn_accum = 0.0;
  double turn_sign = 0.0;
  bool turn_released = false;  // contact force fell below delta_0 during the current turn
  bool turn_armed = true;  // the yaw-rate trigger is ignored until yaw settles after a turn
  Vec3 pivot = Vec3::Zero();        // world point the vehicle turns about
  Vec3 pivot_normal = Vec3::Zero();  // body-frame direction from the setpoint to the pivot
  std::optional<Vec3> first_contact;
  bool left_vicinity = false;
  bool loop_closed = false;
  double loop_closed_time = -1.0;
};

// Body-frame force the vehicle exerts on the environment.
ContactNormal update_contact_normal(const Vec3& body_force, Dir lambda, const ContactNormal& cn,
                                    const ExplorerParams& p);

Dir update_move_direction(const ContactNormal& cn);

struct BodyStep {
  Vec3 offset = Vec3::Zero();  // body-frame setpoint relative to the pose
  double psi_sp = 0.0;
  int gamma = 1;
};

BodyStep exploration_step(double yaw_rate, const Vec3& body_force, double psi_admit,
                          const ExplorerParams& p);
BodyStep tactile_turn_step(double yaw_rate, const Vec3& body_force, const ExplorerParams& p,
                           ExplorerState& s, double dt);
BodyStep tactile_traverse_step(double yaw_rate, const Vec3& body_force, double psi_admit,
                               const ExplorerParams& p, ExplorerState& s);

Vec3 setpoint_to_world(const Vec3& body_offset, const Mat3& R);

struct ExplorerOutput {
  Setpoint sp;
  Vec3 body_offset = Vec3::Zero();
  bool loop_closed_now = false;
};

class Explorer {
 public:
  Explorer(ExplorerParams p, AdmittanceParams admittance);

  // est_fresh marks a new estimator sample since the previous call.
  ExplorerOutput step(const Vec3& pose, const Mat3& R, double yaw_rate_raw,
                      const ForceEstimate& est, bool est_fresh, double t, double dt);

  const ExplorerState& state() const { return s_; }
  const Vec3& smoothed_force() const { return force_; }
  double yaw_rate() const { return yaw_rate_; }
  const ExplorerParams& params() const { return p_; }
  const Admittance& admittance() const { return admit_; }

 private:
  ExplorerParams p_;
  Admittance admit_;
  ExplorerState s_;
  std::deque<Vec3> window_;
  Vec3 force_ = Vec3::Zero();
  double yaw_rate_ = 0.0;
  bool primed_ = false;
};

}  // namespace xpl
