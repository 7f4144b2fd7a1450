#pragma once

#include "xplorer/cob_planner.hpp"
#include "xplorer/control.hpp"
#include "xplorer/estimator.hpp"
#include "xplorer/explorer.hpp"
#include "xplorer/mapper.hpp"
#include "xplorer/sim_core.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xpl {

enum class EnvPreset { None, Box, Corridor, WallPush, PulleyCom, CobWall };
enum class MissionKind { Hover, Explore, StaticWrench, Cob };

const char* to_string(EnvPreset p);
const char* to_string(MissionKind m);

struct Rates {
  double physics = 500.0;
  double control = 100.0;
  double estimator = 50.0;
  double map = 30.0;
};

struct NoiseParams {
  double accel_sigma = 0.05;  // m/s^2
  double theta_sigma = 0.0;   // rad
  double pose_sigma = 0.0;    // m, per axis, seen by controller and mapper
};

struct InitParams {
  Vec3 position{0.0, 0.0, -0.7};
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
};

struct DisturbanceSpec {
  Vec3 com_force = Vec3::Zero();  // world, from com_start on
  double com_start = 0.0;
  Vec3 body_torque = Vec3::Zero();  // body, from torque_start on
  double torque_start = 0.0;
  int arm_index = 0;        // 0-based arm for the synthetic arm load
  double arm_force = 0.0;   // sustained, along the arm normal
  double arm_spike = 0.0;   // peak of the leading spike
  double arm_start = 1.0;
  double arm_spike_duration = 0.1;
};

struct CobSpec {
  PlanKind strategy = PlanKind::NoCollision;
  double goal = 3.0;  // x of the vehicle center
  double wall = 3.0;  // x of the vehicle center at first touch
  double a_max = 2.0;
  double v_max = 2.0;
  double recovery_c = 0.5;
  double recovery_hold = 0.5;
  double impact_force = 2.0;  // fused magnitude that flags an impact
};

struct Scenario {
  std::string name = "scenario";
  unsigned long long seed = 1;
  double duration = 10.0;
  EnvPreset preset = EnvPreset::None;
  Environment env;  // parameters plus any extra polygons
  BodyParams body;
  double thrust_scale_error = 0.0;
  ArmParams arm;
  FilterBank estimator;
  PpidGains control;
  AdmittanceParams admittance;
  ExplorerParams explorer;
  bool stop_on_loop_closure = false;
  MapParams map;
  bool map_enabled = true;
  MissionKind mission = MissionKind::Hover;
  Vec3 force_des{-1.0, 0.0, 0.0};
  bool wrench_setpoint_auto = true;
  Vec3 wrench_setpoint = Vec3::Zero();
  CobSpec cob;
  Rates rates;
  NoiseParams noise;
  InitParams init;
  DisturbanceSpec disturbance;
  int trace_every = 10;

  // Preset polygons plus extra polygons, with the contact parameters.
  Environment resolved_environment() const;
  Vec3 resolved_wrench_setpoint() const;
  int control_decimation() const;
  int estimator_decimation() const;
  void validate() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<text>");
Scenario load_scenario(const std::filesystem::path& path);

// Applies one key = value override.
void apply_override(Scenario& s, const std::string& key, const std::string& value);

// Every key with its current value, one `key = value` line each.
std::string dump_scenario(const Scenario& s);

std::vector<std::string> scenario_keys();

Polygon preset_box();
std::vector<Polygon> preset_corridor();

}  // namespace xpl
