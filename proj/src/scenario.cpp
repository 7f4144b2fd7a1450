#include "xplorer/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace xpl {

const char* to_string(EnvPreset p) {
  switch (p) {
    case EnvPreset::None: return "NONE";
    case EnvPreset::Box: return "BOX_1220x1000";
    case EnvPreset::Corridor: return "CORRIDOR_CONCAVE_CONVEX";
    case EnvPreset::WallPush: return "WALL_PUSH";
    case EnvPreset::PulleyCom: return "PULLEY_COM";
    case EnvPreset::CobWall: return "COB_WALL";
  }
  return "?";
}

const char* to_string(MissionKind m) {
  switch (m) {
    case MissionKind::Hover: return "HOVER";
    case MissionKind::Explore: return "EXPLORE_MAP";
    case MissionKind::StaticWrench: return "STATIC_WRENCH";
    case MissionKind::Cob: return "COB";
  }
  return "?";
}

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double x) {
  std::array<char, 48> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    const auto j = s.find(sep, i);
    out.push_back(trim(s.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i)));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

std::vector<double> parse_list(std::string_view v, std::size_t n) {
  const auto parts = split(v, ',');
  if (parts.size() != n) {
    throw std::invalid_argument("expected " + std::to_string(n) + " comma-separated numbers");
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_double(p));
  return out;
}

Vec3 parse_vec3(std::string_view v) {
  const auto l = parse_list(v, 3);
  return {l[0], l[1], l[2]};
}

std::string fmt_vec3(const Vec3& v) {
  return fmt(v.x()) + ", " + fmt(v.y()) + ", " + fmt(v.z());
}

bool parse_bool(std::string_view v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected a boolean");
}

long parse_int(std::string_view v) {
  const double d = parse_double(v);
  if (d != std::floor(d) || std::abs(d) > 1e15) throw std::invalid_argument("expected an integer");
  return static_cast<long>(d);
}

Polygon parse_polygon(std::string_view v) {
  Polygon poly;
  for (const auto& pt : split(v, ';')) {
    if (pt.empty()) continue;
    const auto l = parse_list(pt, 2);
    poly.vertices.emplace_back(l[0], l[1]);
  }
  if (poly.vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  return poly;
}

std::string fmt_polygon(const Polygon& p) {
  std::string out;
  for (std::size_t i = 0; i < p.vertices.size(); ++i) {
    if (i) out += "; ";
    out += fmt(p.vertices[i].x()) + ", " + fmt(p.vertices[i].y());
  }
  return out;
}

template <typename E>
E parse_enum(std::string_view v, const std::vector<std::pair<const char*, E>>& table) {
  const std::string s = trim(v);
  for (const auto& [name, e] : table) {
    if (s == name) return e;
  }
  std::string msg = "expected one of";
  for (const auto& [name, e] : table) msg += std::string(" ") + name;
  throw std::invalid_argument(msg);
}

const std::vector<std::pair<const char*, EnvPreset>> kPresets{
    {"NONE", EnvPreset::None},
    {"BOX_1220x1000", EnvPreset::Box},
    {"CORRIDOR_CONCAVE_CONVEX", EnvPreset::Corridor},
    {"WALL_PUSH", EnvPreset::WallPush},
    {"PULLEY_COM", EnvPreset::PulleyCom},
    {"COB_WALL", EnvPreset::CobWall}};

const std::vector<std::pair<const char*, MissionKind>> kMissions{
    {"HOVER", MissionKind::Hover},
    {"EXPLORE_MAP", MissionKind::Explore},
    {"STATIC_WRENCH", MissionKind::StaticWrench},
    {"COB", MissionKind::Cob}};

const std::vector<std::pair<const char*, PlanKind>> kPlanKinds{
    {"NO_COLLISION", PlanKind::NoCollision},
    {"COLLIDE_TO_STOP", PlanKind::CollideToStop},
    {"COLLIDE_TO_DECELERATE", PlanKind::CollideToDecelerate}};

struct Field {
  std::string key;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::vector<std::string>(const Scenario&)> get;  // empty for aliases
};

using DoubleRef = std::function<double&(Scenario&)>;
using Vec3Ref = std::function<Vec3&(Scenario&)>;

Field num(std::string key, DoubleRef ref) {
  return {std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_double(v); },
          [ref](const Scenario& s) {
            return std::vector<std::string>{fmt(ref(const_cast<Scenario&>(s)))};
          }};
}

Field vec3(std::string key, Vec3Ref ref) {
  return {std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_vec3(v); },
          [ref](const Scenario& s) {
            return std::vector<std::string>{fmt_vec3(ref(const_cast<Scenario&>(s)))};
          }};
}

template <typename T>
Field integer(std::string key, std::function<T&(Scenario&)> ref) {
  return {std::move(key),
          [ref](Scenario& s, std::string_view v) { ref(s) = static_cast<T>(parse_int(v)); },
          [ref](const Scenario& s) {
            return std::vector<std::string>{std::to_string(ref(const_cast<Scenario&>(s)))};
          }};
}

Field flag(std::string key, std::function<bool&(Scenario&)> ref) {
  return {std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_bool(v); },
          [ref](const Scenario& s) {
            return std::vector<std::string>{ref(const_cast<Scenario&>(s)) ? "true" : "false"};
          }};
}

Field array4(std::string key, std::function<std::array<double, 4>&(Scenario&)> ref) {
  return {std::move(key),
          [ref](Scenario& s, std::string_view v) {
            const auto l = parse_list(v, 4);
            std::copy(l.begin(), l.end(), ref(s).begin());
          },
          [ref](const Scenario& s) {
            const auto& a = ref(const_cast<Scenario&>(s));
            std::string out;
            for (int k = 0; k < 4; ++k) out += (k ? ", " : "") + fmt(a[k]);
            return std::vector<std::string>{out};
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"name", [](Scenario& s, std::string_view v) { s.name = trim(v); },
                 [](const Scenario& s) { return std::vector<std::string>{s.name}; }});
    f.push_back(integer<unsigned long long>("seed", [](Scenario& s) -> unsigned long long& { return s.seed; }));
    f.push_back(num("duration", [](Scenario& s) -> double& { return s.duration; }));
    f.push_back({"mission",
                 [](Scenario& s, std::string_view v) { s.mission = parse_enum(v, kMissions); },
                 [](const Scenario& s) { return std::vector<std::string>{to_string(s.mission)}; }});
    f.push_back(vec3("mission.force_des", [](Scenario& s) -> Vec3& { return s.force_des; }));
    f.push_back({"mission.wrench_setpoint",
                 [](Scenario& s, std::string_view v) {
                   if (trim(v) == "auto") {
                     s.wrench_setpoint_auto = true;
                   } else {
                     s.wrench_setpoint_auto = false;
                     s.wrench_setpoint = parse_vec3(v);
                   }
                 },
                 [](const Scenario& s) {
                   return std::vector<std::string>{s.wrench_setpoint_auto ? "auto"
                                                                          : fmt_vec3(s.wrench_setpoint)};
                 }});

    f.push_back({"env.preset",
                 [](Scenario& s, std::string_view v) { s.preset = parse_enum(v, kPresets); },
                 [](const Scenario& s) { return std::vector<std::string>{to_string(s.preset)}; }});
    f.push_back({"env.polygon",
                 [](Scenario& s, std::string_view v) { s.env.obstacles.push_back(parse_polygon(v)); },
                 [](const Scenario& s) {
                   std::vector<std::string> out;
                   for (const auto& p : s.env.obstacles) out.push_back(fmt_polygon(p));
                   return out;
                 }});
    f.push_back(num("env.wall_stiffness", [](Scenario& s) -> double& { return s.env.wall_stiffness; }));
    f.push_back(num("env.wall_damping", [](Scenario& s) -> double& { return s.env.wall_damping; }));
    f.push_back(num("env.mu_c", [](Scenario& s) -> double& { return s.env.mu_c; }));
    f.push_back(num("env.friction_v_eps", [](Scenario& s) -> double& { return s.env.friction_v_eps; }));
    f.push_back(num("env.e", [](Scenario& s) -> double& { return s.env.restitution; }));
    f.push_back(num("env.mu_t", [](Scenario& s) -> double& { return s.env.mu_t; }));
    f.push_back(num("env.v_impulse", [](Scenario& s) -> double& { return s.env.v_impulse; }));

    f.push_back(num("body.mass", [](Scenario& s) -> double& { return s.body.mass; }));
    f.push_back({"body.inertia",
                 [](Scenario& s, std::string_view v) {
                   const auto l = parse_list(v, 3);
                   s.body.inertia = Vec3(l[0], l[1], l[2]).asDiagonal();
                 },
                 [](const Scenario& s) {
                   return std::vector<std::string>{fmt_vec3(s.body.inertia.diagonal())};
                 }});
    f.push_back(num("body.g", [](Scenario& s) -> double& { return s.body.gravity; }));
    f.push_back(num("body.arm_radius", [](Scenario& s) -> double& { return s.body.arm_radius; }));
    f.push_back(num("body.footprint_radius", [](Scenario& s) -> double& { return s.body.footprint_radius; }));
    f.push_back(num("body.center_radius", [](Scenario& s) -> double& { return s.body.center_radius; }));
    f.push_back(num("body.v_limit", [](Scenario& s) -> double& { return s.body.v_limit; }));
    f.push_back(num("body.thrust_scale_error", [](Scenario& s) -> double& { return s.thrust_scale_error; }));

    f.push_back(num("arm.J_zz", [](Scenario& s) -> double& { return s.arm.inertia; }));
    f.push_back(num("arm.b", [](Scenario& s) -> double& { return s.arm.damping; }));
    f.push_back(num("arm.k", [](Scenario& s) -> double& { return s.arm.stiffness; }));
    f.push_back(num("arm.l", [](Scenario& s) -> double& { return s.arm.lever; }));
    f.push_back(num("arm.theta_max", [](Scenario& s) -> double& { return s.arm.theta_max; }));

    f.push_back(integer<int>("estimator.median_window", [](Scenario& s) -> int& { return s.estimator.median_window; }));
    f.push_back(num("estimator.lpf_alpha", [](Scenario& s) -> double& { return s.estimator.lpf_alpha; }));
    f.push_back(flag("estimator.bandstop", [](Scenario& s) -> bool& { return s.estimator.bandstop; }));
    f.push_back(num("estimator.bandstop_center", [](Scenario& s) -> double& { return s.estimator.bandstop_center; }));
    f.push_back(num("estimator.bandstop_width", [](Scenario& s) -> double& { return s.estimator.bandstop_width; }));
    f.push_back(num("estimator.K_I", [](Scenario& s) -> double& { return s.estimator.K_I; }));
    f.push_back(num("estimator.xi_f", [](Scenario& s) -> double& { return s.estimator.xi_f; }));
    f.push_back(num("estimator.theta_th", [](Scenario& s) -> double& { return s.estimator.theta_th; }));
    f.push_back(num("estimator.K_o", [](Scenario& s) -> double& { return s.estimator.K_o; }));
    f.push_back(integer<int>("estimator.accel_median_window", [](Scenario& s) -> int& { return s.estimator.accel_median_window; }));
    f.push_back(num("estimator.accel_lpf_alpha", [](Scenario& s) -> double& { return s.estimator.accel_lpf_alpha; }));

    f.push_back(vec3("control.pos_p", [](Scenario& s) -> Vec3& { return s.control.pos_p; }));
    f.push_back(vec3("control.vel_p", [](Scenario& s) -> Vec3& { return s.control.vel_p; }));
    f.push_back(vec3("control.vel_i", [](Scenario& s) -> Vec3& { return s.control.vel_i; }));
    f.push_back(vec3("control.vel_d", [](Scenario& s) -> Vec3& { return s.control.vel_d; }));
    f.push_back(num("control.vel_i_limit", [](Scenario& s) -> double& { return s.control.vel_i_limit; }));
    f.push_back(vec3("control.att_p", [](Scenario& s) -> Vec3& { return s.control.att_p; }));
    f.push_back(vec3("control.rate_p", [](Scenario& s) -> Vec3& { return s.control.rate_p; }));
    f.push_back(vec3("control.rate_i", [](Scenario& s) -> Vec3& { return s.control.rate_i; }));
    f.push_back(vec3("control.rate_d", [](Scenario& s) -> Vec3& { return s.control.rate_d; }));
    f.push_back(num("control.rate_i_limit", [](Scenario& s) -> double& { return s.control.rate_i_limit; }));
    f.push_back(num("control.tilt_max", [](Scenario& s) -> double& { return s.control.tilt_max; }));
    f.push_back(num("control.thrust_max", [](Scenario& s) -> double& { return s.control.thrust_max; }));
    f.push_back(vec3("control.torque_max", [](Scenario& s) -> Vec3& { return s.control.torque_max; }));

    f.push_back(num("admittance.m_v", [](Scenario& s) -> double& { return s.admittance.m_v; }));
    f.push_back(num("admittance.I_vz", [](Scenario& s) -> double& { return s.admittance.I_vz; }));
    f.push_back(array4("admittance.D", [](Scenario& s) -> std::array<double, 4>& { return s.admittance.D; }));
    f.push_back(array4("admittance.K", [](Scenario& s) -> std::array<double, 4>& { return s.admittance.K; }));

    f.push_back(num("explorer.psi_dot_0", [](Scenario& s) -> double& { return s.explorer.psi_dot_0; }));
    f.push_back(num("explorer.psi_dot_c", [](Scenario& s) -> double& { return s.explorer.psi_dot_c; }));
    f.push_back({"explorer.delta_0",
                 [](Scenario& s, std::string_view v) {
                   s.explorer.delta_0x = s.explorer.delta_0y = parse_double(v);
                 },
                 {}});
    f.push_back(num("explorer.delta_0x", [](Scenario& s) -> double& { return s.explorer.delta_0x; }));
    f.push_back(num("explorer.delta_0y", [](Scenario& s) -> double& { return s.explorer.delta_0y; }));
    f.push_back(num("explorer.delta_psi_0", [](Scenario& s) -> double& { return s.explorer.delta_psi_0; }));
    f.push_back(num("explorer.d_step", [](Scenario& s) -> double& { return s.explorer.d_step; }));
    f.push_back(num("explorer.f_des", [](Scenario& s) -> double& { return s.explorer.f_des; }));
    f.push_back(integer<int>("explorer.force_window", [](Scenario& s) -> int& { return s.explorer.force_window; }));
    f.push_back(num("explorer.yaw_rate_cutoff", [](Scenario& s) -> double& { return s.explorer.yaw_rate_cutoff; }));
    f.push_back({"explorer.hover_height",
                 [](Scenario& s, std::string_view v) { s.explorer.hover_z = -parse_double(v); },
                 [](const Scenario& s) {
                   return std::vector<std::string>{fmt(-s.explorer.hover_z)};
                 }});
    f.push_back(num("explorer.loop_radius", [](Scenario& s) -> double& { return s.explorer.loop_radius; }));
    f.push_back(num("explorer.loop_leave_radius", [](Scenario& s) -> double& { return s.explorer.loop_leave_radius; }));
    f.push_back(num("explorer.rearm_yaw_rate", [](Scenario& s) -> double& { return s.explorer.rearm_yaw_rate; }));
    f.push_back(num("explorer.contact_distance", [](Scenario& s) -> double& { return s.explorer.contact_distance; }));
    f.push_back(num("explorer.turn_radius_start", [](Scenario& s) -> double& { return s.explorer.turn_radius_start; }));
    f.push_back(num("explorer.turn_radius_end", [](Scenario& s) -> double& { return s.explorer.turn_radius_end; }));
    f.push_back(flag("explorer.stop_on_loop_closure", [](Scenario& s) -> bool& { return s.stop_on_loop_closure; }));

    f.push_back(flag("map.enabled", [](Scenario& s) -> bool& { return s.map_enabled; }));
    f.push_back(num("map.delta_map", [](Scenario& s) -> double& { return s.map.delta_map; }));
    f.push_back(vec3("map.block_dims", [](Scenario& s) -> Vec3& { return s.map.block_dims; }));
    f.push_back(num("map.side_offset", [](Scenario& s) -> double& { return s.map.side_offset; }));
    f.push_back(num("map.corner_offset", [](Scenario& s) -> double& { return s.map.corner_offset; }));
    f.push_back(num("map.dedup_radius", [](Scenario& s) -> double& { return s.map.dedup_radius; }));
    f.push_back(integer<int>("map.subdivisions", [](Scenario& s) -> int& { return s.map.subdivisions; }));
    f.push_back(num("map.corner_angle", [](Scenario& s) -> double& { return s.map.corner_angle; }));
    f.push_back(num("map.settle_time", [](Scenario& s) -> double& { return s.map.settle_time; }));

    f.push_back({"cob.strategy",
                 [](Scenario& s, std::string_view v) { s.cob.strategy = parse_enum(v, kPlanKinds); },
                 [](const Scenario& s) { return std::vector<std::string>{to_string(s.cob.strategy)}; }});
    f.push_back(num("cob.goal", [](Scenario& s) -> double& { return s.cob.goal; }));
    f.push_back(num("cob.wall", [](Scenario& s) -> double& { return s.cob.wall; }));
    f.push_back(num("cob.a_max", [](Scenario& s) -> double& { return s.cob.a_max; }));
    f.push_back(num("cob.v_max", [](Scenario& s) -> double& { return s.cob.v_max; }));
    f.push_back(num("cob.recovery_c", [](Scenario& s) -> double& { return s.cob.recovery_c; }));
    f.push_back(num("cob.recovery_hold", [](Scenario& s) -> double& { return s.cob.recovery_hold; }));
    f.push_back(num("cob.impact_force", [](Scenario& s) -> double& { return s.cob.impact_force; }));

    f.push_back(num("rates.physics", [](Scenario& s) -> double& { return s.rates.physics; }));
    f.push_back(num("rates.control", [](Scenario& s) -> double& { return s.rates.control; }));
    f.push_back(num("rates.estimator", [](Scenario& s) -> double& { return s.rates.estimator; }));
    f.push_back(num("rates.map", [](Scenario& s) -> double& { return s.rates.map; }));

    f.push_back(num("noise.accel_sigma", [](Scenario& s) -> double& { return s.noise.accel_sigma; }));
    f.push_back(num("noise.theta_sigma", [](Scenario& s) -> double& { return s.noise.theta_sigma; }));
    f.push_back(num("noise.pose_sigma", [](Scenario& s) -> double& { return s.noise.pose_sigma; }));

    f.push_back(vec3("init.position", [](Scenario& s) -> Vec3& { return s.init.position; }));
    f.push_back(vec3("init.velocity", [](Scenario& s) -> Vec3& { return s.init.velocity; }));
    f.push_back(num("init.yaw", [](Scenario& s) -> double& { return s.init.yaw; }));

    f.push_back(vec3("disturbance.com_force", [](Scenario& s) -> Vec3& { return s.disturbance.com_force; }));
    f.push_back(num("disturbance.com_start", [](Scenario& s) -> double& { return s.disturbance.com_start; }));
    f.push_back(vec3("disturbance.body_torque", [](Scenario& s) -> Vec3& { return s.disturbance.body_torque; }));
    f.push_back(num("disturbance.torque_start", [](Scenario& s) -> double& { return s.disturbance.torque_start; }));
    f.push_back(integer<int>("disturbance.arm_index", [](Scenario& s) -> int& { return s.disturbance.arm_index; }));
    f.push_back(num("disturbance.arm_force", [](Scenario& s) -> double& { return s.disturbance.arm_force; }));
    f.push_back(num("disturbance.arm_spike", [](Scenario& s) -> double& { return s.disturbance.arm_spike; }));
    f.push_back(num("disturbance.arm_start", [](Scenario& s) -> double& { return s.disturbance.arm_start; }));
    f.push_back(num("disturbance.arm_spike_duration", [](Scenario& s) -> double& { return s.disturbance.arm_spike_duration; }));

    f.push_back(integer<int>("trace.every", [](Scenario& s) -> int& { return s.trace_every; }));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

bool divides(double big, double small) {
  const double r = big / small;
  return std::abs(r - std::round(r)) < 1e-9 && r >= 1.0 - 1e-12;
}

}  // namespace

std::vector<std::string> scenario_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void apply_override(Scenario& s, const std::string& key, const std::string& value) {
  const Field* f = find_field(trim(key));
  if (!f) throw ScenarioError("unknown key '" + trim(key) + "'");
  try {
    f->set(s, value);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("bad value for '" + trim(key) + "': " + e.what());
  }
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(ln) + ": ";
    if (eq == std::string::npos) throw ScenarioError(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) throw ScenarioError(where + "unknown key '" + key + "'");
    try {
      f->set(s, value);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(where + "bad value for '" + key + "': " + e.what());
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

std::string dump_scenario(const Scenario& s) {
  std::string out;
  for (const auto& f : fields()) {
    if (!f.get) continue;
    for (const auto& v : f.get(s)) out += f.key + " = " + v + "\n";
  }
  return out;
}

Polygon preset_box() {
  return Polygon{{{-0.61, -0.5}, {0.61, -0.5}, {0.61, 0.5}, {-0.61, 0.5}}};
}

std::vector<Polygon> preset_corridor() {
  // Wall face seen from x < 0 with gentle bends, closed by an end wall across +y.
  const double slant = std::tan(10.0 * kPi / 180.0);
  Polygon p;
  p.vertices = {{0.6, -1.5},
                {0.6, 1.0},
                {0.6 + slant, 2.0},
                {0.6 + slant, 3.0},
                {0.6, 4.0},
                {0.6, 5.0},
                {0.6 - slant, 6.0},
                {0.6, 7.0},
                {0.6, 7.5},
                {-6.0, 7.5},
                {-6.0, 8.0},
                {2.0, 8.0},
                {2.0, -1.5}};
  return {p};
}

Environment Scenario::resolved_environment() const {
  Environment e = env;
  e.obstacles.clear();
  switch (preset) {
    case EnvPreset::Box: e.obstacles.push_back(preset_box()); break;
    case EnvPreset::Corridor: e.obstacles = preset_corridor(); break;
    case EnvPreset::WallPush:
      e.obstacles.push_back(Polygon{{{0.5, -2.0}, {1.0, -2.0}, {1.0, 2.0}, {0.5, 2.0}}});
      break;
    case EnvPreset::CobWall: {
      const double face = cob.wall + body.footprint_radius;
      e.obstacles.push_back(Polygon{{{face, -2.0}, {face + 0.5, -2.0}, {face + 0.5, 2.0}, {face, 2.0}}});
      break;
    }
    case EnvPreset::PulleyCom:
    case EnvPreset::None: break;
  }
  e.obstacles.insert(e.obstacles.end(), env.obstacles.begin(), env.obstacles.end());
  return e;
}

Vec3 Scenario::resolved_wrench_setpoint() const {
  if (!wrench_setpoint_auto) return wrench_setpoint;
  if (preset == EnvPreset::WallPush) {
    // Head-on arm reach from the body center.
    return {0.5 - (body.arm_radius + body.guard_radius()), 0.0, explorer.hover_z};
  }
  return {init.position.x(), init.position.y(), explorer.hover_z};
}

int Scenario::control_decimation() const {
  return static_cast<int>(std::lround(rates.physics / rates.control));
}

int Scenario::estimator_decimation() const {
  return static_cast<int>(std::lround(rates.physics / rates.estimator));
}

void Scenario::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(duration > 0.0, "duration must be > 0");
  require(rates.physics > 0.0 && rates.control > 0.0 && rates.estimator > 0.0 && rates.map > 0.0,
          "rates must be positive");
  require(rates.physics >= rates.control && rates.control >= rates.estimator,
          "rates must satisfy physics >= control >= estimator");
  require(divides(rates.physics, rates.control), "rates.control must divide rates.physics");
  require(divides(rates.physics, rates.estimator), "rates.estimator must divide rates.physics");
  require(1.0 / rates.physics <= 0.01, "rates.physics must be >= 100 Hz");
  require(trace_every >= 1 && estimator_decimation() % trace_every == 0,
          "trace.every must divide the estimator decimation (" +
              std::to_string(estimator_decimation()) + ")");
  require(noise.accel_sigma >= 0.0 && noise.theta_sigma >= 0.0 && noise.pose_sigma >= 0.0,
          "noise sigmas must be >= 0");
  require(disturbance.arm_index >= 0 && disturbance.arm_index < kArmCount,
          "disturbance.arm_index must be in 0..3");
  require(disturbance.arm_spike_duration >= 0.0, "disturbance.arm_spike_duration must be >= 0");
  require(force_des.allFinite(), "mission.force_des must be finite");
  body.validate();
  arm.validate();
  FilterBank bank = estimator;
  bank.rate = rates.estimator;
  bank.validate();
  control.validate();
  admittance.validate();
  explorer.validate();
  map.validate(explorer.f_des);
  resolved_environment().validate();
  if (mission == MissionKind::Cob) {
    require(preset == EnvPreset::CobWall, "COB mission needs env.preset = COB_WALL");
    CobProblem p;
    p.start_position = init.position.x();
    p.goal = cob.goal;
    p.wall = cob.wall;
    p.a_max = cob.a_max;
    p.v_max = cob.v_max;
    p.restitution = env.restitution;
    p.validate();
    require(cob.recovery_c >= 0.0 && cob.recovery_hold >= 0.0 && cob.impact_force > 0.0,
            "cob recovery parameters must be non-negative");
    const bool at_wall = std::abs(cob.goal - cob.wall) <= 1e-12;
    if (cob.strategy == PlanKind::CollideToStop) require(at_wall, "COLLIDE_TO_STOP needs cob.goal = cob.wall");
    if (cob.strategy == PlanKind::CollideToDecelerate) {
      require(!at_wall, "COLLIDE_TO_DECELERATE needs cob.goal short of cob.wall");
    }
  }
}

}  // namespace xpl
