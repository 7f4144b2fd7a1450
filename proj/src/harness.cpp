#include "xplorer/harness.hpp"

#include "xplorer/control.hpp"
#include "xplorer/estimator.hpp"
#include "xplorer/explorer.hpp"

#include <chrono>
#include <cstdlib>
#include <deque>
#include <random>
#include <sstream>

namespace xpl {

namespace {

double mode_code(Mode m) { return static_cast<double>(static_cast<int>(m)); }
double cn_code(const ContactNormal& cn) { return one_hot(cn) ? normal_index(cn) + 1.0 : 0.0; }
double dir_code(Dir d) { return static_cast<double>(static_cast<int>(d)); }

Mission mission_of(MissionKind k) {
  switch (k) {
    case MissionKind::Hover: return Mission::Hover;
    case MissionKind::Explore: return Mission::Explore;
    case MissionKind::StaticWrench: return Mission::StaticWrench;
    case MissionKind::Cob: return Mission::Cob;
  }
  return Mission::Hover;
}

// Closed-loop driver for the collide-to-brake missions.
class CobDriver {
 public:
  CobDriver(const Scenario& s) : s_(s) {
    prob_.start_position = s.init.position.x();
    prob_.start_velocity = s.init.velocity.x();
    prob_.goal = s.cob.goal;
    prob_.a_max = s.cob.a_max;
    prob_.v_max = s.cob.v_max;
    prob_.restitution = s.env.restitution;
    if (s.cob.strategy == PlanKind::NoCollision) {
      plan_ = no_collision_plan(prob_);
      phase_ = Phase::Regulate;
    } else {
      prob_.wall = s.cob.wall;
      plan_ = collide_plan(prob_);
      for (const auto& seg : plan_.segments) {
        t_impact_ += seg.duration;
        if (seg.jump_after) break;
      }
    }
  }

  const CobPlan& plan() const { return plan_; }

  Setpoint step(double t, const VehicleState& st, const Vec3& pose, const ForceEstimate& est) {
    recent_v_.push_back(st.v);
    if (recent_v_.size() > 10) recent_v_.pop_front();
    const double yaw = s_.init.yaw;
    const Vec3 goal(s_.cob.goal, s_.init.position.y(), s_.explorer.hover_z);

    if (phase_ == Phase::Approach || phase_ == Phase::Push) {
      const bool armed = t > 0.5 * t_impact_;
      if (armed && est.upsilon == 1 && est.fused.norm() > s_.cob.impact_force) {
        Vec3 v_pre = Vec3::Zero();
        for (const auto& v : recent_v_) {
          if (v.norm() > v_pre.norm()) v_pre = v;
        }
        hold_ = recovery_setpoint(v_pre, pose, yaw, s_.cob.recovery_c);
        hold_.mode = select_mode(Mission::Cob, true, true);
        recover_until_ = t + s_.cob.recovery_hold;
        phase_ = Phase::Recover;
      }
    }
    if (phase_ == Phase::Approach && t >= t_impact_) phase_ = Phase::Push;
    if (phase_ == Phase::Push && t >= t_impact_ + 1.0) phase_ = Phase::Regulate;
    if (phase_ == Phase::Recover && t >= recover_until_) phase_ = Phase::Regulate;

    Setpoint sp;
    sp.psi_d = sp.psi_d_star = yaw;
    sp.mode = select_mode(Mission::Cob, false, false);
    switch (phase_) {
      case Phase::Approach: {
        const auto [x, v] = approach_state(t);
        sp.r_d = Vec3(x, goal.y(), goal.z());
        sp.v_ff = Vec3(v, 0.0, 0.0);
        break;
      }
      case Phase::Push: {
        const double v = plan_.impact_velocity;
        sp.r_d = Vec3(s_.cob.wall + v * (t - t_impact_), goal.y(), goal.z());
        sp.v_ff = Vec3(v, 0.0, 0.0);
        break;
      }
      case Phase::Recover: return hold_;
      case Phase::Regulate: sp.r_d = goal; break;
    }
    sp.r_d_star = sp.r_d;
    return sp;
  }

 private:
  enum class Phase { Approach, Push, Recover, Regulate };

  std::pair<double, double> approach_state(double t) const {
    double x = prob_.start_position;
    double v = prob_.start_velocity;
    double tau = 0.0;
    for (const auto& seg : plan_.segments) {
      const double d = std::min(seg.duration, t - tau);
      if (d <= 0.0) break;
      x += v * d + 0.5 * seg.accel * d * d;
      v += seg.accel * d;
      tau += seg.duration;
      if (seg.jump_after) break;
    }
    return {x, v};
  }

  const Scenario& s_;
  CobProblem prob_;
  CobPlan plan_;
  Phase phase_ = Phase::Approach;
  double t_impact_ = 0.0;
  double recover_until_ = 0.0;
  Setpoint hold_;
  std::deque<Vec3> recent_v_;
};

}  // namespace

RunResult run(const Scenario& scenario) {
  scenario.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult result;
  result.scenario = scenario;
  const Scenario& s = result.scenario;

  const double dt = 1.0 / s.rates.physics;
  const int n_ctrl = s.control_decimation();
  const int n_est = s.estimator_decimation();
  const double dt_ctrl = n_ctrl * dt;
  const double dt_est = n_est * dt;
  const long steps = std::lround(s.duration / dt);
  const Mission mission = mission_of(s.mission);

  VehicleState init;
  init.x = s.init.position;
  init.v = s.init.velocity;
  init.R = rot_z(s.init.yaw);
  PhysicsWorld world(s.body, s.arm, s.resolved_environment(), init);

  FilterBank bank = s.estimator;
  bank.rate = s.rates.estimator;
  Estimator estimator(s.body, s.arm, bank);

  PpidGains gains = s.control;
  gains.v_limit = s.body.v_limit;
  if (s.mission == MissionKind::Cob) gains.v_limit = std::min(gains.v_limit, s.cob.v_max);
  PpidController controller(s.body, gains);

  Explorer explorer(s.explorer, s.admittance);
  Admittance wrench_admittance(s.admittance);
  wrench_admittance.params().delta_f_des = s.force_des;
  const Vec3 wrench_star = s.resolved_wrench_setpoint();

  MapParams mp = s.map;
  mp.emit_rate = s.rates.map;
  Mapper mapper(mp);
  mapper.cloud().scenario = s.name;
  const bool mapping = s.map_enabled && s.mission == MissionKind::Explore;

  std::optional<CobDriver> cob;
  if (s.mission == MissionKind::Cob) {
    cob.emplace(s);
    result.plan = cob->plan();
  }

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noise3 = [&](double sigma) {
    Vec3 n = Vec3::Zero();
    if (sigma > 0.0) {
      for (int k = 0; k < 3; ++k) n[k] = sigma * gauss(rng);
    }
    return n;
  };

  Setpoint sp;
  sp.r_d = sp.r_d_star = s.init.position;
  sp.psi_d = sp.psi_d_star = s.init.yaw;
  Command cmd;
  SensorPacket pkt;
  pkt.R = init.R;
  bool est_fresh = false;
  double thrust_sum = 0.0;
  Vec3 torque_sum = Vec3::Zero();
  Vec3 v_last_est = init.v;
  bool impact_since_row = false;
  bool stop = false;

  Trace& trace = result.trace;
  trace.rows.reserve(static_cast<std::size_t>(steps / s.trace_every + 1));

  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const VehicleState& st = world.state();

    if (k % n_ctrl == 0) {
      const Vec3 pose = st.x + noise3(s.noise.pose_sigma);
      const ForceEstimate& est = estimator.last();
      switch (s.mission) {
        case MissionKind::Hover:
          sp = Setpoint{};
          sp.r_d = sp.r_d_star = s.init.position;
          sp.psi_d = sp.psi_d_star = s.init.yaw;
          sp.mode = select_mode(mission, false, false);
          break;
        case MissionKind::StaticWrench: {
          const auto [r_d, psi_d] =
              wrench_admittance.reshape(est.fused, est.yaw_torque, wrench_star, s.init.yaw, dt_ctrl, false);
          sp = Setpoint{};
          sp.r_d = r_d;
          sp.psi_d = psi_d;
          sp.r_d_star = wrench_star;
          sp.psi_d_star = s.init.yaw;
          sp.mode = select_mode(mission, false, false);
          break;
        }
        case MissionKind::Explore: {
          const double yaw_rate = (st.R * st.omega).z();
          const ExplorerOutput out = explorer.step(pose, st.R, yaw_rate, est, est_fresh, t, dt_ctrl);
          sp = out.sp;
          sp.mode = select_mode(mission, false, false);
          if (mapping) {
            mapper.step(pose, st.R, explorer.state(), arm_load(est), -st.x.z() > 0.2, dt_ctrl);
          }
          if (out.loop_closed_now) {
            result.loop_closed = true;
            result.loop_closed_time = t;
            if (s.stop_on_loop_closure) stop = true;
          }
          break;
        }
        case MissionKind::Cob: sp = cob->step(t, st, pose, est); break;
      }
      est_fresh = false;
      VehicleState seen = st;
      seen.x = pose;
      cmd = controller.step(seen, sp, dt_ctrl);
    }

    const double t_next = (k + 1) * dt;
    Disturbance& dist = world.disturbance();
    const auto& ds = s.disturbance;
    dist.com_force = t >= ds.com_start ? ds.com_force : Vec3::Zero();
    dist.body_torque = t >= ds.torque_start ? ds.body_torque : Vec3::Zero();
    dist.arm_force.fill(0.0);
    if (t >= ds.arm_start) {
      dist.arm_force[ds.arm_index] =
          t < ds.arm_start + ds.arm_spike_duration ? ds.arm_spike : ds.arm_force;
    }

    Command applied = cmd;
    applied.thrust *= 1.0 + s.thrust_scale_error;
    const StepTruth& truth = world.step(applied, dt);
    impact_since_row = impact_since_row || truth.impact;
    thrust_sum += cmd.thrust;
    torque_sum += cmd.torque;

    const VehicleState& now = world.state();
    if (!all_finite(now.x) || !all_finite(now.v) || !all_finite(now.R) || !all_finite(now.omega)) {
      throw RunError("non-finite state at row " + std::to_string(trace.rows.size()) + " (t = " +
                     format_sig(t_next) + ")");
    }

    const bool est_tick = (k + 1) % n_est == 0;
    if (est_tick) {
      pkt.t = t_next;
      for (int i = 0; i < kArmCount; ++i) {
        pkt.theta[i] = now.arms[i].theta;
        if (s.noise.theta_sigma > 0.0) pkt.theta[i] += s.noise.theta_sigma * gauss(rng);
      }
      pkt.accel = (now.v - v_last_est) / dt_est + noise3(s.noise.accel_sigma);
      v_last_est = now.v;
      pkt.R = now.R;
      pkt.omega = now.omega;
      pkt.thrust_cmd = thrust_sum / n_est / kThrustScale;
      pkt.torque_mean = torque_sum / n_est;
      thrust_sum = 0.0;
      torque_sum.setZero();
      pkt.quantize();
      estimator.update(pkt);
      est_fresh = true;
    }

    if ((k + 1) % s.trace_every == 0) {
      const ForceEstimate& e = estimator.last();
      const ExplorerState& ex = explorer.state();
      std::vector<double> row;
      row.reserve(trace.columns.size());
      auto put3 = [&row](const Vec3& v) { row.insert(row.end(), {v.x(), v.y(), v.z()}); };
      row.push_back(t_next);
      put3(now.x);
      put3(now.v);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) row.push_back(now.R(r, c));
      }
      put3(now.omega);
      for (const auto& a : now.arms) row.push_back(a.theta);
      for (const auto& a : now.arms) row.push_back(a.theta_dot);
      row.push_back(cmd.thrust);
      put3(cmd.torque);
      row.push_back(mode_code(sp.mode));
      put3(sp.r_d);
      row.push_back(sp.psi_d);
      put3(sp.r_d_star);
      row.push_back(sp.psi_d_star);
      row.push_back(est_tick ? 1.0 : 0.0);
      for (double th : pkt.theta) row.push_back(th);
      put3(pkt.accel);
      row.push_back(pkt.thrust_cmd);
      put3(pkt.torque_mean);
      for (double th : e.theta) row.push_back(th);
      for (const auto& f : e.per_arm) put3(f);
      put3(e.com);
      put3(e.fused);
      put3(e.body);
      put3(e.kappa);
      row.push_back(e.upsilon);
      row.push_back(e.yaw_torque);
      put3(truth.external_force);
      row.push_back(truth.external_torque.z());
      row.push_back(static_cast<double>(truth.contacts.size()));
      row.push_back(impact_since_row ? 1.0 : 0.0);
      row.push_back(ex.gamma);
      row.push_back(cn_code(ex.C_n));
      row.push_back(dir_code(ex.lambda));
      row.push_back(ex.psi_sp);
      row.push_back(ex.turn_accum);
      row.push_back(explorer.smoothed_force().x());
      row.push_back(explorer.smoothed_force().y());
      row.push_back(explorer.yaw_rate());
      row.push_back(static_cast<double>(mapper.cloud().blocks.size()));
      row.push_back(ex.loop_closed ? 1.0 : 0.0);
      trace.rows.push_back(std::move(row));
      impact_since_row = false;
    }
    result.physics_steps = k + 1;
    if (stop && (k + 1) % s.trace_every == 0) break;
  }

  if (mapping) result.cloud = mapper.cloud();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

Report make_report(const Trace& trace, const Scenario& s, const MapCloud* cloud) {
  Report r;
  r.name = s.name;
  r.mission = s.mission;
  if (trace.rows.empty()) return r;
  const auto t = trace.column("t");
  r.sim_time = t.back();
  const double row_dt = s.trace_every / s.rates.physics;
  const auto gamma = trace.column("gamma");
  const auto closed = trace.column("loop_closed");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (s.mission == MissionKind::Explore) {
      const int g = static_cast<int>(gamma[i]);
      if (g >= 1 && g <= 3) r.dwell[g] += row_dt;
    }
    if (!r.loop_closed && closed[i] > 0.5) {
      r.loop_closed = true;
      r.loop_closed_time = t[i];
    }
  }

  const auto tick = trace.column("est_tick");
  const auto fx = trace.column("fused_x");
  const auto fy = trace.column("fused_y");
  const auto ex = trace.column("ext_fx");
  const auto ey = trace.column("ext_fy");
  double se = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (tick[i] < 0.5) continue;
    ++r.est_samples;
    se += std::pow(fx[i] - ex[i], 2) + std::pow(fy[i] - ey[i], 2);
  }
  if (r.est_samples > 0) r.est_rmse_xy = std::sqrt(se / r.est_samples);
  const std::size_t tail = t.size() - std::max<std::size_t>(1, t.size() / 4);
  double contact = 0.0;
  double fused = 0.0;
  for (std::size_t i = tail; i < t.size(); ++i) {
    contact += std::hypot(ex[i], ey[i]);
    fused += std::hypot(fx[i], fy[i]);
  }
  r.steady_contact_force = contact / (t.size() - tail);
  r.steady_fused_force = fused / (t.size() - tail);
  r.blocks = static_cast<long>(trace.rows.back()[trace.index("blocks")]);

  const Environment env = s.resolved_environment();
  if (cloud && !cloud->points.empty() && !env.obstacles.empty()) {
    r.map = map_metrics(*cloud, env, s.map.block_dims.y());
  }
  if (s.mission == MissionKind::Cob) {
    r.cob = measure_metrics(t, trace.column("x"), s.init.position.x(), s.cob.goal);
  }
  return r;
}

std::string report_text(const Report& r) {
  std::ostringstream o;
  o << "scenario " << r.name << " (" << to_string(r.mission) << "), " << format_sig(r.sim_time)
    << " s simulated\n";
  if (r.mission == MissionKind::Explore) {
    o << "state dwell [s]\n";
    for (int g = 1; g <= 3; ++g) o << "  gamma " << g << "  " << format_sig(r.dwell[g]) << "\n";
    o << "loop closure  " << (r.loop_closed ? "yes at " + format_sig(r.loop_closed_time) + " s" : "no")
      << "\n";
    o << "map blocks    " << r.blocks << "\n";
  }
  o << "estimator samples " << r.est_samples << ", xy RMSE " << format_sig(r.est_rmse_xy) << " N\n";
  o << "final-quarter mean xy force: true " << format_sig(r.steady_contact_force) << " N, fused "
    << format_sig(r.steady_fused_force) << " N\n";
  if (r.map) {
    o << "map extent est " << format_sig(r.map->est_x) << " x " << format_sig(r.map->est_y)
      << " m, true " << format_sig(r.map->true_x) << " x " << format_sig(r.map->true_y) << " m\n";
    o << "map area accuracy " << format_sig(r.map->area_accuracy) << " %, Hausdorff "
      << format_sig(r.map->hausdorff) << " m\n";
  }
  if (r.cob) {
    o << "maneuver tau_r " << format_sig(r.cob->tau_r) << " s, tau_s " << format_sig(r.cob->tau_s)
      << " s, rmse " << format_sig(r.cob->rmse) << " m\n";
  }
  return o.str();
}

std::string report_csv(const Report& r) {
  std::ostringstream o;
  auto row = [&o](const std::string& k, const std::string& v) { o << k << "," << v << "\n"; };
  row("key", "value");
  row("name", r.name);
  row("mission", to_string(r.mission));
  row("sim_time", format_sig(r.sim_time));
  for (int g = 1; g <= 3; ++g) row("dwell_gamma" + std::to_string(g), format_sig(r.dwell[g]));
  row("loop_closed", r.loop_closed ? "1" : "0");
  row("loop_closed_time", format_sig(r.loop_closed_time));
  row("est_samples", std::to_string(r.est_samples));
  row("est_rmse_xy", format_sig(r.est_rmse_xy));
  row("steady_contact_force", format_sig(r.steady_contact_force));
  row("steady_fused_force", format_sig(r.steady_fused_force));
  row("blocks", std::to_string(r.blocks));
  if (r.map) {
    row("map_est_x", format_sig(r.map->est_x));
    row("map_est_y", format_sig(r.map->est_y));
    row("map_true_x", format_sig(r.map->true_x));
    row("map_true_y", format_sig(r.map->true_y));
    row("map_area_accuracy", format_sig(r.map->area_accuracy));
    row("map_hausdorff", format_sig(r.map->hausdorff));
  }
  if (r.cob) {
    row("tau_r", format_sig(r.cob->tau_r));
    row("tau_s", format_sig(r.cob->tau_s));
    row("rmse", format_sig(r.cob->rmse));
  }
  return o.str();
}

std::string trace_meta(const Scenario& s) {
  FilterBank bank = s.estimator;
  bank.rate = s.rates.estimator;
  return dump_scenario(s) + "# arm filter group delay " + format_sig(bank.arm_group_delay_samples()) +
         " samples\n";
}

Artifacts write_artifacts(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = r.scenario.name;
  Artifacts a;
  a.trace = dir / (stem + ".trace.csv");
  a.meta = dir / (stem + ".trace.meta");
  a.report_txt = dir / (stem + ".report.txt");
  a.report_csv = dir / (stem + ".report.csv");
  std::ostringstream csv;
  write_trace_csv(r.trace, csv);
  write_file_atomic(a.trace, csv.str());
  write_file_atomic(a.meta, trace_meta(r.scenario));
  const MapCloud* cloud = r.cloud ? &*r.cloud : nullptr;
  if (cloud) {
    a.ply = dir / (stem + ".ply");
    write_ply_file(*cloud, *a.ply);
  }
  const Report rep = make_report(r.trace, r.scenario, cloud);
  write_file_atomic(a.report_txt, report_text(rep));
  write_file_atomic(a.report_csv, report_csv(rep));
  return a;
}

std::filesystem::path output_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("XPLORER_OUT_DIR"); env && *env) return env;
  return "out";
}

ReplayResult replay_estimate(const Trace& trace, const Scenario& s) {
  FilterBank bank = s.estimator;
  bank.rate = s.rates.estimator;
  Estimator estimator(s.body, s.arm, bank);
  ReplayResult out;
  const std::size_t tick = trace.index("est_tick");
  auto col = [&trace](const std::string& n) { return trace.index(n); };
  std::vector<std::pair<std::string, std::size_t>> checked;
  for (const auto& n : trace_columns()) {
    const bool estimate = n.rfind("thf", 0) == 0 || (n.rfind("fa", 0) == 0 && n.size() == 5) ||
                          n.rfind("com_", 0) == 0 || n.rfind("fused_", 0) == 0 ||
                          n.rfind("body_", 0) == 0 || n.rfind("kappa_", 0) == 0 ||
                          n == "upsilon" || n == "yaw_tau";
    if (estimate) checked.emplace_back(n, col(n));
  }
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& row = trace.rows[i];
    if (row[tick] < 0.5) continue;
    SensorPacket pkt;
    pkt.t = row[col("t")];
    for (int a = 0; a < kArmCount; ++a) pkt.theta[a] = row[col("raw_th" + std::to_string(a + 1))];
    pkt.accel = Vec3(row[col("acc_x")], row[col("acc_y")], row[col("acc_z")]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pkt.R(r, c) = row[col("r" + std::to_string(r) + std::to_string(c))];
    }
    pkt.omega = Vec3(row[col("wx")], row[col("wy")], row[col("wz")]);
    pkt.thrust_cmd = row[col("thrust_cmd")];
    pkt.torque_mean = Vec3(row[col("taum_x")], row[col("taum_y")], row[col("taum_z")]);
    pkt.quantize();
    const ForceEstimate& e = estimator.update(pkt);
    std::vector<double> values;
    for (double th : e.theta) values.push_back(th);
    for (const auto& f : e.per_arm) values.insert(values.end(), {f.x(), f.y(), f.z()});
    for (const Vec3* v : {&e.com, &e.fused, &e.body, &e.kappa}) {
      values.insert(values.end(), {v->x(), v->y(), v->z()});
    }
    values.push_back(e.upsilon);
    values.push_back(e.yaw_torque);
    ++out.samples;
    for (std::size_t c = 0; c < checked.size(); ++c) {
      const std::string want = format_sig(row[checked[c].second]);
      const std::string got = format_sig(values[c]);
      if (want != got) {
        if (out.mismatches == 0) {
          out.first_mismatch = "row " + std::to_string(i) + " column " + checked[c].first +
                               ": logged " + want + ", replayed " + got;
        }
        ++out.mismatches;
      }
    }
  }
  return out;
}

}  // namespace xpl
