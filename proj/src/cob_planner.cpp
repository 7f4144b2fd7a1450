#include "xplorer/cob_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xpl {

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::NoCollision: return "NO_COLLISION";
    case PlanKind::CollideToStop: return "COLLIDE_TO_STOP";
    case PlanKind::CollideToDecelerate: return "COLLIDE_TO_DECELERATE";
  }
  return "UNKNOWN";
}

void CobProblem::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(start_position) && std::isfinite(start_velocity) && std::isfinite(goal),
          "cob problem has non-finite values");
  require(a_max > 0.0, "cob.a_max must be > 0");
  require(v_max > 0.0, "cob.v_max must be > 0");
  require(restitution >= 0.0 && restitution < 1.0, "cob.e must lie in [0, 1)");
  require(std::abs(start_velocity) <= v_max, "cob start speed exceeds v_max");
  if (wall) {
    const double dir = goal >= start_position ? 1.0 : -1.0;
    require(dir * (*wall - start_position) > 0.0, "cob wall must lie ahead of the start");
    require(dir * (*wall - goal) >= 0.0, "cob wall must not lie before the goal");
  }
}

BangBang bang_bang_time(double d, double a, double vmax) {
  if (!(d >= 0.0) || !(a > 0.0) || !(vmax > 0.0)) {
    throw std::invalid_argument("bang_bang_time needs d >= 0, a > 0, v_max > 0");
  }
  BangBang bb;
  const double peak = std::sqrt(a * d);
  if (peak <= vmax) {
    bb.t_accel = bb.t_decel = peak / a;
    bb.peak_speed = peak;
    bb.time = 2.0 * std::sqrt(d / a);
  } else {
    bb.t_accel = bb.t_decel = vmax / a;
    bb.t_cruise = d / vmax - vmax / a;
    bb.peak_speed = vmax;
    bb.time = vmax / a + d / vmax;
  }
  return bb;
}

double brute_force_time(double d, double a, double vmax, double dt) {
  if (d <= 0.0) return 0.0;
  const double tol = 1e-12 * std::max(1.0, d);
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0;; ++i) {
    const double ta = static_cast<double>(i) * dt;
    if (ta >= best) break;
    const double v = std::min(a * ta, vmax);
    if (v <= 0.0) continue;
    const double t_sat = vmax / a;
    const double x_acc = ta <= t_sat ? 0.5 * a * ta * ta : 0.5 * vmax * t_sat + vmax * (ta - t_sat);
    const double brake = v * v / (2.0 * a);
    auto reaches = [&](long c) { return x_acc + v * static_cast<double>(c) * dt + brake >= d - tol; };
    long hi = 1;
    while (!reaches(hi)) hi *= 2;
    long lo = 0;
    if (reaches(0)) {
      hi = 0;
    } else {
      while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (reaches(mid) ? hi : lo) = mid;
      }
    }
    best = std::min(best, ta + static_cast<double>(hi) * dt + v / a);
  }
  return best;
}

namespace {

// Appends the minimum-time profile from (0, v0) to (d, 0) in a 1-D frame.
void append_to_rest(std::vector<Segment>& segs, double d, double v0, double a, double vmax) {
  auto push = [&](double acc, double dur) {
    if (dur > 0.0) segs.push_back({acc, dur, false});
  };
  if (v0 < 0.0) {
    push(a, -v0 / a);
    d += v0 * v0 / (2.0 * a);
    v0 = 0.0;
  }
  if (d < 0.0 && v0 == 0.0) {
    const BangBang bb = bang_bang_time(-d, a, vmax);
    push(-a, bb.t_accel);
    push(0.0, bb.t_cruise);
    push(a, bb.t_decel);
    return;
  }
  const double stop = v0 * v0 / (2.0 * a);
  if (stop > d) {
    push(-a, v0 / a);
    append_to_rest(segs, d - stop, 0.0, a, vmax);
    return;
  }
  const double peak = std::sqrt(a * d + 0.5 * v0 * v0);
  if (peak <= vmax) {
    push(a, (peak - v0) / a);
    push(-a, peak / a);
  } else {
    const double cruise = d - (vmax * vmax - v0 * v0) / (2.0 * a) - vmax * vmax / (2.0 * a);
    push(a, (vmax - v0) / a);
    push(0.0, cruise / vmax);
    push(-a, vmax / a);
  }
}

struct Rollout {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

Rollout roll(const std::vector<Segment>& segs, double x, double v, const PostImpactMap& post) {
  Rollout r{x, v, 0.0};
  for (const auto& s : segs) {
    r.x += r.v * s.duration + 0.5 * s.accel * s.duration * s.duration;
    r.v += s.accel * s.duration;
    r.t += s.duration;
    if (s.jump_after) r.v = post(r.v);
  }
  return r;
}

void finish(CobPlan& plan, const CobProblem& p, const PostImpactMap& post) {
  const Rollout r = roll(plan.segments, p.start_position, p.start_velocity, post);
  plan.total_time = r.t;
  plan.terminal_position = r.x;
  plan.terminal_velocity = r.v;
}

double direction(const CobProblem& p) { return p.goal >= p.start_position ? 1.0 : -1.0; }

void to_world(std::vector<Segment>& segs, double dir) {
  for (auto& s : segs) s.accel *= dir;
}

}  // namespace

CobPlan no_collision_plan(const CobProblem& p) {
  p.validate();
  const double dir = direction(p);
  CobPlan plan;
  plan.kind = PlanKind::NoCollision;
  append_to_rest(plan.segments, dir * (p.goal - p.start_position), dir * p.start_velocity, p.a_max,
                 p.v_max);
  to_world(plan.segments, dir);
  finish(plan, p, [](double v) { return v; });
  return plan;
}

CobPlan collide_plan(const CobProblem& p, const PostImpactMap& post) {
  p.validate();
  if (!p.wall) throw std::invalid_argument("collide plan needs a wall");
  const double dir = direction(p);
  const double a = p.a_max;
  const double vmax = p.v_max;
  const double g = dir * (p.goal - p.start_position);
  double w = dir * (*p.wall - p.start_position);
  double v0 = dir * p.start_velocity;
  const double e = p.restitution;
  const PostImpactMap jump_s = post ? PostImpactMap([&](double v) { return dir * post(dir * v); })
                                    : PostImpactMap([e](double v) { return -e * v; });

  CobPlan plan;
  auto& segs = plan.segments;
  if (v0 < 0.0) {
    segs.push_back({a, -v0 / a, false});
    w += v0 * v0 / (2.0 * a);
    v0 = 0.0;
  }
  double v_hit = 0.0;
  if ((vmax * vmax - v0 * v0) / (2.0 * a) >= w) {
    v_hit = std::sqrt(v0 * v0 + 2.0 * a * w);
    segs.push_back({a, (v_hit - v0) / a, true});
  } else {
    v_hit = vmax;
    segs.push_back({a, (vmax - v0) / a, false});
    segs.push_back({0.0, (w - (vmax * vmax - v0 * v0) / (2.0 * a)) / vmax, true});
  }
  plan.impact_velocity = dir * v_hit;
  const double v_post = jump_s(v_hit);
  const double to_goal = g - (dir * (*p.wall - p.start_position));
  if (std::abs(to_goal) <= 1e-12) {
    plan.kind = PlanKind::CollideToStop;
    if (v_post != 0.0) segs.push_back({v_post < 0.0 ? a : -a, std::abs(v_post) / a, false});
  } else {
    plan.kind = PlanKind::CollideToDecelerate;
    append_to_rest(segs, to_goal, v_post, a, vmax);
  }
  to_world(segs, dir);
  finish(plan, p, post ? post : PostImpactMap([e](double v) { return -e * v; }));
  return plan;
}

CobPlan choose_plan(const CobProblem& p, const PostImpactMap& post) {
  CobPlan best = no_collision_plan(p);
  if (!p.wall) return best;
  CobPlan hit = collide_plan(p, post);
  return hit.total_time < best.total_time ? hit : best;
}

std::vector<PhaseSample> sample_plan(const CobPlan& plan, const CobProblem& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample dt must be > 0");
  const double e = p.restitution;
  std::vector<PhaseSample> out;
  double x = p.start_position;
  double v = p.start_velocity;
  double t0 = 0.0;
  out.push_back({0.0, x, v});
  for (const auto& s : plan.segments) {
    const long n = static_cast<long>(std::floor(s.duration / dt));
    for (long k = 1; k <= n; ++k) {
      const double tau = static_cast<double>(k) * dt;
      out.push_back({t0 + tau, x + v * tau + 0.5 * s.accel * tau * tau, v + s.accel * tau});
    }
    x += v * s.duration + 0.5 * s.accel * s.duration * s.duration;
    v += s.accel * s.duration;
    t0 += s.duration;
    out.push_back({t0, x, v});
    if (s.jump_after) {
      v = -e * v;
      out.push_back({t0, x, v});
    }
  }
  return out;
}

ManeuverMetrics measure_metrics(const std::vector<double>& t, const std::vector<double>& x,
                                double start, double goal) {
  if (t.size() != x.size() || t.empty()) {
    throw std::invalid_argument("metric trace needs matching, non-empty time and position");
  }
  ManeuverMetrics m;
  const double step = goal - start;
  if (step == 0.0) {
    m.rose = m.settled = true;
    m.tau_r = m.tau_s = t.front();
    return m;
  }
  const std::size_t n = t.size();
  std::optional<std::size_t> last_out;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = (x[k] - start) / step;
    if (!m.rose && p >= kRiseFraction) {
      m.rose = true;
      m.tau_r = t[k];
    }
    if (std::abs(p - 1.0) > kSettleBand) last_out = k;
  }
  if (!m.rose) m.tau_r = std::numeric_limits<double>::infinity();
  if (last_out && *last_out + 1 >= n) {
    m.tau_s = std::numeric_limits<double>::infinity();
    m.rmse = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const std::size_t first_in = last_out ? *last_out + 1 : 0;
  m.settled = true;
  m.tau_s = t[first_in];
  double acc = 0.0;
  for (std::size_t k = first_in; k < n; ++k) acc += (x[k] - goal) * (x[k] - goal);
  m.rmse = std::sqrt(acc / static_cast<double>(n - first_in));
  return m;
}

}  // namespace xpl
