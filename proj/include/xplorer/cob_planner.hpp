#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace xpl {

enum class PlanKind { NoCollision, CollideToStop, CollideToDecelerate };

std::string to_string(PlanKind kind);

// Post-impact velocity as a function of pre-impact velocity (signed, 1-D).
using PostImpactMap = std::function<double(double)>;

struct CobProblem {
  double start_position = 0.0;
  double start_velocity = 0.0;
  double goal = 1.0;
  std::optional<double> wall;
  double a_max = 2.0;
  double v_max = 2.0;
  double restitution = 0.09;

  void validate() const;
};

struct Segment {
  double accel = 0.0;
  double duration = 0.0;
  bool jump_after = false;  // restitution jump at the end of this segment
};

struct CobPlan {
  PlanKind kind = PlanKind::NoCollision;
  std::vector<Segment> segments;
  double total_time = 0.0;
  double terminal_position = 0.0;
  double terminal_velocity = 0.0;
  double impact_velocity = 0.0;  // pre-jump, 0 without a jump
};

struct BangBang {
  double time = 0.0;
  double t_accel = 0.0;
  double t_cruise = 0.0;
  double t_decel = 0.0;
  double peak_speed = 0.0;
};

// Rest-to-rest minimum time over distance d.
BangBang bang_bang_time(double d, double a_max, double v_max);

// Grid search over accelerate / coast / brake switch times with quantum dt.
double brute_force_time(double d, double a_max, double v_max, double dt);

CobPlan no_collision_plan(const CobProblem& p);
CobPlan collide_plan(const CobProblem& p, const PostImpactMap& post = {});
CobPlan choose_plan(const CobProblem& p, const PostImpactMap& post = {});

struct PhaseSample {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
};

std::vector<PhaseSample> sample_plan(const CobPlan& plan, const CobProblem& p, double dt);

struct ManeuverMetrics {
  double tau_r = 0.0;
  double tau_s = 0.0;
  double rmse = 0.0;
  bool rose = false;
  bool settled = false;
};

inline constexpr double kRiseFraction = 0.9;
inline constexpr double kSettleBand = 0.05;

ManeuverMetrics measure_metrics(const std::vector<double>& t, const std::vector<double>& x,
                                double start, double goal);

}  // namespace xpl
