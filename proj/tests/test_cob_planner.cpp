#include "xplorer/cob_planner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace xpl {
namespace {

CobProblem wall_at_goal(double d, double a, double vmax, double e) {
  CobProblem p;
  p.goal = d;
  p.wall = d;
  p.a_max = a;
  p.v_max = vmax;
  p.restitution = e;
  return p;
}

void expect_feasible(const CobPlan& plan, const CobProblem& p, double end = NAN) {
  double v = p.start_velocity;
  for (const auto& s : plan.segments) {
    ASSERT_GE(s.duration, 0.0);
    ASSERT_LE(std::abs(s.accel), p.a_max + 1e-12);
    v += s.accel * s.duration;
    ASSERT_LE(std::abs(v), p.v_max + 1e-9);
    if (s.jump_after) v = -p.restitution * v;
  }
  EXPECT_NEAR(plan.terminal_position, std::isnan(end) ? p.goal : end, 1e-9);
  EXPECT_NEAR(plan.terminal_velocity, 0.0, 1e-9);
}

TEST(BangBang, TriangularProfile) {
  const BangBang bb = bang_bang_time(1.0, 2.0, 2.0);
  EXPECT_NEAR(bb.time, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(bb.t_cruise, 0.0);
  EXPECT_NEAR(bb.peak_speed, std::sqrt(2.0), 1e-15);
}

TEST(BangBang, TrapezoidProfile) {
  const BangBang bb = bang_bang_time(4.0, 1.0, 1.0);
  EXPECT_NEAR(bb.time, 5.0, 1e-15);
  EXPECT_NEAR(bb.t_cruise, 3.0, 1e-15);
  EXPECT_EQ(bb.peak_speed, 1.0);
}

TEST(BangBang, VanishingDistance) {
  EXPECT_EQ(bang_bang_time(0.0, 2.0, 2.0).time, 0.0);
  EXPECT_LT(bang_bang_time(1e-12, 2.0, 2.0).time, 1e-5);
  EXPECT_THROW(bang_bang_time(-1.0, 2.0, 2.0), std::invalid_argument);
  EXPECT_THROW(bang_bang_time(1.0, 0.0, 2.0), std::invalid_argument);
}

TEST(BangBang, MatchesBruteForceGrid) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ud(0.05, 3.0);
  std::uniform_real_distribution<double> ua(0.5, 3.0);
  std::uniform_real_distribution<double> uv(0.3, 2.5);
  for (int k = 0; k < 100; ++k) {
    const double d = ud(rng);
    const double a = ua(rng);
    const double v = uv(rng);
    const double exact = bang_bang_time(d, a, v).time;
    const double grid = brute_force_time(d, a, v, 1e-4);
    ASSERT_GE(grid, exact - 1e-9);
    ASSERT_NEAR(grid, exact, 1e-3) << d << " " << a << " " << v;
  }
}

TEST(NoCollision, RestToRestFeasible) {
  CobProblem p;
  p.goal = 1.5;
  const CobPlan plan = no_collision_plan(p);
  EXPECT_EQ(plan.kind, PlanKind::NoCollision);
  EXPECT_NEAR(plan.total_time, bang_bang_time(1.5, 2.0, 2.0).time, 1e-12);
  expect_feasible(plan, p);
}

TEST(NoCollision, MovingStartAndReverseDirection) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    CobProblem p;
    p.start_position = u(rng);
    p.goal = u(rng);
    p.start_velocity = 0.9 * u(rng);
    const CobPlan plan = no_collision_plan(p);
    expect_feasible(plan, p);
  }
}

TEST(Collide, PlasticStopsAtWall) {
  const CobProblem p = wall_at_goal(1.0, 2.0, 10.0, 0.0);
  const CobPlan plan = collide_plan(p);
  EXPECT_EQ(plan.kind, PlanKind::CollideToStop);
  EXPECT_NEAR(plan.total_time, 1.0, 1e-12);
  EXPECT_NEAR(plan.impact_velocity, 2.0, 1e-12);
  expect_feasible(plan, p);
}

TEST(Collide, ReboundFromFourMetresPerSecond) {
  const CobProblem p = wall_at_goal(4.0, 2.0, 4.0, 0.09);
  const CobPlan plan = collide_plan(p);
  EXPECT_NEAR(plan.impact_velocity, 4.0, 1e-12);
  const auto samples = sample_plan(plan, p, 0.01);
  bool saw_jump = false;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k].t == samples[k - 1].t && samples[k].v != samples[k - 1].v) {
      EXPECT_NEAR(samples[k - 1].v, 4.0, 1e-12);
      EXPECT_NEAR(samples[k].v, -0.36, 1e-12);
      saw_jump = true;
    }
  }
  EXPECT_TRUE(saw_jump);
  // The rebound is braked to rest, leaving the vehicle short of the wall by v+^2 / 2a.
  expect_feasible(plan, p, 4.0 - 0.36 * 0.36 / (2.0 * 2.0));
}

TEST(Collide, ClosedFormTimeAtWall) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ud(0.1, 2.0);
  std::uniform_real_distribution<double> ua(0.5, 3.0);
  std::uniform_real_distribution<double> ue(0.0, 0.9);
  for (int k = 0; k < 100; ++k) {
    const double d = ud(rng);
    const double a = ua(rng);
    const double e = ue(rng);
    const CobProblem p = wall_at_goal(d, a, 100.0, e);
    const double hit = std::sqrt(2.0 * d / a);
    ASSERT_NEAR(collide_plan(p).total_time, hit * (1.0 + e), 1e-12);
    ASSERT_NEAR(collide_plan(p).total_time / no_collision_plan(p).total_time, (1.0 + e) / std::sqrt(2.0),
                1e-12);
  }
}

TEST(Collide, JumpLawUsesCustomMap) {
  const CobProblem p = wall_at_goal(1.0, 2.0, 10.0, 0.09);
  const CobPlan plan = collide_plan(p, [](double v) { return -0.5 * v; });
  EXPECT_NEAR(plan.total_time, 1.0 + 0.5, 1e-12);
  EXPECT_NEAR(plan.terminal_velocity, 0.0, 1e-12);
}

TEST(Collide, SlowerWithMoreRestitution) {
  double prev = 0.0;
  for (double e = 0.0; e < 0.95; e += 0.05) {
    const double t = collide_plan(wall_at_goal(1.0, 2.0, 2.0, e)).total_time;
    ASSERT_GT(t, prev);
    prev = t;
  }
}

TEST(Collide, DecelerateToGoalShortOfWall) {
  CobProblem p;
  p.goal = 0.8;
  p.wall = 1.0;
  const CobPlan plan = collide_plan(p);
  EXPECT_EQ(plan.kind, PlanKind::CollideToDecelerate);
  expect_feasible(plan, p);
  EXPECT_GT(plan.impact_velocity, 0.0);
}

TEST(Choose, PicksFasterPlan) {
  const CobProblem fast = wall_at_goal(1.0, 2.0, 2.0, 0.09);
  EXPECT_EQ(choose_plan(fast).kind, PlanKind::CollideToStop);
  const CobProblem bouncy = wall_at_goal(1.0, 2.0, 2.0, 0.5);
  EXPECT_EQ(choose_plan(bouncy).kind, PlanKind::NoCollision);
  CobProblem open;
  open.goal = 1.0;
  EXPECT_EQ(choose_plan(open).kind, PlanKind::NoCollision);
  EXPECT_THROW(collide_plan(open), std::invalid_argument);
}

TEST(Choose, CollisionDominatesAtLowRestitution) {
  const CobProblem p = wall_at_goal(1.0, 2.0, 10.0, 0.0);
  const double gain = 1.0 - collide_plan(p).total_time / no_collision_plan(p).total_time;
  EXPECT_NEAR(gain, 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Problem, Validation) {
  CobProblem p;
  p.wall = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.wall = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.restitution = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.start_velocity = 3.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Metrics, FirstOrderResponse) {
  std::vector<double> t;
  std::vector<double> x;
  const double dt = 1e-3;
  for (int k = 0; k <= 10000; ++k) {
    t.push_back(k * dt);
    x.push_back(2.0 + 3.0 * (1.0 - std::exp(-t.back())));
  }
  const ManeuverMetrics m = measure_metrics(t, x, 2.0, 5.0);
  EXPECT_TRUE(m.rose);
  EXPECT_TRUE(m.settled);
  EXPECT_NEAR(m.tau_r, std::log(10.0), dt);
  EXPECT_NEAR(m.tau_s, std::log(20.0), dt);
}

TEST(Metrics, OvershootExample) {
  const ManeuverMetrics m = measure_metrics({0, 1, 2, 3, 4}, {0, 0.5, 1.2, 0.97, 1.0}, 0.0, 1.0);
  EXPECT_EQ(m.tau_r, 2.0);
  EXPECT_EQ(m.tau_s, 3.0);
  EXPECT_NEAR(m.rmse, std::sqrt(0.03 * 0.03 / 2.0), 1e-15);
}

TEST(Metrics, NeverSettles) {
  const ManeuverMetrics m = measure_metrics({0, 1, 2}, {0, 0.5, 0.8}, 0.0, 1.0);
  EXPECT_FALSE(m.rose);
  EXPECT_FALSE(m.settled);
  EXPECT_TRUE(std::isinf(m.tau_s));
  EXPECT_THROW(measure_metrics({0, 1}, {0}, 0.0, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace xpl
