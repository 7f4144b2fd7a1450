#include "xplorer/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace xpl {
namespace {

const std::filesystem::path kDir{XPLORER_SCENARIO_DIR};

std::string csv(const Trace& t) {
  std::ostringstream o;
  write_trace_csv(t, o);
  return o.str();
}

double tilt(const Trace& tr, std::size_t row) {
  return std::acos(std::clamp(tr.at(row, "r22"), -1.0, 1.0));
}

void expect_trace_invariants(const RunResult& r) {
  const Trace& tr = r.trace;
  const Scenario& s = r.scenario;
  ASSERT_GT(tr.rows.size(), 2u);
  for (std::size_t k = 0; k < tr.rows.size(); ++k) {
    for (double v : tr.rows[k]) ASSERT_TRUE(std::isfinite(v)) << "row " << k;
    if (k > 0) ASSERT_GT(tr.at(k, "t"), tr.at(k - 1, "t"));
    ASSERT_GE(tr.at(k, "thrust"), 0.0);
    ASSERT_LE(tr.at(k, "thrust"), s.control.thrust_max + 1e-9);
    ASSERT_LE(tilt(tr, k), s.control.tilt_max + 0.05) << "t " << tr.at(k, "t");
  }
}

TEST(Run, DeterministicTrace) {
  Scenario s = load_scenario(kDir / "hover.cfg");
  s.duration = 2.0;
  const RunResult a = run(s);
  const RunResult b = run(s);
  EXPECT_EQ(csv(a.trace), csv(b.trace));
  s.seed += 1;
  EXPECT_NE(csv(run(s).trace), csv(a.trace));
}

TEST(Run, TraceCsvRoundTrip) {
  Scenario s = load_scenario(kDir / "hover.cfg");
  s.duration = 1.0;
  const RunResult r = run(s);
  std::istringstream in(csv(r.trace));
  const Trace back = read_trace_csv(in);
  EXPECT_EQ(back.columns, r.trace.columns);
  EXPECT_EQ(csv(back), csv(r.trace));
}

TEST(Run, RateContract) {
  Scenario s = load_scenario(kDir / "hover.cfg");
  s.duration = 2.0;
  const RunResult r = run(s);
  EXPECT_EQ(r.physics_steps, 1000);
  const auto t = r.trace.column("t");
  const auto tick = r.trace.column("est_tick");
  ASSERT_EQ(t.size(), 100u);
  for (std::size_t k = 1; k < t.size(); ++k) {
    ASSERT_NEAR(t[k] - t[k - 1], 0.02, 1e-9);
    ASSERT_EQ(tick[k], 1.0);
  }
}

TEST(Run, ReplayReproducesEstimates) {
  for (const char* name : {"hover.cfg", "impact.cfg", "wall_push.cfg"}) {
    Scenario s = load_scenario(kDir / name);
    s.duration = std::min(s.duration, 4.0);
    const RunResult r = run(s);
    const ReplayResult rep = replay_estimate(r.trace, s);
    EXPECT_EQ(rep.samples, static_cast<long>(r.trace.rows.size())) << name;
    EXPECT_EQ(rep.mismatches, 0) << name << ": " << rep.first_mismatch;
  }
}

TEST(Run, LongHoverStaysLevel) {
  Scenario s = load_scenario(kDir / "hover.cfg");
  s.duration = 60.0;
  const RunResult r = run(s);
  expect_trace_invariants(r);
  double worst = 0.0;
  double drift = 0.0;
  for (std::size_t k = 0; k < r.trace.rows.size(); ++k) {
    worst = std::max(worst, tilt(r.trace, k));
    drift = std::max(drift, std::abs(r.trace.at(k, "z") - s.init.position.z()));
  }
  EXPECT_LT(worst, 5.0 * kPi / 180.0);
  EXPECT_LT(drift, 0.05);
}

TEST(Run, ExplorationKeepsAltitudeSetpoint) {
  Scenario s = load_scenario(kDir / "box_explore.cfg");
  s.duration = 20.0;
  const RunResult r = run(s);
  expect_trace_invariants(r);
  for (std::size_t k = 0; k < r.trace.rows.size(); ++k) {
    ASSERT_EQ(r.trace.at(k, "rd_z"), s.explorer.hover_z);
    const double g = r.trace.at(k, "gamma");
    ASSERT_TRUE(g == 1.0 || g == 2.0 || g == 3.0);
  }
  ASSERT_TRUE(r.cloud.has_value());
  EXPECT_EQ(r.cloud->points.size(), 8 * r.cloud->blocks.size());
}

TEST(Run, WallPushInvariants) {
  const RunResult r = run(load_scenario(kDir / "wall_push.cfg"));
  expect_trace_invariants(r);
  const Report rep = make_report(r.trace, r.scenario);
  EXPECT_GT(rep.steady_contact_force, 0.5);
  EXPECT_GT(rep.est_samples, 0);
}

TEST(Report, DwellSumsToSimTime) {
  Scenario s = load_scenario(kDir / "box_explore.cfg");
  s.duration = 15.0;
  const RunResult r = run(s);
  const Report rep = make_report(r.trace, r.scenario, r.cloud ? &*r.cloud : nullptr);
  EXPECT_NEAR(rep.dwell[1] + rep.dwell[2] + rep.dwell[3], rep.sim_time, 0.05);
  EXPECT_FALSE(report_text(rep).empty());
  EXPECT_NE(report_csv(rep).find('\n'), std::string::npos);
}

TEST(Artifacts, WrittenAndReadable) {
  Scenario s = load_scenario(kDir / "box_explore.cfg");
  s.duration = 12.0;
  const RunResult r = run(s);
  const auto dir = std::filesystem::temp_directory_path() / "xplorer_artifacts_test";
  std::filesystem::remove_all(dir);
  const Artifacts a = write_artifacts(r, dir);
  EXPECT_TRUE(std::filesystem::exists(a.trace));
  EXPECT_TRUE(std::filesystem::exists(a.report_txt));
  EXPECT_TRUE(std::filesystem::exists(a.report_csv));
  ASSERT_TRUE(a.ply.has_value());
  EXPECT_EQ(read_ply_file(*a.ply).size(), r.cloud->points.size());
  EXPECT_EQ(csv(read_trace_csv_file(a.trace)), csv(r.trace));
  std::ifstream meta(a.meta);
  std::stringstream ss;
  ss << meta.rdbuf();
  EXPECT_NO_THROW(parse_scenario(ss.str(), a.meta.string()));
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    EXPECT_NE(e.path().extension(), ".partial");
  }
  std::filesystem::remove_all(dir);
}

TEST(Artifacts, OutputDirPrecedence) {
  EXPECT_EQ(output_dir(std::string("given")), std::filesystem::path("given"));
  ::setenv("XPLORER_OUT_DIR", "from_env", 1);
  EXPECT_EQ(output_dir(std::nullopt), std::filesystem::path("from_env"));
  ::unsetenv("XPLORER_OUT_DIR");
  EXPECT_EQ(output_dir(std::nullopt), std::filesystem::path("out"));
}

}  // namespace
}  // namespace xpl
