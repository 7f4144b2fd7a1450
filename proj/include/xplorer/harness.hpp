#pragma once

#include "xplorer/cob_planner.hpp"
#include "xplorer/mapper.hpp"
#include "xplorer/scenario.hpp"
#include "xplorer/trace.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xpl {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  Scenario scenario;
  Trace trace;
  std::optional<MapCloud> cloud;
  std::optional<CobPlan> plan;
  bool loop_closed = false;
  double loop_closed_time = -1.0;
  long physics_steps = 0;
  double wall_seconds = 0.0;
};

// Runs one scenario to completion; throws RunError on a non-finite state.
RunResult run(const Scenario& s);

struct Report {
  std::string name;
  MissionKind mission = MissionKind::Hover;
  double sim_time = 0.0;
  std::array<double, 4> dwell{};  // seconds in gamma 1..3, index 0 unused
  bool loop_closed = false;
  double loop_closed_time = -1.0;
  long est_samples = 0;
  double est_rmse_xy = 0.0;          // fused vs true external force, xy, N
  double steady_contact_force = 0.0;  // mean true xy external force over the final quarter
  double steady_fused_force = 0.0;    // mean fused xy force over the final quarter
  long blocks = 0;
  std::optional<MapMetrics> map;
  std::optional<ManeuverMetrics> cob;
};

Report make_report(const Trace& trace, const Scenario& s, const MapCloud* cloud = nullptr);
std::string report_text(const Report& r);
std::string report_csv(const Report& r);

// Scenario dump plus derived constants; parses back as a scenario.
std::string trace_meta(const Scenario& s);

struct Artifacts {
  std::filesystem::path trace;
  std::filesystem::path meta;
  std::optional<std::filesystem::path> ply;
  std::filesystem::path report_txt;
  std::filesystem::path report_csv;
};

Artifacts write_artifacts(const RunResult& r, const std::filesystem::path& dir);

// Flag value, else XPLORER_OUT_DIR, else ./out.
std::filesystem::path output_dir(const std::optional<std::string>& flag);

struct ReplayResult {
  long samples = 0;
  long mismatches = 0;
  std::string first_mismatch;
};

// Feeds the logged sensor packets to a fresh estimator and compares the
// printed estimates cell by cell.
ReplayResult replay_estimate(const Trace& trace, const Scenario& s);

}  // namespace xpl
