#include "xplorer/harness.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace xpl;

std::filesystem::path sibling(const std::filesystem::path& trace, const std::string& suffix) {
  std::string s = trace.string();
  const std::string tail = ".trace.csv";
  if (s.size() > tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0) {
    s.resize(s.size() - tail.size());
  }
  return s + suffix;
}

Scenario scenario_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  Scenario s = load_scenario(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ScenarioError("--set expects key=value, got '" + kv + "'");
    apply_override(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  s.validate();
  return s;
}

int simulate(const std::vector<std::string>& files, const std::vector<std::string>& sets,
             const std::optional<std::string>& out_flag, int jobs) {
  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(scenario_with_overrides(f, sets));
  const auto dir = output_dir(out_flag);
  std::vector<std::string> lines(scenarios.size());
  std::vector<int> codes(scenarios.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        const RunResult r = run(scenarios[i]);
        const Artifacts a = write_artifacts(r, dir);
        std::ostringstream o;
        o << scenarios[i].name << ": " << r.trace.rows.size() << " rows in "
          << format_sig(r.wall_seconds) << " s -> " << a.trace.string();
        if (a.ply) o << ", " << a.ply->string();
        if (r.loop_closed) o << ", loop closed at " << format_sig(r.loop_closed_time) << " s";
        lines[i] = o.str();
      } catch (const std::exception& e) {
        lines[i] = scenarios[i].name + ": error: " + e.what();
        codes[i] = 1;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::jthread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();
  int code = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    (codes[i] ? std::cerr : std::cout) << lines[i] << "\n";
    code = std::max(code, codes[i]);
  }
  return code;
}

int replay(const std::string& trace_path, const std::optional<std::string>& meta) {
  const Trace trace = read_trace_csv_file(trace_path);
  const Scenario s = load_scenario(meta ? std::filesystem::path(*meta) : sibling(trace_path, ".trace.meta"));
  const ReplayResult r = replay_estimate(trace, s);
  std::cout << "replayed " << r.samples << " estimator samples, " << r.mismatches << " mismatches\n";
  if (r.mismatches) std::cout << "first: " << r.first_mismatch << "\n";
  return r.mismatches == 0 && r.samples > 0 ? 0 : 1;
}

int report(const std::string& trace_path, const std::optional<std::string>& meta,
           const std::optional<std::string>& ply) {
  const Trace trace = read_trace_csv_file(trace_path);
  const Scenario s = load_scenario(meta ? std::filesystem::path(*meta) : sibling(trace_path, ".trace.meta"));
  std::optional<MapCloud> cloud;
  const std::filesystem::path ply_path = ply ? std::filesystem::path(*ply) : sibling(trace_path, ".ply");
  if (std::filesystem::exists(ply_path)) {
    cloud.emplace();
    cloud->points = read_ply_file(ply_path);
  }
  std::cout << report_text(make_report(trace, s, cloud ? &*cloud : nullptr));
  return 0;
}

int plan_cob(const std::string& path, const std::vector<std::string>& sets) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open problem " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  while (std::getline(f, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::runtime_error(path + ": expected key = value");
      }
      continue;
    }
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  CobProblem p;
  double dt = 1e-3;
  for (auto [k, v] : kv) {
    k.erase(0, k.find_first_not_of(" \t"));
    k.erase(k.find_last_not_of(" \t") + 1);
    const double x = parse_double(v);
    if (k == "start") p.start_position = x;
    else if (k == "start_velocity") p.start_velocity = x;
    else if (k == "goal") p.goal = x;
    else if (k == "wall") p.wall = x;
    else if (k == "a_max") p.a_max = x;
    else if (k == "v_max") p.v_max = x;
    else if (k == "e") p.restitution = x;
    else if (k == "dt") dt = x;
    else throw std::runtime_error("unknown problem key '" + k + "'");
  }
  p.validate();
  const double d = p.goal - p.start_position;
  if (p.start_velocity == 0.0 && d > 0.0) {
    const BangBang bb = bang_bang_time(d, p.a_max, p.v_max);
    std::cout << "bang-bang t* " << format_sig(bb.time) << " s (accel " << format_sig(bb.t_accel)
              << ", cruise " << format_sig(bb.t_cruise) << ", decel " << format_sig(bb.t_decel)
              << "), grid search " << format_sig(brute_force_time(d, p.a_max, p.v_max, dt)) << " s\n";
  }
  auto show = [](const CobPlan& plan) {
    std::cout << to_string(plan.kind) << ": T " << format_sig(plan.total_time) << " s, terminal x "
              << format_sig(plan.terminal_position) << ", impact v " << format_sig(plan.impact_velocity)
              << "\n";
    for (const auto& s : plan.segments) {
      std::cout << "  a " << format_sig(s.accel) << " for " << format_sig(s.duration) << " s"
                << (s.jump_after ? " then jump" : "") << "\n";
    }
  };
  show(no_collision_plan(p));
  if (p.wall) show(collide_plan(p));
  std::cout << "chosen " << to_string(choose_plan(p).kind) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile exploration and collide-to-brake simulator"};
  app.require_subcommand(1);

  std::vector<std::string> files, sets;
  std::optional<std::string> out_dir;
  int jobs = 1;
  auto* sim = app.add_subcommand("simulate", "Run scenario files and write trace, map and report");
  sim->add_option("scenarios", files, "Scenario files")->required()->check(CLI::ExistingFile);
  sim->add_option("--set", sets, "Override a scenario key (key=value), repeatable");
  sim->add_option("--out", out_dir, "Output directory (default $XPLORER_OUT_DIR or ./out)");
  sim->add_option("--jobs,-j", jobs, "Parallel scenario runs")->check(CLI::PositiveNumber);

  std::string trace_path;
  std::optional<std::string> meta, ply;
  auto* rep = app.add_subcommand("replay-estimate", "Re-run the estimator on a trace's sensor packets");
  rep->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--meta", meta, "Scenario used for the run (default: <trace>.trace.meta)");

  auto* rpt = app.add_subcommand("report", "Summarize a trace");
  rpt->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  rpt->add_option("--meta", meta, "Scenario used for the run (default: <trace>.trace.meta)");
  rpt->add_option("--ply", ply, "Map point cloud (default: <trace>.ply if present)");

  std::string problem;
  auto* cob = app.add_subcommand("plan-cob", "Plan a one-dimensional collide-to-brake maneuver");
  cob->add_option("problem", problem, "Problem file (start, goal, wall, a_max, v_max, e, dt)")
      ->required()
      ->check(CLI::ExistingFile);
  cob->add_option("--set", sets, "Override a problem key (key=value), repeatable");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(files, sets, out_dir, jobs);
    if (*rep) return replay(trace_path, meta);
    if (*rpt) return report(trace_path, meta, ply);
    if (*cob) return plan_cob(problem, sets);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
