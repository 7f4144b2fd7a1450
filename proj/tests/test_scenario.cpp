#include "xplorer/scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace xpl {
namespace {

const std::filesystem::path kDir{XPLORER_SCENARIO_DIR};

TEST(Defaults, TableValues) {
  const Scenario s;
  EXPECT_EQ(s.body.mass, 1.12);
  EXPECT_EQ(s.arm.stiffness, 1.307);
  EXPECT_EQ(s.env.restitution, 0.09);
  EXPECT_EQ(s.explorer.psi_dot_0, 0.4);
  EXPECT_EQ(s.explorer.delta_psi_0, 1.6);
  EXPECT_EQ(s.explorer.d_step, 0.25);
  EXPECT_EQ(s.map.delta_map, 1.51);
  EXPECT_EQ(s.rates.physics, 500.0);
  EXPECT_EQ(s.rates.control, 100.0);
  EXPECT_EQ(s.rates.estimator, 50.0);
  EXPECT_EQ(s.control_decimation(), 5);
  EXPECT_EQ(s.estimator_decimation(), 10);
  EXPECT_NO_THROW(s.validate());
}

TEST(Parse, KeysAndComments) {
  const Scenario s = parse_scenario("# note\nname = t1\nseed = 7  # trailing\n\nduration = 2.5\n"
                                    "mission = EXPLORE_MAP\nenv.preset = BOX_1220x1000\n");
  EXPECT_EQ(s.name, "t1");
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.duration, 2.5);
  EXPECT_EQ(s.mission, MissionKind::Explore);
  EXPECT_EQ(s.preset, EnvPreset::Box);
}

TEST(Parse, Rejections) {
  EXPECT_THROW(parse_scenario("bogus = 1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("duration\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("duration = fast\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("duration = -1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("explorer.delta_psi_0 = 1.4\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("rates.control = 300\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("mission = COB\n"), ScenarioError);
  EXPECT_THROW(load_scenario(kDir / "missing.cfg"), ScenarioError);
}

TEST(Parse, ErrorNamesLine) {
  try {
    parse_scenario("name = a\nbogus = 1\n", "x.cfg");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos);
  }
}

TEST(Presets, BoxDimensions) {
  const Polygon box = preset_box();
  double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
  for (const auto& v : box.vertices) {
    lo_x = std::min(lo_x, v.x());
    hi_x = std::max(hi_x, v.x());
    lo_y = std::min(lo_y, v.y());
    hi_y = std::max(hi_y, v.y());
  }
  EXPECT_NEAR(hi_x - lo_x, 1.22, 1e-12);
  EXPECT_NEAR(hi_y - lo_y, 1.0, 1e-12);
}

TEST(Presets, CorridorIsValid) {
  Environment env;
  env.obstacles = preset_corridor();
  EXPECT_FALSE(env.obstacles.empty());
  EXPECT_NO_THROW(env.validate());
}

TEST(Dump, RoundTripIsStable) {
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".cfg") continue;
    const Scenario a = load_scenario(entry.path());
    const std::string text = dump_scenario(a);
    const Scenario b = parse_scenario(text, entry.path().string());
    EXPECT_EQ(dump_scenario(b), text) << entry.path();
  }
}

TEST(Dump, OnlyKnownKeys) {
  const auto keys = scenario_keys();
  std::istringstream in(dump_scenario(Scenario{}));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find(" = "));
    EXPECT_NE(std::find(keys.begin(), keys.end(), key), keys.end()) << key;
    ++n;
  }
  EXPECT_GE(n, static_cast<int>(keys.size()) - 2);
}

TEST(Override, AppliesAndRejects) {
  Scenario s;
  apply_override(s, "duration", "3");
  EXPECT_EQ(s.duration, 3.0);
  apply_override(s, "init.position", "1,2,-0.7");
  EXPECT_EQ(s.init.position, Vec3(1.0, 2.0, -0.7));
  EXPECT_THROW(apply_override(s, "nope", "1"), ScenarioError);
  EXPECT_THROW(apply_override(s, "init.position", "1,2"), ScenarioError);
}

TEST(Shipped, AllScenariosLoad) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 9);
}

}  // namespace
}  // namespace xpl
