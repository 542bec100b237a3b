#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stefan/execute.hpp"

using namespace stefan;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Scenario load(const std::string& file, std::optional<Mode> mode = std::nullopt) {
  const auto r = parse_scenario(slurp(fs::path(STEFAN_SOURCE_DIR) / "scenarios" / file), mode);
  EXPECT_TRUE(r.ok()) << file;
  return *r.scenario;
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("stefan_exec_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Execute, CascadePrintsThePhysicalJump) {
  ExecOptions o;
  o.out_dir = scratch("cascade");
  std::ostringstream log;
  EXPECT_EQ(execute(load("cascade.ini"), o, log), exit_code::ok);
  EXPECT_EQ(log.str(), "0.6\n");
  EXPECT_TRUE(fs::exists(*o.out_dir / "cascade_trace.csv"));
  EXPECT_NE(slurp(*o.out_dir / "summary.json").find("\"schema_version\": 1"), std::string::npos);
}

TEST(Execute, SubcriticalDemoThenCheck) {
  auto scn = load("subcritical_simulate.ini");
  scn.sim.n_particles = 2000;
  ExecOptions o;
  o.out_dir = scratch("simulate");
  std::ostringstream log;
  ASSERT_EQ(execute(scn, o, log), exit_code::ok);
  for (const char* f : {"trajectory.csv", "summary.json", "timing.json", "front.svg", "density.svg",
                        "snapshots/snapshot_0.csv"}) {
    EXPECT_TRUE(fs::exists(*o.out_dir / f)) << f;
  }
  const auto summary = slurp(*o.out_dir / "summary.json");
  EXPECT_NE(summary.find("\"blowup\": false"), std::string::npos);
  EXPECT_NE(summary.find("\"config_hash\""), std::string::npos);

  Scenario check = *parse_scenario("", Mode::check).scenario;
  check.check_input = o.out_dir->string();
  ExecOptions co;
  co.out_dir = scratch("check");
  std::ostringstream clog;
  EXPECT_EQ(execute(check, co, clog), exit_code::ok) << clog.str();
  EXPECT_TRUE(fs::exists(*co.out_dir / "report.json"));
}

TEST(Execute, CheckFailsOnTamperedTrajectory) {
  auto scn = load("subcritical_simulate.ini");
  scn.sim.n_particles = 1000;
  scn.output.svg = false;
  ExecOptions o;
  o.out_dir = scratch("tamper");
  std::ostringstream log;
  ASSERT_EQ(execute(scn, o, log), exit_code::ok);
  auto csv = slurp(*o.out_dir / "trajectory.csv");
  const auto pos = csv.find("\n0.5,");
  ASSERT_NE(pos, std::string::npos);
  const auto comma = csv.find(',', pos + 1);
  csv.insert(comma + 1, "9");
  std::ofstream(*o.out_dir / "trajectory.csv", std::ios::binary) << csv;

  Scenario check = *parse_scenario("", Mode::check).scenario;
  check.check_input = o.out_dir->string();
  ExecOptions co;
  co.out_dir = scratch("tamper_check");
  std::ostringstream clog;
  EXPECT_EQ(execute(check, co, clog), exit_code::check_failure);
}

TEST(Execute, IdenticalSeedsGiveIdenticalFiles) {
  auto scn = load("subcritical_simulate.ini");
  scn.sim.n_particles = 1000;
  ExecOptions a, b;
  a.out_dir = scratch("det_a");
  b.out_dir = scratch("det_b");
  std::ostringstream log;
  ASSERT_EQ(execute(scn, a, log), exit_code::ok);
  ASSERT_EQ(execute(scn, b, log), exit_code::ok);
  for (const char* f : {"trajectory.csv", "summary.json", "noise.csv", "front.svg"}) {
    EXPECT_EQ(slurp(*a.out_dir / f), slurp(*b.out_dir / f)) << f;
  }
  ExecOptions c = a;
  c.out_dir = scratch("det_c");
  c.seed_idio = 77;
  ASSERT_EQ(execute(scn, c, log), exit_code::ok);
  EXPECT_NE(slurp(*a.out_dir / "trajectory.csv"), slurp(*c.out_dir / "trajectory.csv"));
}

TEST(Execute, RuntimeErrorWritesErrorJson) {
  Scenario check = *parse_scenario("", Mode::check).scenario;
  check.check_input = scratch("nothing_here").string();
  ExecOptions o;
  o.out_dir = scratch("error");
  std::ostringstream log;
  EXPECT_EQ(execute(check, o, log), exit_code::runtime_error);
  EXPECT_TRUE(fs::exists(*o.out_dir / "error.json"));
}

TEST(Execute, OutputDirectoryPrecedence) {
  Scenario scn = *parse_scenario("", Mode::check).scenario;
  ExecOptions o;
  ::unsetenv("STEFAN_OUT_DIR");
  EXPECT_EQ(resolve_out_dir(scn, o), fs::path("stefan_out"));
  ::setenv("STEFAN_OUT_DIR", "from_env", 1);
  EXPECT_EQ(resolve_out_dir(scn, o), fs::path("from_env"));
  scn.output.dir = "from_config";
  EXPECT_EQ(resolve_out_dir(scn, o), fs::path("from_config"));
  o.out_dir = "from_flag";
  EXPECT_EQ(resolve_out_dir(scn, o), fs::path("from_flag"));
  ::unsetenv("STEFAN_OUT_DIR");
}

TEST(Execute, ConfigHashTracksContent) {
  auto a = load("subcritical_simulate.ini");
  auto b = a;
  EXPECT_EQ(fnv1a64(config_echo(a)), fnv1a64(config_echo(b)));
  b.sim.seed_common += 1;
  EXPECT_NE(fnv1a64(config_echo(a)), fnv1a64(config_echo(b)));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}
