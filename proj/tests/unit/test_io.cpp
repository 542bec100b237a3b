#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "stefan/diagnostics.hpp"
#include "stefan/trajectory_io.hpp"

using namespace stefan;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("stefan_io_" + name);
  fs::remove_all(d);
  return d;
}

Trajectory sample() {
  const PhysicalParams p{0.5, 1.0, 0.5, 0.0};
  SimConfig cfg;
  cfg.n_particles = 3000;
  cfg.dt = 1e-3;
  cfg.t_end = 0.3;
  cfg.record_moments = true;
  cfg.snapshot_times = {0.1, 0.3};
  return run(SupercoolingProfile(0.0, {{0.3, 1.0}, {1.0, 0.5}}), p, cfg);
}

}  // namespace

TEST(Io, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0,
                   std::numeric_limits<double>::denorm_min()}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.0x"), std::invalid_argument);
  EXPECT_THROW(parse_double(""), std::invalid_argument);
}

TEST(Io, TrajectoryRoundTripKeepsDiagnostics) {
  const auto t = sample();
  const auto dir = scratch_dir("traj");
  save_trajectory(dir, t);
  const auto back = load_trajectory(dir);
  EXPECT_EQ(back.front, t.front);
  EXPECT_EQ(back.alive, t.alive);
  EXPECT_EQ(back.dW, t.dW);
  EXPECT_EQ(back.jumps.size(), t.jumps.size());
  for (std::size_t i = 0; i < t.jumps.size(); ++i) {
    EXPECT_EQ(back.jumps[i].prejump, t.jumps[i].prejump);
  }
  ASSERT_EQ(back.snapshots.size(), t.snapshots.size());
  EXPECT_EQ(back.snapshots[1].density, t.snapshots[1].density);
  EXPECT_EQ(back.front_step, t.front_step);
  const auto a = run_diagnostics(t);
  const auto b = run_diagnostics(back);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].value, b.checks[i].value) << a.checks[i].name;
  }
  EXPECT_TRUE(b.passed());
}

TEST(Io, CsvFormat) {
  const auto t = sample();
  std::ostringstream os;
  write_trajectory_csv(os, t);
  const std::string s = os.str();
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(s.substr(0, s.find('\n')).find("t,"), 0u);
}

TEST(Io, StateRoundTrip) {
  const auto dir = scratch_dir("state");
  auto s = ParticleState::from_positions({0.1, 0.2, 0.3}, 0.0, 0.5, 0.25);
  s.alive[1] = 0;
  s.reindex();
  s.front = 0.25;
  s.step_index = 7;
  s.time = 0.007;
  save_state(dir, s);
  const auto back = load_state(dir);
  EXPECT_EQ(back.positions, s.positions);
  EXPECT_EQ(back.alive_ids, s.alive_ids);
  EXPECT_EQ(back.front, s.front);
  EXPECT_EQ(back.step_index, 7u);
}

TEST(Io, MissingDirectoryThrows) {
  EXPECT_THROW(load_trajectory(scratch_dir("missing")), std::runtime_error);
}
