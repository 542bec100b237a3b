#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stefan/particle.hpp"
#include "stefan/rng.hpp"

using namespace stefan;

namespace {

SimConfig small_config(std::size_t n = 2000, double t_end = 0.2) {
  SimConfig cfg;
  cfg.n_particles = n;
  cfg.dt = 1e-3;
  cfg.t_end = t_end;
  cfg.seed_common = 21;
  cfg.seed_idio = 22;
  return cfg;
}

const PhysicalParams kNoisy{0.5, 1.0, 0.5, 0.0};

}  // namespace

TEST(Particle, InitialCascadeMatchesClosedForm) {
  const PhysicalParams p{0.5, 1.0, 0.0, 0.0};
  const double lk = p.lambda_kappa();
  SimConfig cfg = small_config(100'000);
  for (auto [width, value, jump] : {std::tuple{0.3, 2.0, 0.6}, std::tuple{0.2, 1.5, 0.3},
                                    std::tuple{1.0, 0.5, 0.0}}) {
    const auto u = SupercoolingProfile::constant(0.0, width, value * lk);
    const auto s = init(u, p, cfg);
    EXPECT_NEAR(s.front - p.s0, jump, 2.0 * s.front_step);
    EXPECT_DOUBLE_EQ(s.front_step, u.total_mass() / (lk * 100'000));
  }
}

TEST(Particle, InitStartsAtStratifiedQuantiles) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto s = init(u, kNoisy, small_config(4));
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s.positions[0], 0.125);
  EXPECT_DOUBLE_EQ(s.positions[3], 0.875);
  EXPECT_EQ(s.alive_count(), 4u);
  EXPECT_DOUBLE_EQ(s.mass_per_particle, 0.0625);
}

TEST(Particle, StepWithExplicitDraws) {
  // sigma = 1, rho = 0; front_step 0.1; one particle pushed below the front
  // drags a neighbour within one front step along.
  auto s = ParticleState::from_positions({0.05, 0.08, 0.5}, 0.0, 0.05, 0.1);
  const ReducedParams rp{0.0, 1.0, 0.3};
  const double dt = 0.01;
  const std::vector<double> z{-1.0, 0.0, 0.0};
  const auto out = step(s, 0.0, z, rp, dt);
  EXPECT_EQ(out.absorbed, 2u);
  EXPECT_DOUBLE_EQ(out.jump, 0.2);
  EXPECT_DOUBLE_EQ(s.front, 0.2);
  EXPECT_EQ(s.alive_count(), 1u);
  EXPECT_DOUBLE_EQ(s.loss(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.absorbed_mass(), 0.1);
  EXPECT_THROW(step(s, 0.0, std::vector<double>{0.0}, rp, dt), std::invalid_argument);
}

TEST(Particle, FromPositionsRejectsParticlesAtTheFront) {
  EXPECT_THROW(ParticleState::from_positions({0.0, 1.0}, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Particle, HittingProbabilityMatchesReflectionPrinciple) {
  // alpha = 0, start at 1, sigma = 1: P(hit 0 by t = 1) = 2 Phi(-1).
  const std::size_t n = 20'000;
  auto s = ParticleState::from_positions(std::vector<double>(n, 1.0), 0.0, 0.0, 0.0);
  const ReducedParams rp{0.0, 1.0, 0.0};
  const double dt = 1e-3;
  std::vector<double> z(n), u(n);
  for (std::size_t k = 0; k < 1000; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = rng::normal(5, rng::Stream::idiosyncratic, k, i);
      u[i] = rng::uniform(5, rng::Stream::bridge, k, i);
    }
    step(s, 0.0, z, rp, dt, u);
  }
  const double exact = std::erfc(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(exact, 0.31731, 1e-5);
  const double se = std::sqrt(exact * (1.0 - exact) / n);
  EXPECT_NEAR(s.loss(), exact, 3.0 * se);
}

TEST(Particle, RunIsDeterministic) {
  const auto u = SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  auto cfg = small_config();
  const auto a = run(u, kNoisy, cfg);
  const auto b = run(u, kNoisy, cfg);
  EXPECT_EQ(a.front, b.front);
  EXPECT_EQ(a.alive, b.alive);
  EXPECT_EQ(a.dW, b.dW);
  cfg.seed_idio += 1;
  EXPECT_NE(run(u, kNoisy, cfg).front, a.front);
}

TEST(Particle, RestartIsBitExact) {
  const auto u = SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  const auto cfg = small_config();
  const auto full = run(u, kNoisy, cfg);

  Simulation first(u, kNoisy, cfg);
  first.run_until(cfg.grid().n_steps / 2);
  auto resumed = Simulation::restart(first.state(), u, kNoisy, cfg);
  resumed.run();
  const auto& tail = resumed.trajectory();
  ASSERT_EQ(tail.first_row, cfg.grid().n_steps / 2);
  for (std::size_t r = 0; r < tail.rows(); ++r) {
    const std::size_t row = tail.first_row + r;
    ASSERT_EQ(tail.front[r], full.front[row]) << "row " << row;
    ASSERT_EQ(tail.alive[r], full.alive[row]) << "row " << row;
  }
  Simulation straight(u, kNoisy, cfg);
  straight.run();
  EXPECT_EQ(resumed.state().positions, straight.state().positions);
  EXPECT_EQ(resumed.state().front, straight.state().front);
}

TEST(Particle, RestartRejectsMismatchedState) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto cfg = small_config(100);
  Simulation sim(u, kNoisy, cfg);
  sim.run_until(10);
  auto bigger = small_config(200);
  EXPECT_THROW(Simulation::restart(sim.state(), u, kNoisy, bigger), std::invalid_argument);
}

TEST(Particle, TrajectoryRowsAreConsistent) {
  const auto u = SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  auto cfg = small_config();
  cfg.snapshot_times = {0.1};
  const auto t = run(u, kNoisy, cfg);
  ASSERT_EQ(t.rows(), cfg.grid().n_steps + 1);
  ASSERT_EQ(t.dW.size(), cfg.grid().n_steps);
  for (std::size_t r = 1; r < t.rows(); ++r) {
    EXPECT_GE(t.front[r], t.front[r - 1]);
    EXPECT_LE(t.alive[r], t.alive[r - 1]);
    EXPECT_DOUBLE_EQ(t.front[r], t.front[r - 1] + t.increment[r]);
  }
  ASSERT_EQ(t.snapshots.size(), 1u);
  EXPECT_NEAR(t.snapshots[0].time, 0.1, 1e-12);
}

TEST(Particle, DefaultThreshold) {
  EXPECT_DOUBLE_EQ(default_blowup_threshold(1.0, 1e-4), 0.05);
  EXPECT_DOUBLE_EQ(default_blowup_threshold(1.0, 1e-2), 0.2);
}

TEST(Particle, WilsonInterval) {
  const auto w = wilson_interval(0, 20);
  EXPECT_DOUBLE_EQ(w.lower, 0.0);
  const double z2 = 1.959963984540054 * 1.959963984540054;
  EXPECT_NEAR(w.upper, z2 / (20.0 + z2), 1e-12);
  const auto h = wilson_interval(10, 20);
  EXPECT_NEAR(h.lower + h.upper, 1.0, 1e-12);
  EXPECT_GT(h.lower, 0.0);
}

TEST(Particle, MonteCarloDoesNotDependOnThreads) {
  const PhysicalParams p{0.5, 1.0, 0.5, 0.0};
  const auto u = SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  const auto cfg = small_config(500);
  const auto a = monte_carlo_blowup(u, p, cfg, 6, 0.05, 1);
  const auto b = monte_carlo_blowup(u, p, cfg, 6, 0.05, 3);
  ASSERT_EQ(a.per_replica.size(), b.per_replica.size());
  for (std::size_t r = 0; r < a.per_replica.size(); ++r) {
    EXPECT_EQ(a.per_replica[r].final_front, b.per_replica[r].final_front);
    EXPECT_EQ(a.per_replica[r].seed_common, b.per_replica[r].seed_common);
  }
  EXPECT_EQ(a.jumping, b.jumping);
}
