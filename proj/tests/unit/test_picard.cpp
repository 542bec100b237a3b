#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stefan/picard.hpp"

using namespace stefan;

namespace {

const PhysicalParams kParams{0.5, 1.0, 0.5, 0.0};

FrontPath random_front(const TimeGrid& grid, std::uint64_t seed, double alpha, std::mt19937_64& g) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto f = FrontPath::constant(grid, 0.0, seed);
  double v = 0.0;
  for (std::size_t k = 1; k < f.values.size(); ++k) {
    if (unit(g) < 0.05) v += 0.05 * alpha * unit(g);
    f.values[k] = std::min(v, alpha);
  }
  return f;
}

}  // namespace

TEST(Picard, GammaIsMonotone) {
  const auto u = SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  const auto rp = reduce(kParams, u.total_mass());
  const auto grid = TimeGrid::make(0.01, 0.5);
  const auto W = NoisePath::generate(4, grid);
  PicardConfig cfg;
  cfg.m_samples = 2000;
  std::mt19937_64 g(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto lo = random_front(grid, 4, rp.alpha, g);
    auto hi = lo;
    for (auto& v : hi.values) v += 0.02 * trial;
    const auto glo = gamma_map(lo, u, rp, W, cfg);
    const auto ghi = gamma_map(hi, u, rp, W, cfg);
    EXPECT_TRUE(glo.non_decreasing());
    for (std::size_t k = 0; k < glo.values.size(); ++k) {
      ASSERT_LE(glo.values[k], ghi.values[k]) << "trial " << trial << " k " << k;
      ASSERT_LE(ghi.values[k], rp.alpha + 1e-15);
    }
  }
}

TEST(Picard, GammaOfConstantBarrierIsTheHittingLaw) {
  // Starts in a thin band at 1, theta = 0, sigma = 1, W frozen.
  const PhysicalParams p{0.5, 1.0, 0.0, 0.0};
  const SupercoolingProfile u(0.0, {{0.99, 0.0}, {1.01, 50.0}});
  const auto rp = reduce(p, u.total_mass());
  const auto grid = TimeGrid::make(1e-3, 1.0);
  const auto W = NoisePath::generate(1, grid);
  PicardConfig cfg;
  cfg.m_samples = 20'000;
  const auto g = gamma_map(FrontPath::constant(grid, 0.0, 1), u, rp, W, cfg);
  const double L = g.values.back() / rp.alpha;
  const double exact = std::erfc(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(L, exact, 3.0 * std::sqrt(exact * (1 - exact) / 20'000) + 0.005);
}

TEST(Picard, ZeroFeedbackIsConstant) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.0);
  const auto rp = reduce(kParams, 0.0);
  const auto grid = TimeGrid::make(0.01, 0.2);
  const auto W = NoisePath::generate(2, grid);
  const auto r = iterate_to_fixed_point(u, rp, W, PicardConfig{}, 10, 1e-6);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  for (double v : r.front.values) EXPECT_EQ(v, 0.0);
}

TEST(Picard, IterationReachesAFixedPoint) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto rp = reduce(kParams, u.total_mass());
  const auto grid = TimeGrid::make(0.005, 0.5);
  const auto W = NoisePath::generate(8, grid);
  PicardConfig cfg;
  cfg.m_samples = 4000;
  const auto r = iterate_to_fixed_point(u, rp, W, cfg, 50, 1e-12);
  ASSERT_TRUE(r.converged);
  EXPECT_TRUE(r.increasing);
  EXPECT_TRUE(r.front.non_decreasing());
  const auto again = gamma_map(r.front, u, rp, W, cfg);
  EXPECT_EQ(again.values, r.front.values);
}

TEST(Picard, ThreadCountDoesNotChangeTheIterate) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto rp = reduce(kParams, u.total_mass());
  const auto grid = TimeGrid::make(0.01, 0.3);
  const auto W = NoisePath::generate(8, grid);
  PicardConfig one;
  one.m_samples = 3000;
  PicardConfig three = one;
  three.threads = 3;
  EXPECT_EQ(iterate_to_fixed_point(u, rp, W, one, 20, 1e-12).front.values,
            iterate_to_fixed_point(u, rp, W, three, 20, 1e-12).front.values);
}

TEST(Picard, RejectsMismatchedInputs) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto rp = reduce(kParams, u.total_mass());
  const auto W = NoisePath::generate(8, TimeGrid::make(0.01, 0.3));
  const auto other = FrontPath::constant(TimeGrid::make(0.02, 0.3), 0.0, 8);
  EXPECT_THROW(gamma_map(other, u, rp, W, PicardConfig{}), std::invalid_argument);

  SimConfig sim;
  sim.n_particles = 100;
  sim.dt = 0.01;
  sim.t_end = 0.3;
  sim.seed_common = 9;
  const auto traj = run(u, kParams, sim);
  EXPECT_THROW(compare_with_particles(traj, FrontPath::constant(W.grid(), 0.0, 8)),
               std::invalid_argument);
  EXPECT_NO_THROW(compare_with_particles(traj, FrontPath::constant(W.grid(), 0.0, 9)));
}
