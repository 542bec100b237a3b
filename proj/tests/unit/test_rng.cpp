#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "stefan/noise.hpp"
#include "stefan/rng.hpp"

using namespace stefan;

TEST(Philox, KnownAnswerVectors) {
  using rng::Counter;
  EXPECT_EQ(rng::philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(rng::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                               {0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(rng::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                               {0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAndIdsAreDistinct) {
  std::set<rng::Counter> seen;
  for (auto s : {rng::Stream::common, rng::Stream::idiosyncratic, rng::Stream::bridge}) {
    for (std::uint64_t id = 0; id < 4; ++id) {
      for (std::uint64_t k = 0; k < 4; ++k) seen.insert(rng::block(42, s, id, k));
    }
  }
  EXPECT_EQ(seen.size(), 48u);
}

TEST(Philox, NormalMoments) {
  const std::size_t n = 200'000;
  double sum = 0.0, sq = 0.0, quart = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = rng::normal(7, rng::Stream::idiosyncratic, 3, k);
    sum += z;
    sq += z * z;
    quart += z * z * z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(quart / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(Philox, UniformIsInUnitInterval) {
  for (std::uint64_t k = 0; k < 10'000; ++k) {
    const double u = rng::uniform(1, rng::Stream::bridge, 0, k);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(rng::to_unit(0, 0), 0.0);
  EXPECT_LT(rng::to_unit(0xffffffff, 0xffffffff), 1.0);
}

TEST(Philox, SequenceMatchesIndexedDraws) {
  rng::NormalSequence seq(9, rng::Stream::picard_idiosyncratic, 17, 3);
  for (std::uint64_t k = 3; k < 40; ++k) {
    EXPECT_EQ(seq(), rng::normal(9, rng::Stream::picard_idiosyncratic, 17, k));
  }
}

TEST(Philox, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t r = 0; r < 1000; ++r) seeds.insert(rng::derive_seed(5, r));
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Noise, GridAndPath) {
  const auto grid = TimeGrid::make(0.01, 1.0);
  EXPECT_EQ(grid.n_steps, 100u);
  EXPECT_DOUBLE_EQ(grid.t_end(), 1.0);
  EXPECT_EQ(grid.nearest_index(0.504), 50u);
  EXPECT_EQ(grid.nearest_index(5.0), 100u);
  EXPECT_THROW(TimeGrid::make(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(TimeGrid::make(2.0, 1.0), std::invalid_argument);

  const auto W = NoisePath::generate(3, grid);
  EXPECT_EQ(W.increments().size(), 100u);
  EXPECT_EQ(W.increment(5), std::sqrt(0.01) * rng::normal(3, rng::Stream::common, 0, 5));
  const auto coarse = W.coarsen(4);
  EXPECT_EQ(coarse.grid().n_steps, 25u);
  EXPECT_NEAR(coarse.values().back(), W.values().back(), 1e-12);
  EXPECT_THROW(W.coarsen(3), std::invalid_argument);
  const auto flat = W.zeroed();
  for (double d : flat.increments()) EXPECT_EQ(d, 0.0);
}

TEST(Noise, BrownianVarianceOverManySeeds) {
  const auto grid = TimeGrid::make(0.01, 1.0);
  double sq = 0.0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) {
    const double w = NoisePath::generate(rng::derive_seed(1, s), grid).values().back();
    sq += w * w;
  }
  EXPECT_NEAR(sq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}
