#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stefan {

/// Uniform time grid t_k = k * dt, k = 0..n_steps.
struct TimeGrid {
  double dt = 1e-3;
  std::size_t n_steps = 0;

  /// n_steps = round(t_end / dt); throws std::invalid_argument unless 0 < dt <= t_end.
  static TimeGrid make(double dt, double t_end);

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double t_end() const { return time(n_steps); }
  /// Index of the grid time closest to t, clamped to the grid.
  std::size_t nearest_index(double t) const;

  bool operator==(const TimeGrid&) const = default;
};

/// Common Brownian path W on a grid, generated from a counter-based stream
/// so that increment k depends only on (seed, k, resolution level).
class NoisePath {
 public:
  NoisePath() = default;

  /// dW_k = sqrt(dt) * normal(seed, common, 0, k).
  static NoisePath generate(std::uint64_t seed, const TimeGrid& grid);

  /// Path with explicitly given increments (tests, loading from disk).
  NoisePath(std::uint64_t seed, TimeGrid grid, std::vector<double> increments);

  /// Sums blocks of `factor` increments; the coarse path shares W at every
  /// coarse grid time. Throws if factor does not divide n_steps.
  NoisePath coarsen(std::size_t factor) const;

  /// Same increments with every entry zeroed (theta = 0 runs).
  NoisePath zeroed() const;

  std::uint64_t seed() const { return seed_; }
  const TimeGrid& grid() const { return grid_; }
  std::span<const double> increments() const { return increments_; }
  double increment(std::size_t k) const { return increments_[k]; }
  /// W(t_k), summed left to right.
  std::vector<double> values() const;

 private:
  std::uint64_t seed_ = 0;
  TimeGrid grid_;
  std::vector<double> increments_;
};

}  // namespace stefan
