#include "stefan/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "stefan/rng.hpp"

namespace stefan {

TimeGrid TimeGrid::make(double dt, double t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0) || !(dt <= t_end) || !std::isfinite(t_end)) {
    throw std::invalid_argument("time grid needs 0 < dt <= t_end");
  }
  return TimeGrid{dt, static_cast<std::size_t>(std::llround(t_end / dt))};
}

std::size_t TimeGrid::nearest_index(double t) const {
  if (!(t > 0.0)) return 0;
  const auto k = static_cast<std::size_t>(std::llround(t / dt));
  return std::min(k, n_steps);
}

NoisePath NoisePath::generate(std::uint64_t seed, const TimeGrid& grid) {
  std::vector<double> inc(grid.n_steps);
  const double sq = std::sqrt(grid.dt);
  rng::NormalSequence z(seed, rng::Stream::common, 0);
  for (auto& d : inc) d = sq * z();
  return NoisePath(seed, grid, std::move(inc));
}

NoisePath::NoisePath(std::uint64_t seed, TimeGrid grid, std::vector<double> increments)
    : seed_(seed), grid_(grid), increments_(std::move(increments)) {
  if (increments_.size() != grid_.n_steps) {
    throw std::invalid_argument("noise path length does not match the grid");
  }
}

NoisePath NoisePath::coarsen(std::size_t factor) const {
  if (factor == 0 || grid_.n_steps % factor != 0) {
    throw std::invalid_argument("coarsening factor must divide the number of steps");
  }
  std::vector<double> out(grid_.n_steps / factor, 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < factor; ++j) s += increments_[k * factor + j];
    out[k] = s;
  }
  TimeGrid g{grid_.dt * static_cast<double>(factor), grid_.n_steps / factor};
  return NoisePath(seed_, g, std::move(out));
}

NoisePath NoisePath::zeroed() const {
  return NoisePath(seed_, grid_, std::vector<double>(increments_.size(), 0.0));
}

std::vector<double> NoisePath::values() const {
  std::vector<double> w(increments_.size() + 1, 0.0);
  for (std::size_t k = 0; k < increments_.size(); ++k) w[k + 1] = w[k] + increments_[k];
  return w;
}

}  // namespace stefan
