#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "stefan/noise.hpp"
#include "stefan/params.hpp"
#include "stefan/particle.hpp"
#include "stefan/profile.hpp"

namespace stefan {

/// Non-decreasing front on a uniform grid, values at t_k = k dt.
struct FrontPath {
  TimeGrid grid;
  std::vector<double> values;
  double s0 = 0.0;
  std::uint64_t noise_seed = 0;

  static FrontPath constant(const TimeGrid& grid, double s0, std::uint64_t noise_seed);

  bool non_decreasing() const;
  /// Grid steps whose increment exceeds the threshold: (k, s(t_k) - s(t_{k-1})).
  std::vector<std::pair<std::size_t, double>> jumps(double threshold) const;
};

struct PicardConfig {
  std::size_t m_samples = 10'000;
  std::uint64_t seed = 3;
  bool bridge_correction = true;
  unsigned threads = 1;
};

/// Gamma[s](t_k) = s0 + alpha * (fraction of the m stratified paths that have
/// hit the barrier s by t_k), conditional on the frozen common path W. Each
/// path has its own idiosyncratic stream, so repeated calls use common random
/// numbers and Gamma is exactly monotone in s. Throws std::invalid_argument
/// on a grid mismatch.
FrontPath gamma_map(const FrontPath& s, const SupercoolingProfile& profile, const ReducedParams& p,
                    const NoisePath& W, const PicardConfig& cfg);

struct PicardResult {
  FrontPath front;
  std::vector<double> residuals;  ///< sup_t |s^(n) - s^(n-1)| per iteration
  std::size_t iterations = 0;
  bool converged = false;
  bool increasing = true;  ///< every iterate >= its predecessor pointwise
  bool decreasing = true;  ///< every iterate <= its predecessor pointwise
};

/// s^(0) = Gamma[s0 constant], s^(n) = Gamma[s^(n-1)] until the sup-norm change
/// drops below tol or max_iters iterations are done. Non-convergence is
/// reported, not thrown.
PicardResult iterate_to_fixed_point(const SupercoolingProfile& profile, const ReducedParams& p,
                                    const NoisePath& W, const PicardConfig& cfg,
                                    std::size_t max_iters, double tol);

/// sup over the grid of |particle front - Picard front|. Throws
/// std::invalid_argument if the noise seeds or grids differ.
double compare_with_particles(const Trajectory& traj, const FrontPath& fp);

}  // namespace stefan
