#include "stefan/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "stefan/rng.hpp"

namespace stefan {

namespace {

constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
constexpr double kBridgeCutoff = 36.8;

struct PathSetup {
  std::vector<double> starts;
  std::vector<double> shift;  // sigma rho dW_k
  double vol = 0.0;
  double bridge_scale = 0.0;
  double bridge_reach = 0.0;  // sqrt(kBridgeCutoff / bridge_scale)
};

PathSetup make_setup(const SupercoolingProfile& profile, const ReducedParams& p,
                     const NoisePath& W, std::size_t m) {
  PathSetup s;
  s.starts.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    s.starts[j] = profile.quantile((static_cast<double>(j) + 0.5) / static_cast<double>(m));
  }
  const double dt = W.grid().dt;
  s.shift.resize(W.grid().n_steps);
  for (std::size_t k = 0; k < s.shift.size(); ++k) s.shift[k] = p.common_vol() * W.increment(k);
  s.vol = p.idiosyncratic_vol() * std::sqrt(dt);
  s.bridge_scale = 2.0 / (p.sigma * p.sigma * dt);
  s.bridge_reach = std::sqrt(kBridgeCutoff / s.bridge_scale);
  return s;
}

// Hit step of path j against barrier s, simulating at most `cap` steps; a path
// known to hit by `cap` under a lower barrier hits by `cap` here as well.
// `margin` receives a lower bound on the raise of s that could make the path
// hit before its hit step: min over the steps before it of the endpoint
// distance and of the smallest d with B (a - d)(b - d) = min(-log u, cutoff),
// where a, b are the distances of the step's endpoints to s[k] and u is the
// step's bridge uniform.
std::size_t hit_step(std::size_t j, const std::vector<double>& s, const PathSetup& setup,
                     const PicardConfig& cfg, std::size_t cap, double& margin) {
  double x = setup.starts[j];
  margin = 0.0;
  if (!(x > s[0])) return 0;
  const std::size_t n = setup.shift.size();
  const std::size_t stop = std::min(cap, n);
  double low = INFINITY;
  rng::NormalSequence z(cfg.seed, rng::Stream::picard_idiosyncratic, j);
  for (std::size_t k = 0; k < stop; ++k) {
    const double next = x + setup.vol * z() + setup.shift[k];
    if (cfg.bridge_correction && next > s[k]) {
      const double q = setup.bridge_scale * (x - s[k]) * (next - s[k]);
      if (q < kBridgeCutoff &&
          rng::uniform(cfg.seed, rng::Stream::picard_bridge, j, k) < std::exp(-q)) {
        margin = low;
        return k + 1;
      }
    }
    if (!(next > s[k + 1])) {
      margin = low;
      return k + 1;
    }
    low = std::min(low, next - s[k + 1]);
    if (cfg.bridge_correction && std::min(x, next) - s[k] - setup.bridge_reach < low) {
      const double a = x - s[k], b = next - s[k];
      const double u = rng::uniform(cfg.seed, rng::Stream::picard_bridge, j, k);
      const double area = std::min(-std::log(u), kBridgeCutoff) / setup.bridge_scale;
      const double d = 0.5 * ((a + b) - std::sqrt((a - b) * (a - b) + 4.0 * area));
      low = std::min(low, d);
    }
    x = next;
  }
  if (cap <= n) return cap;
  margin = low;
  return kNever;
}

void check_grid(const FrontPath& s, const NoisePath& W) {
  if (!(s.grid == W.grid()) || s.values.size() != W.grid().n_steps + 1) {
    throw std::invalid_argument("front path grid does not match the noise grid");
  }
}

struct PathCache {
  std::vector<std::size_t> hits;  // kNever = no hit
  std::vector<double> margin;
  const FrontPath* previous = nullptr;
};

// One application of Gamma, reusing the previous application where that is
// exact. A path whose margin exceeds the largest raise of the barrier keeps
// its hit step (for hitters this needs the barrier to be pointwise above the
// previous one); otherwise hitters are capped at their previous hit step.
FrontPath apply_gamma(const FrontPath& s, const ReducedParams& p, const NoisePath& W,
                      const PicardConfig& cfg, const PathSetup& setup, PathCache& cache) {
  const std::size_t m = setup.starts.size();
  const std::size_t n = W.grid().n_steps;
  const bool reuse = cache.previous != nullptr;
  bool capped = reuse;
  double raise = 0.0;
  if (reuse) {
    for (std::size_t k = 0; k <= n; ++k) {
      const double d = s.values[k] - cache.previous->values[k];
      capped = capped && d >= 0.0;
      raise = std::max(raise, d);
    }
  }
  cache.hits.resize(m, kNever);
  cache.margin.resize(m, 0.0);
  const double slack = 1e-12 * (1.0 + std::abs(s.s0) + p.alpha);

  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const bool keeps = cache.hits[j] == kNever || capped;
      if (reuse && keeps && cache.margin[j] > raise + slack) {
        cache.margin[j] -= raise + slack;
        continue;
      }
      const std::size_t cap = capped ? cache.hits[j] : kNever;
      cache.hits[j] = hit_step(j, s.values, setup, cfg, cap, cache.margin[j]);
    }
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1 || m < 2 * threads) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (m + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = std::min(m, t * chunk), hi = std::min(m, lo + chunk);
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  std::vector<std::size_t> count(n + 1, 0);
  for (auto h : cache.hits) {
    if (h <= n) ++count[h];
  }
  FrontPath out;
  out.grid = s.grid;
  out.s0 = s.s0;
  out.noise_seed = W.seed();
  out.values.resize(n + 1);
  std::size_t cum = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    cum += count[k];
    out.values[k] = s.s0 + p.alpha * (static_cast<double>(cum) / static_cast<double>(m));
  }
  return out;
}

}  // namespace

FrontPath FrontPath::constant(const TimeGrid& grid, double s0, std::uint64_t noise_seed) {
  FrontPath f;
  f.grid = grid;
  f.s0 = s0;
  f.noise_seed = noise_seed;
  f.values.assign(grid.n_steps + 1, s0);
  return f;
}

bool FrontPath::non_decreasing() const {
  return std::is_sorted(values.begin(), values.end());
}

std::vector<std::pair<std::size_t, double>> FrontPath::jumps(double threshold) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double d = values[k] - values[k - 1];
    if (d > threshold) out.emplace_back(k, d);
  }
  return out;
}

FrontPath gamma_map(const FrontPath& s, const SupercoolingProfile& profile, const ReducedParams& p,
                    const NoisePath& W, const PicardConfig& cfg) {
  check_grid(s, W);
  if (cfg.m_samples < 1) throw std::invalid_argument("m_samples must be >= 1");
  if (!(profile.total_mass() > 0.0) || p.alpha == 0.0) {
    FrontPath out = FrontPath::constant(s.grid, s.s0, W.seed());
    return out;
  }
  const PathSetup setup = make_setup(profile, p, W, cfg.m_samples);
  PathCache cache;
  return apply_gamma(s, p, W, cfg, setup, cache);
}

PicardResult iterate_to_fixed_point(const SupercoolingProfile& profile, const ReducedParams& p,
                                    const NoisePath& W, const PicardConfig& cfg,
                                    std::size_t max_iters, double tol) {
  if (cfg.m_samples < 1) throw std::invalid_argument("m_samples must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const double s0 = profile.origin();
  PicardResult res;
  const FrontPath start = FrontPath::constant(W.grid(), s0, W.seed());
  if (!(profile.total_mass() > 0.0) || p.alpha == 0.0) {
    res.front = start;
    res.residuals.push_back(0.0);
    res.iterations = 1;
    res.converged = true;
    return res;
  }
  const PathSetup setup = make_setup(profile, p, W, cfg.m_samples);
  PathCache cache;
  FrontPath current = apply_gamma(start, p, W, cfg, setup, cache);
  FrontPath previous = start;
  while (res.iterations < max_iters) {
    cache.previous = &previous;
    FrontPath next = apply_gamma(current, p, W, cfg, setup, cache);
    ++res.iterations;
    double residual = 0.0;
    bool up = true, down = true;
    for (std::size_t k = 0; k < next.values.size(); ++k) {
      const double d = next.values[k] - current.values[k];
      residual = std::max(residual, std::abs(d));
      up = up && d >= 0.0;
      down = down && d <= 0.0;
    }
    res.increasing = res.increasing && up;
    res.decreasing = res.decreasing && down;
    res.residuals.push_back(residual);
    previous = std::move(current);
    current = std::move(next);
    if (residual < tol) {
      res.converged = true;
      break;
    }
  }
  res.front = std::move(current);
  return res;
}

double compare_with_particles(const Trajectory& traj, const FrontPath& fp) {
  if (traj.seed_common != fp.noise_seed) {
    throw std::invalid_argument("particle trajectory and front path use different W seeds");
  }
  if (!(traj.grid == fp.grid) || traj.first_row != 0 || traj.rows() != fp.values.size()) {
    throw std::invalid_argument("particle trajectory and front path use different grids");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < fp.values.size(); ++k) {
    d = std::max(d, std::abs(traj.front[k] - fp.values[k]));
  }
  return d;
}

}  // namespace stefan
