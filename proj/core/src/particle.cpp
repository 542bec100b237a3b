#include "stefan/particle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "stefan/cascade.hpp"
#include "stefan/rng.hpp"
#include "stefan/test_functions.hpp"

namespace stefan {

void SimConfig::validate() const {
  if (n_particles < 1) throw std::invalid_argument("n_particles must be >= 1");
  if (!(dt > 0.0) || !(t_end > 0.0) || !(dt < t_end)) {
    throw std::invalid_argument("need 0 < dt < t_end");
  }
  if (n_particles > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("n_particles too large");
  }
  if (blowup_threshold && !(*blowup_threshold > 0.0)) {
    throw std::invalid_argument("blowup_threshold must be positive");
  }
  if (density_bins < 1) throw std::invalid_argument("density_bins must be >= 1");
  if (density_span && !(*density_span > 0.0)) {
    throw std::invalid_argument("density_span must be positive");
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0) || t > t_end) throw std::invalid_argument("snapshot time outside [0, t_end]");
  }
}

ParticleState ParticleState::from_positions(std::vector<double> positions, double s0,
                                            double mass_per_particle, double front_step) {
  for (double x : positions) {
    if (!(x > s0)) throw std::invalid_argument("initial positions must lie strictly above s0");
  }
  ParticleState s;
  s.positions = std::move(positions);
  s.alive.assign(s.positions.size(), 1);
  s.mass_per_particle = mass_per_particle;
  s.front_step = front_step;
  s.s0 = s0;
  s.front = s0;
  s.reindex();
  return s;
}

double ParticleState::loss() const {
  if (positions.empty()) return 0.0;
  return static_cast<double>(absorbed_count()) / static_cast<double>(size());
}

double ParticleState::absorbed_mass() const {
  return mass_per_particle * static_cast<double>(size()) - alive_mass();
}

double ParticleState::alive_mass() const {
  return mass_per_particle * static_cast<double>(alive_count());
}

void ParticleState::reindex() {
  alive_ids.clear();
  for (std::size_t i = 0; i < alive.size(); ++i) {
    if (alive[i]) alive_ids.push_back(static_cast<std::uint32_t>(i));
  }
}

std::vector<double> ParticleState::alive_positions() const {
  std::vector<double> out;
  out.reserve(alive_ids.size());
  for (auto i : alive_ids) out.push_back(positions[i]);
  return out;
}

std::size_t initial_absorbed(std::span<const double> sorted, double s0, double analytic_jump,
                             double front_step) {
  const auto k0 = static_cast<std::size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), s0 + analytic_jump) - sorted.begin());
  return scan_absorbed(sorted, s0, front_step, k0);
}

ParticleState init(const SupercoolingProfile& profile, const PhysicalParams& p,
                   const SimConfig& cfg) {
  if (auto err = validate(p)) throw std::invalid_argument(err->message);
  ParticleState s;
  s.s0 = p.s0;
  s.front = p.s0;
  const double A = profile.total_mass();
  if (!(A > 0.0)) return s;
  const std::size_t n = cfg.n_particles;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = profile.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  const double m = A / static_cast<double>(n);
  const double a = reduce(p, A).alpha / static_cast<double>(n);
  s.positions = std::move(x);
  s.alive.assign(n, 1);
  s.mass_per_particle = m;
  s.front_step = a;
  const double J = initial_physical_jump(profile, p.lambda_kappa());
  const std::size_t k = initial_absorbed(s.positions, p.s0, J, a);
  for (std::size_t i = 0; i < k; ++i) s.alive[i] = 0;
  if (k > 0) s.front = p.s0 + a * static_cast<double>(k);
  s.reindex();
  return s;
}

namespace {

// Crossing probabilities below 2^-53 cannot beat a 53-bit uniform.
constexpr double kBridgeCutoff = 36.8;

struct Scratch {
  double window = 0.0;
  std::vector<std::uint32_t> candidates;
};

// Diffuse, bridge test, exact scan. `before_absorb` sees the outcome and the
// absorbed ids while the alive set still holds the pre-jump measure.
template <class Idio, class BridgeU, class Hook>
StepOutcome step_impl(ParticleState& s, double dW, const ReducedParams& p, double dt, Idio&& idio,
                      BridgeU&& bridge_u, bool use_bridge, Scratch& scratch, Hook&& before_absorb) {
  StepOutcome out;
  const double base = s.front;
  out.front_before = base;
  const double a = s.front_step;
  const double vol = p.idiosyncratic_vol() * std::sqrt(dt);
  const double shift = p.common_vol() * dW;
  const double bridge_scale = 2.0 / (p.sigma * p.sigma * dt);
  auto& pos = s.positions;

  double window = std::max(scratch.window, a * 64.0);
  auto& cand = scratch.candidates;
  cand.clear();
  double limit = base + window;
  for (auto i : s.alive_ids) {
    const double x_old = pos[i];
    double x = x_old + vol * idio(i) + shift;
    if (use_bridge && x > base) {
      const double q = bridge_scale * (x_old - base) * (x - base);
      if (q < kBridgeCutoff && bridge_u(i) < std::exp(-q)) x = base;
    }
    pos[i] = x;
    if (x <= limit) cand.push_back(i);
  }

  auto by_position = [&pos](std::uint32_t l, std::uint32_t r) {
    return pos[l] < pos[r] || (pos[l] == pos[r] && l < r);
  };
  std::size_t k = 0;
  for (;;) {
    std::sort(cand.begin(), cand.end(), by_position);
    k = 0;
    while (k < cand.size() && !(pos[cand[k]] > base + a * static_cast<double>(k))) ++k;
    const bool exact = k < cand.size() || cand.size() == s.alive_ids.size() ||
                       base + a * static_cast<double>(k) <= limit;
    if (exact) break;
    window *= 4.0;
    limit = base + window;
    cand.clear();
    for (auto i : s.alive_ids) {
      if (pos[i] <= limit) cand.push_back(i);
    }
  }
  scratch.window = std::max(a * 64.0, a * 4.0 * static_cast<double>(k));

  out.absorbed = k;
  out.jump = a * static_cast<double>(k);
  if (k == 0) return out;
  before_absorb(out, std::span<const std::uint32_t>(cand.data(), k));
  for (std::size_t j = 0; j < k; ++j) s.alive[cand[j]] = 0;
  std::erase_if(s.alive_ids, [&s](std::uint32_t i) { return s.alive[i] == 0; });
  s.front = base + out.jump;
  return out;
}

}  // namespace

StepOutcome step(ParticleState& state, double dW, std::span<const double> idio_draws,
                 const ReducedParams& p, double dt, std::span<const double> bridge_uniforms) {
  if (idio_draws.size() != state.size()) {
    throw std::invalid_argument("one idiosyncratic draw per particle required");
  }
  const bool use_bridge = !bridge_uniforms.empty();
  if (use_bridge && bridge_uniforms.size() != state.size()) {
    throw std::invalid_argument("one bridge uniform per particle required");
  }
  Scratch scratch;
  auto out = step_impl(
      state, dW, p, dt, [&](std::uint32_t i) { return idio_draws[i]; },
      [&](std::uint32_t i) { return bridge_uniforms[i]; }, use_bridge, scratch,
      [](const StepOutcome&, std::span<const std::uint32_t>) {});
  ++state.step_index;
  state.time += dt;
  return out;
}

double Trajectory::max_increment() const {
  double m = 0.0;
  for (double d : increment) m = std::max(m, d);
  return m;
}

std::optional<double> Trajectory::first_jump_time() const {
  if (jumps.empty()) return std::nullopt;
  return jumps.front().time;
}

double default_blowup_threshold(double alpha, double front_step) {
  return std::max(0.05 * alpha, 20.0 * front_step);
}

Simulation::Simulation(const SupercoolingProfile& profile, const PhysicalParams& p,
                       const SimConfig& cfg)
    : Simulation(init(profile, p, cfg), profile, p, cfg, true) {}

Simulation Simulation::restart(ParticleState state, const SupercoolingProfile& profile,
                               const PhysicalParams& p, const SimConfig& cfg) {
  const double A = profile.total_mass();
  const std::size_t expected = A > 0.0 ? cfg.n_particles : 0;
  if (state.size() != expected) {
    throw std::invalid_argument("restart state has a different particle count than the config");
  }
  if (state.step_index > cfg.grid().n_steps) {
    throw std::invalid_argument("restart state lies beyond the end of the grid");
  }
  state.reindex();
  return Simulation(std::move(state), profile, p, cfg, false);
}

Simulation::Simulation(ParticleState state, const SupercoolingProfile& profile,
                       const PhysicalParams& p, const SimConfig& cfg, bool fresh)
    : cfg_(cfg), params_(p), state_(std::move(state)) {
  cfg_.validate();
  const double A = profile.total_mass();
  reduced_ = reduce(p, A);
  grid_ = cfg_.grid();
  noise_ = NoisePath::generate(cfg_.seed_common, grid_);
  state_.time = grid_.time(state_.step_index);

  traj_.params = p;
  traj_.reduced = reduced_;
  traj_.profile = profile;
  traj_.total_mass = A;
  traj_.n_particles = state_.size();
  traj_.mass_per_particle = state_.mass_per_particle;
  traj_.front_step = state_.front_step;
  traj_.grid = grid_;
  traj_.seed_common = cfg_.seed_common;
  traj_.seed_idio = cfg_.seed_idio;
  traj_.blowup_threshold =
      cfg_.blowup_threshold.value_or(default_blowup_threshold(reduced_.alpha, state_.front_step));
  traj_.bridge_correction = cfg_.bridge_correction;
  traj_.first_row = state_.step_index;

  span_ = cfg_.density_span.value_or((profile.support_end() - p.s0) +
                                     3.0 * reduced_.sigma * std::sqrt(cfg_.t_end));
  if (!(span_ > 0.0)) span_ = 1.0;
  for (double t : cfg_.snapshot_times) snapshot_steps_.push_back(grid_.nearest_index(t));
  std::sort(snapshot_steps_.begin(), snapshot_steps_.end());
  snapshot_steps_.erase(std::unique(snapshot_steps_.begin(), snapshot_steps_.end()),
                        snapshot_steps_.end());

  bool macroscopic = false;
  double initial = 0.0;
  if (fresh && state_.absorbed_count() > 0) {
    initial = state_.front_step * static_cast<double>(state_.absorbed_count());
    macroscopic = initial > traj_.blowup_threshold;
    if (macroscopic) {
      JumpRecord rec;
      rec.kind = JumpRecord::Kind::initial;
      rec.step = 0;
      rec.time = 0.0;
      rec.front_before = p.s0;
      rec.size = initial;
      rec.absorbed = state_.absorbed_count();
      if (cfg_.keep_prejump) rec.prejump = state_.positions;
      traj_.jumps.push_back(std::move(rec));
    }
  }
  record_row(initial, macroscopic);
  if (cfg_.record_moments) {
    double corr_exp = 0.0, corr_bump = 0.0;
    if (fresh) {
      const double m = state_.mass_per_particle;
      for (double x : state_.positions) {
        const auto b = cos_bump(x);
        traj_.initial_moments.exp_neg += m * std::exp(-x);
        traj_.initial_moments.bump += m * b.g;
        traj_.initial_moments.bump_d1 += m * b.dg;
        traj_.initial_moments.bump_d2 += m * b.d2g;
      }
    }
    if (fresh && state_.absorbed_count() > 0) {
      const double e0 = std::exp(-p.s0);
      const double g0 = cos_bump(p.s0).g;
      const double m = state_.mass_per_particle;
      for (std::size_t i = 0; i < state_.size(); ++i) {
        if (state_.alive[i]) continue;
        const double x = state_.positions[i];
        corr_exp += m * (e0 - std::exp(-x));
        corr_bump += m * (g0 - cos_bump(x).g);
      }
    }
    record_moments(corr_exp, corr_bump);
  }
  maybe_snapshot();
}

void Simulation::record_row(double increment, bool macroscopic) {
  traj_.times.push_back(grid_.time(state_.step_index));
  traj_.front.push_back(state_.front);
  traj_.loss.push_back(state_.loss());
  traj_.alive.push_back(state_.alive_count());
  traj_.increment.push_back(increment);
  traj_.jump_flag.push_back(macroscopic ? 1 : 0);
}

void Simulation::record_moments(double corr_exp, double corr_bump) {
  MomentRow row;
  const double m = state_.mass_per_particle;
  for (auto i : state_.alive_ids) {
    const double x = state_.positions[i];
    const auto b = cos_bump(x);
    row.exp_neg += m * std::exp(-x);
    row.bump += m * b.g;
    row.bump_d1 += m * b.dg;
    row.bump_d2 += m * b.d2g;
  }
  row.corr_exp = corr_exp;
  row.corr_bump = corr_bump;
  traj_.moments.push_back(row);
}

void Simulation::maybe_snapshot() {
  if (!std::binary_search(snapshot_steps_.begin(), snapshot_steps_.end(), state_.step_index)) {
    return;
  }
  DensitySnapshot snap;
  snap.time = grid_.time(state_.step_index);
  snap.front = state_.front;
  snap.bin_width = span_ / static_cast<double>(cfg_.density_bins);
  snap.density.assign(cfg_.density_bins, 0.0);
  std::vector<std::size_t> counts(cfg_.density_bins, 0);
  for (auto i : state_.alive_ids) {
    const double off = (state_.positions[i] - state_.front) / snap.bin_width;
    if (off < 0.0) continue;
    const auto j = static_cast<std::size_t>(off);
    if (j < counts.size()) ++counts[j];
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    snap.density[j] = state_.mass_per_particle * static_cast<double>(counts[j]) / snap.bin_width;
  }
  traj_.snapshots.push_back(std::move(snap));
}

void Simulation::advance() {
  const std::size_t k = state_.step_index;
  const double dW = noise_.increment(k);
  const std::uint64_t seed = cfg_.seed_idio;

  std::uint64_t cached_pair = std::numeric_limits<std::uint64_t>::max();
  std::pair<double, double> cached{};
  auto idio = [&](std::uint32_t i) {
    const std::uint64_t pair = i >> 1;
    if (pair != cached_pair) {
      cached = rng::normal_pair(seed, rng::Stream::idiosyncratic, k, pair);
      cached_pair = pair;
    }
    return (i & 1u) ? cached.second : cached.first;
  };
  auto bridge = [&](std::uint32_t i) { return rng::uniform(seed, rng::Stream::bridge, k, i); };

  const double threshold = traj_.blowup_threshold;
  const double m = state_.mass_per_particle;
  double corr_exp = 0.0, corr_bump = 0.0;
  const bool moments = cfg_.record_moments;
  Scratch scratch{window_, std::move(candidates_)};
  auto hook = [&](const StepOutcome& o, std::span<const std::uint32_t> absorbed) {
    if (o.jump > threshold) {
      JumpRecord rec;
      rec.kind = JumpRecord::Kind::step;
      rec.step = k + 1;
      rec.time = grid_.time(k + 1);
      rec.front_before = o.front_before;
      rec.size = o.jump;
      rec.absorbed = o.absorbed;
      if (cfg_.keep_prejump) rec.prejump = state_.alive_positions();
      traj_.jumps.push_back(std::move(rec));
    }
    if (moments) {
      const double e0 = std::exp(-o.front_before);
      const double g0 = cos_bump(o.front_before).g;
      for (auto i : absorbed) {
        const double x = state_.positions[i];
        if (!(x > o.front_before)) continue;
        corr_exp += m * (e0 - std::exp(-x));
        corr_bump += m * (g0 - cos_bump(x).g);
      }
    }
  };
  const auto out = step_impl(state_, dW, reduced_, grid_.dt, idio, bridge,
                             cfg_.bridge_correction, scratch, hook);
  window_ = scratch.window;
  candidates_ = std::move(scratch.candidates);

  ++state_.step_index;
  state_.time = grid_.time(state_.step_index);
  traj_.dW.push_back(dW);
  record_row(out.jump, out.jump > threshold);
  if (moments) record_moments(corr_exp, corr_bump);
  maybe_snapshot();
}

void Simulation::run_until(std::size_t grid_step) {
  grid_step = std::min(grid_step, grid_.n_steps);
  while (state_.step_index < grid_step) advance();
}

Trajectory run(const SupercoolingProfile& profile, const PhysicalParams& p, const SimConfig& cfg) {
  Simulation sim(profile, p, cfg);
  sim.run();
  return sim.take_trajectory();
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

BlowupEstimate monte_carlo_blowup(const SupercoolingProfile& profile, const PhysicalParams& p,
                                  const SimConfig& cfg, std::size_t n_replicas,
                                  double jump_cutoff, unsigned threads) {
  if (n_replicas < 1) throw std::invalid_argument("n_replicas must be >= 1");
  if (!(jump_cutoff > 0.0)) throw std::invalid_argument("jump_cutoff must be positive");
  BlowupEstimate est;
  est.replicas = n_replicas;
  est.jump_cutoff = jump_cutoff;
  est.per_replica.resize(n_replicas);

  auto run_one = [&](std::size_t r) {
    SimConfig c = cfg;
    c.seed_common = rng::derive_seed(cfg.seed_common, r);
    c.seed_idio = rng::derive_seed(cfg.seed_idio, r);
    c.blowup_threshold = jump_cutoff;
    c.snapshot_times.clear();
    c.record_moments = false;
    c.keep_prejump = false;
    const Trajectory t = run(profile, p, c);
    ReplicaSummary s;
    s.seed_common = c.seed_common;
    s.seed_idio = c.seed_idio;
    s.max_increment = t.max_increment();
    s.final_front = t.front.back();
    for (std::size_t row = 0; row < t.rows(); ++row) {
      if (t.increment[row] >= jump_cutoff) {
        ++s.macroscopic_jumps;
        if (!s.first_jump_time) {
          s.first_jump_time = t.times[row];
          s.first_jump_row = row;
        }
      }
    }
    est.per_replica[r] = s;
  };

  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t r = 0; r < n_replicas; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < n_replicas;) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& s : est.per_replica) {
    if (s.first_jump_time) {
      ++est.jumping;
      est.first_jump_times.push_back(*s.first_jump_time);
    }
  }
  std::sort(est.first_jump_times.begin(), est.first_jump_times.end());
  est.p_hat = static_cast<double>(est.jumping) / static_cast<double>(n_replicas);
  est.wilson = wilson_interval(est.jumping, n_replicas);
  return est;
}

}  // namespace stefan
