#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stefan/noise.hpp"
#include "stefan/params.hpp"
#include "stefan/profile.hpp"

namespace stefan {

struct SimConfig {
  std::size_t n_particles = 10'000;
  double dt = 1e-3;
  double t_end = 1.0;
  std::uint64_t seed_common = 1;
  std::uint64_t seed_idio = 2;
  std::vector<double> snapshot_times;
  /// Macroscopic jump cutoff; unset means max(0.05 alpha, 20 A / (N lambda kappa)).
  std::optional<double> blowup_threshold;
  std::size_t density_bins = 50;
  /// Histogram window [front, front + span]; unset means support length + 3 sigma sqrt(t_end).
  std::optional<double> density_span;
  bool bridge_correction = true;
  bool record_moments = false;
  bool keep_prejump = true;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  TimeGrid grid() const { return TimeGrid::make(dt, t_end); }
};

/// Particle system in absolute coordinates: the front moves, particles do not shift.
struct ParticleState {
  std::vector<double> positions;
  std::vector<std::uint8_t> alive;
  std::vector<std::uint32_t> alive_ids;  ///< ascending indices of alive particles
  double mass_per_particle = 0.0;        ///< A / N
  double front_step = 0.0;               ///< A / (N lambda kappa): front advance per absorption
  double s0 = 0.0;
  double front = 0.0;
  std::size_t step_index = 0;  ///< number of completed grid steps
  double time = 0.0;

  /// Fresh state with all particles alive at the given absolute positions
  /// (all must lie strictly above s0) and front s0.
  static ParticleState from_positions(std::vector<double> positions, double s0,
                                      double mass_per_particle, double front_step);

  std::size_t size() const { return positions.size(); }
  std::size_t alive_count() const { return alive_ids.size(); }
  std::size_t absorbed_count() const { return size() - alive_count(); }
  /// Absorbed fraction L; 0 for an empty system.
  double loss() const;
  /// m * N - m * alive, the expression used by every energy check.
  double absorbed_mass() const;
  double alive_mass() const;
  /// Rebuilds alive_ids from the mask.
  void reindex();
  /// Alive positions in index order.
  std::vector<double> alive_positions() const;
};

/// Stratified inverse-CDF start (particle i at quantile (i + 0.5) / N), then the
/// initial cascade: absorb everything within profile.initial_physical_jump and
/// continue the empirical scan from there. Zero-mass profiles give an empty system.
ParticleState init(const SupercoolingProfile& profile, const PhysicalParams& p,
                   const SimConfig& cfg);

/// Particles absorbed by the initial cascade on sorted start positions.
std::size_t initial_absorbed(std::span<const double> sorted, double s0, double analytic_jump,
                             double front_step);

struct StepOutcome {
  double front_before = 0.0;
  std::size_t absorbed = 0;
  double jump = 0.0;  ///< front_step * absorbed
};

/// One Euler step with explicit draws: idio_draws[i] is the standard normal
/// of particle i (entries of dead particles are ignored); bridge_uniforms, if
/// non-empty, enables the Brownian-bridge crossing test. The absorption
/// cascade is the exact physical-jump scan.
StepOutcome step(ParticleState& state, double dW, std::span<const double> idio_draws,
                 const ReducedParams& p, double dt,
                 std::span<const double> bridge_uniforms = {});

struct JumpRecord {
  enum class Kind { initial, step };
  Kind kind = Kind::step;
  std::size_t step = 0;  ///< row index in the trajectory (0 for the initial cascade)
  double time = 0.0;
  double front_before = 0.0;
  double size = 0.0;  ///< front_step * absorbed
  std::size_t absorbed = 0;
  /// Alive positions just before absorption (after diffusion for step jumps,
  /// the stratified start for the initial one); empty if not retained.
  std::vector<double> prejump;
};

struct DensitySnapshot {
  double time = 0.0;
  double front = 0.0;
  double bin_width = 0.0;
  std::vector<double> density;  ///< supercooling density u on [front + j w, front + (j+1) w)
  double bin_left(std::size_t j) const { return front + static_cast<double>(j) * bin_width; }
};

/// Per-row moments of the alive measure used by the weak-form residual:
/// sums of m * f(x) over alive particles, plus the jump-correction sums
/// m * (f(front_before) - f(x)) over particles absorbed in (front_before, front]
/// during the step that produced the row.
struct MomentRow {
  double exp_neg = 0.0;
  double bump = 0.0;
  double bump_d1 = 0.0;
  double bump_d2 = 0.0;
  double corr_exp = 0.0;
  double corr_bump = 0.0;
};

struct Trajectory {
  PhysicalParams params;
  ReducedParams reduced;
  SupercoolingProfile profile;
  double total_mass = 0.0;
  std::size_t n_particles = 0;
  double mass_per_particle = 0.0;
  double front_step = 0.0;
  TimeGrid grid;
  std::uint64_t seed_common = 0;
  std::uint64_t seed_idio = 0;
  double blowup_threshold = 0.0;
  bool bridge_correction = true;
  std::size_t first_row = 0;  ///< grid index of row 0 (non-zero after a restart)

  std::vector<double> times;
  std::vector<double> front;
  std::vector<double> loss;
  std::vector<std::size_t> alive;
  std::vector<double> increment;  ///< front_step * absorbed in the step ending at the row
  std::vector<std::uint8_t> jump_flag;
  std::vector<JumpRecord> jumps;  ///< macroscopic jumps only
  std::vector<DensitySnapshot> snapshots;
  std::vector<double> dW;  ///< common increments of the steps covered by the rows
  std::vector<MomentRow> moments;
  /// Moments of the start measure before the initial cascade (fresh runs).
  MomentRow initial_moments;

  std::size_t rows() const { return times.size(); }
  double max_increment() const;
  /// Time of the first macroscopic jump, if any.
  std::optional<double> first_jump_time() const;
};

double default_blowup_threshold(double alpha, double front_step);

/// Particle engine over a fixed grid and noise path. Draws are counter based:
/// the idiosyncratic normal of particle i at grid step k is
/// rng::normal(seed_idio, idiosyncratic, k, i), so a restarted simulation
/// reuses exactly the draws of an uninterrupted one.
class Simulation {
 public:
  Simulation(const SupercoolingProfile& profile, const PhysicalParams& p, const SimConfig& cfg);

  /// Resumes from a saved state; throws std::invalid_argument if the state
  /// does not fit the configuration (particle count, grid position).
  static Simulation restart(ParticleState state, const SupercoolingProfile& profile,
                            const PhysicalParams& p, const SimConfig& cfg);

  /// Advances until `grid_step` steps are completed (clamped to the grid end).
  void run_until(std::size_t grid_step);
  void run() { run_until(grid_.n_steps); }

  const ParticleState& state() const { return state_; }
  const Trajectory& trajectory() const { return traj_; }
  Trajectory take_trajectory() { return std::move(traj_); }
  const NoisePath& noise() const { return noise_; }
  bool finished() const { return state_.step_index >= grid_.n_steps; }

 private:
  Simulation(ParticleState state, const SupercoolingProfile& profile, const PhysicalParams& p,
             const SimConfig& cfg, bool fresh);

  void advance();
  void record_row(double increment, bool macroscopic);
  void record_moments(double corr_exp, double corr_bump);
  void maybe_snapshot();

  SimConfig cfg_;
  PhysicalParams params_;
  ReducedParams reduced_;
  TimeGrid grid_;
  NoisePath noise_;
  ParticleState state_;
  Trajectory traj_;
  std::vector<std::size_t> snapshot_steps_;
  double span_ = 1.0;
  double window_ = 0.0;
  std::vector<std::uint32_t> candidates_;
};

/// Full run from the initial profile.
Trajectory run(const SupercoolingProfile& profile, const PhysicalParams& p, const SimConfig& cfg);

struct WilsonInterval {
  double lower = 0.0;
  double upper = 1.0;
};
/// 95% Wilson score interval for k successes out of n.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct ReplicaSummary {
  std::uint64_t seed_common = 0;
  std::uint64_t seed_idio = 0;
  std::size_t macroscopic_jumps = 0;
  double max_increment = 0.0;
  std::optional<double> first_jump_time;
  std::optional<std::size_t> first_jump_row;
  double final_front = 0.0;
};

struct BlowupEstimate {
  std::size_t replicas = 0;
  std::size_t jumping = 0;
  double jump_cutoff = 0.0;
  double p_hat = 0.0;
  WilsonInterval wilson;
  std::vector<double> first_jump_times;  ///< one per jumping replica, ascending
  std::vector<ReplicaSummary> per_replica;
};

/// Independent replicas with seeds derived from cfg.seed_common / cfg.seed_idio
/// and the replica index. A replica jumps if some step increment is >= jump_cutoff.
/// Results do not depend on the thread count.
BlowupEstimate monte_carlo_blowup(const SupercoolingProfile& profile, const PhysicalParams& p,
                                  const SimConfig& cfg, std::size_t n_replicas,
                                  double jump_cutoff, unsigned threads = 1);

}  // namespace stefan
