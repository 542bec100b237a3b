#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stefan/particle.hpp"
#include "stefan/test_functions.hpp"

namespace stefan {

struct CheckResult {
  std::string name;
  bool pass = true;
  bool hard = true;  ///< informational checks never fail a report
  double value = 0.0;
  double tolerance = 0.0;
  std::optional<double> worst_time;
  std::string detail;
};

struct DiagnosticsReport {
  std::vector<CheckResult> checks;
  bool passed() const;  ///< all hard checks pass
  const CheckResult* find(const std::string& name) const;
};

struct EnergyResidual {
  double value = 0.0;
  double worst_time = 0.0;
};

/// max over rows of |lambda kappa (s(t) - s0) - (m N - m alive(t))|.
EnergyResidual energy_balance_residual(const Trajectory& traj);
CheckResult energy_balance_check(const Trajectory& traj, double rel_tol = 1e-10);

struct WeakFormResidual {
  double value = 0.0;
  double worst_time = 0.0;
  /// Terms at the worst time: lhs, d/dt, kappa phi_xx, theta phi_x dW, front integral, jump correction.
  double lhs = 0.0, time_term = 0.0, diffusion_term = 0.0, noise_term = 0.0, front_term = 0.0,
         correction_term = 0.0;
};

/// Weak formulation with jumps, assembled from the recorded per-row moments
/// with left-point sums against the recorded dW. Needs a fresh (not restarted)
/// trajectory; any phi other than `one` needs recorded moments. Throws
/// std::invalid_argument if the required data are missing.
WeakFormResidual weak_form_residual(const Trajectory& traj, TestFunction phi);

struct DensityBound {
  double time = 0.0;
  double max_density = 0.0;    ///< histogram max of u / A
  double bound = 0.0;          ///< 1 / sqrt(2 pi sigma^2 (1 - |rho|) t)
  double tight_bound = 0.0;    ///< 1 / sqrt(2 pi sigma^2 (1 - rho^2) t), informative
  double allowance = 0.0;      ///< 3 sqrt(bound / (N bin_width))
  bool pass = true;
};

/// Checks the snapshot at (or nearest to) time t. Throws std::invalid_argument
/// for t <= 0 or a missing snapshot.
DensityBound density_bound_check(const Trajectory& traj, double t);
DensityBound density_bound_check(const Trajectory& traj, const DensitySnapshot& snap);

/// alpha^2 / (2 pi sigma^2 (1 - |rho|)).
double late_jump_time(const ReducedParams& p);
CheckResult no_late_jump_check(const Trajectory& traj, const ReducedParams& p);

/// Recomputes every recorded jump from its pre-jump measure and requires
/// bitwise equality. Missing pre-jump data fails the check.
CheckResult jump_minimality_check(const Trajectory& traj);

struct RegimeReport {
  bool subcritical = false;    ///< sup u0 < lambda kappa
  bool supercritical = false;  ///< some piece value > lambda kappa
  bool stable_start = false;   ///< u0 <= lambda kappa next to s0 and stability holds
  std::size_t replicas = 0;
  std::size_t jumping = 0;
  WilsonInterval wilson;
  double jump_free_fraction = 0.0;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Regime assertions over an ensemble of independent-W replicas.
RegimeReport threshold_regime_check(const SupercoolingProfile& profile, const PhysicalParams& p,
                                    const BlowupEstimate& ensemble);

struct DiagnosticsOptions {
  double energy_rel_tol = 1e-10;
  bool density = true;
  bool weak_form = true;
};

/// All checks applicable to one trajectory.
DiagnosticsReport run_diagnostics(const Trajectory& traj, const DiagnosticsOptions& opts = {});

}  // namespace stefan
