#pragma once

#include <optional>
#include <string>

namespace stefan {

/// Physical constants of the supercooled Stefan problem with transport noise.
///
/// The equilibrium freezing temperature is fixed to zero; all temperatures
/// downstream are supercooling magnitudes u = -v >= 0.
struct PhysicalParams {
  double kappa = 0.5;   ///< thermal diffusivity, > 0
  double lambda = 1.0;  ///< latent-heat ratio, > 0
  double theta = 0.0;   ///< transport-noise strength, |theta| < sqrt(2 kappa)
  double s0 = 0.0;      ///< initial front position, >= 0

  static constexpr double v_f = 0.0;

  double lambda_kappa() const { return lambda * kappa; }
};

/// Correlation / volatility / feedback triple of the rescaled particle system.
struct ReducedParams {
  double rho = 0.0;    ///< theta / sqrt(2 kappa), |rho| < 1
  double sigma = 1.0;  ///< sqrt(2 kappa)
  double alpha = 0.0;  ///< total_mass / (lambda kappa), maximal front advance

  double idiosyncratic_vol() const;  ///< sigma * sqrt(1 - rho^2)
  double common_vol() const { return sigma * rho; }

  /// Inverse of reduce() for the diffusion part: (kappa, theta).
  double kappa() const { return 0.5 * sigma * sigma; }
  double theta() const { return rho * sigma; }
};

struct ValidationError {
  std::string constraint;  ///< short name of the violated invariant
  std::string message;
};

/// Checks the invariants of PhysicalParams in a fixed order and reports the
/// first one that fails.
std::optional<ValidationError> validate(const PhysicalParams& p);

/// Throws std::invalid_argument if validate(p) fails or total_mass < 0.
ReducedParams reduce(const PhysicalParams& p, double total_mass);

}  // namespace stefan
