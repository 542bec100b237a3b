#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stefan {

/// One constant piece of the supercooling density: value on (previous right end, right].
struct ProfilePiece {
  double right = 0.0;
  double value = 0.0;
};

/// Initial supercooling density u0 = -v0 >= 0 on [s0, last breakpoint],
/// piecewise constant. Pieces are contiguous, the first one starts at s0.
class SupercoolingProfile {
 public:
  SupercoolingProfile() = default;

  /// Throws std::invalid_argument on non-increasing breakpoints, breakpoints
  /// not above s0, or negative / non-finite values.
  SupercoolingProfile(double origin, std::vector<ProfilePiece> pieces);

  /// Convenience for a single constant piece on (origin, origin + width).
  static SupercoolingProfile constant(double origin, double width, double value);

  double origin() const { return origin_; }
  std::span<const ProfilePiece> pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  double left(std::size_t i) const { return i == 0 ? origin_ : pieces_[i - 1].right; }
  double support_end() const { return pieces_.empty() ? origin_ : pieces_.back().right; }

  double total_mass() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double sup_norm() const { return sup_norm_; }
  double density(double x) const;

  /// Mass on (-inf, x].
  double cdf(double x) const;

  /// Exact integral over [a, b]. Throws std::invalid_argument if a > b.
  double mass(double a, double b) const;

  /// Smallest x with mass(origin, x) >= q * total_mass. Throws
  /// std::invalid_argument for q outside [0, 1] or a zero-mass profile.
  double quantile(double q) const;

 private:
  std::size_t piece_index(double x) const;  ///< first piece with right >= x

  double origin_ = 0.0;
  std::vector<ProfilePiece> pieces_;
  std::vector<double> cumulative_;  ///< mass on [origin, pieces_[i].right]
  double sup_norm_ = 0.0;
};

enum class Stability { stable, unstable };

/// Whether (1/lambda_kappa) * mass(s0, s0 + y) < y infinitely often as y -> 0.
/// For piecewise-constant profiles this is decided by the first piece of
/// positive length: value < lambda_kappa (or no mass near s0) means stable.
Stability stability_check(const SupercoolingProfile& p, double lambda_kappa);

/// inf{ y > 0 : mass(base, base + y) / lambda_kappa < y }, solved exactly on
/// the piecewise-linear cumulative mass. Ties (equality) do not satisfy the
/// strict inequality.
double first_crossing(const SupercoolingProfile& p, double base, double lambda_kappa);

/// first_crossing() at base = s0: the minimal admissible initial front jump.
double initial_physical_jump(const SupercoolingProfile& p, double lambda_kappa);

}  // namespace stefan
