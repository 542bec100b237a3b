#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "stefan/profile.hpp"

namespace stefan {

/// Left-limit mass measure seen from the current front: y -> nu(t-, [base, base + y]).
///
/// Either backed by a piecewise-constant profile (exact, continuous) or by
/// sorted particle positions carrying equal mass. Particles at or below the
/// base count towards every m(y), y >= 0.
class MassFunction {
 public:
  /// Profile-backed measure: m(y) = profile.mass(base, base + y).
  static MassFunction from_profile(SupercoolingProfile profile, double base);

  /// Empirical measure with `front_step` = particle mass / lambda_kappa, the
  /// front advance caused by absorbing one particle. Positions need not be sorted.
  static MassFunction empirical(std::vector<double> positions, double base, double front_step,
                                double lambda_kappa);

  double base() const { return base_; }
  bool is_empirical() const { return std::holds_alternative<Empirical>(data_); }

  /// Mass on [base, base + y] for y >= 0.
  double operator()(double y) const;
  /// m(y) / lambda_kappa without the extra rounding of a division for the empirical case.
  double front_advance(double y, double lambda_kappa) const;
  double total() const;

  /// Only valid for empirical measures.
  std::span<const double> sorted_positions() const;
  double front_step() const;

  const SupercoolingProfile* profile() const;

 private:
  struct Empirical {
    std::vector<double> sorted;
    double front_step = 0.0;
    double lambda_kappa = 1.0;
  };
  MassFunction() = default;

  std::size_t count_at_most(double x) const;

  double base_ = 0.0;
  std::variant<SupercoolingProfile, Empirical> data_;
};

/// Number of particles absorbed by the physical cascade on sorted positions:
/// min{ k >= start : k == n  or  sorted[k] > base + front_step * k }.
/// One left-to-right pass; the same routine drives the particle engine.
std::size_t scan_absorbed(std::span<const double> sorted, double base, double front_step,
                          std::size_t start = 0);

/// inf{ y > 0 : m(y) / lambda_kappa < y }. For empirical measures this is
/// front_step * scan_absorbed(...); when the inequality never holds before the
/// mass is exhausted, the total-absorption jump is returned.
double physical_jump(const MassFunction& m, double lambda_kappa);

struct CascadeOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
  bool keep_trace = false;
};

struct CascadeResult {
  double offset = 0.0;  ///< frozen-interval length s(t; eps) - s(t-)
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< iterates z_0, z_1, ... when requested
};

/// Vanishing-external-heat cascade: z_0 = eps, z_{n+1} = eps + m(z_n) / lambda_kappa,
/// iterated until the increment drops below the tolerance. The iterates
/// increase monotonically to the least fixed point above eps.
CascadeResult cascade_epsilon(const MassFunction& m, double epsilon, double lambda_kappa,
                              const CascadeOptions& options = {});

struct CascadeLimit {
  std::vector<double> epsilons;
  std::vector<double> offsets;
  double limit = 0.0;           ///< linear extrapolation of the last two points to eps = 0
  double physical_jump = 0.0;
  double discrepancy = 0.0;     ///< |limit - physical_jump|
};

/// Runs cascade_epsilon along a strictly decreasing sequence and extrapolates
/// to eps = 0. Throws std::invalid_argument on a bad sequence and
/// std::runtime_error if any cascade fails to converge.
CascadeLimit cascade_limit(const MassFunction& m, double lambda_kappa,
                           std::span<const double> eps_sequence,
                           const CascadeOptions& options = {});

}  // namespace stefan
