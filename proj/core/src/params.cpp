#include "stefan/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stefan {

double ReducedParams::idiosyncratic_vol() const {
  return sigma * std::sqrt(1.0 - rho * rho);
}

namespace {

ValidationError make_error(std::string constraint, double value, const char* rule) {
  std::ostringstream os;
  os.precision(17);
  os << constraint << " = " << value << " violates " << rule;
  return {std::move(constraint), os.str()};
}

}  // namespace

std::optional<ValidationError> validate(const PhysicalParams& p) {
  if (!std::isfinite(p.kappa) || !(p.kappa > 0.0)) {
    return make_error("kappa", p.kappa, "kappa > 0");
  }
  if (!std::isfinite(p.lambda) || !(p.lambda > 0.0)) {
    return make_error("lambda", p.lambda, "lambda > 0");
  }
  if (!std::isfinite(p.s0) || !(p.s0 >= 0.0)) {
    return make_error("s0", p.s0, "s0 >= 0");
  }
  if (!std::isfinite(p.theta) || !(std::abs(p.theta) < std::sqrt(2.0 * p.kappa))) {
    auto err = make_error("parabolicity", p.theta, "|theta| < sqrt(2 kappa)");
    std::ostringstream os;
    os.precision(17);
    os << " (sqrt(2 kappa) = " << std::sqrt(2.0 * p.kappa) << ")";
    err.message += os.str();
    return err;
  }
  return std::nullopt;
}

ReducedParams reduce(const PhysicalParams& p, double total_mass) {
  if (auto err = validate(p)) {
    throw std::invalid_argument(err->message);
  }
  if (!std::isfinite(total_mass) || total_mass < 0.0) {
    throw std::invalid_argument("total_mass must be finite and non-negative");
  }
  const double sigma = std::sqrt(2.0 * p.kappa);
  return ReducedParams{p.theta / sigma, sigma, total_mass / (p.lambda * p.kappa)};
}

}  // namespace stefan
