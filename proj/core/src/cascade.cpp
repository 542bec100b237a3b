#include "stefan/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stefan {

MassFunction MassFunction::from_profile(SupercoolingProfile profile, double base) {
  MassFunction m;
  m.base_ = base;
  m.data_ = std::move(profile);
  return m;
}

MassFunction MassFunction::empirical(std::vector<double> positions, double base,
                                     double front_step, double lambda_kappa) {
  if (!(front_step >= 0.0) || !(lambda_kappa > 0.0)) {
    throw std::invalid_argument("empirical mass function needs front_step >= 0 and lambda_kappa > 0");
  }
  std::sort(positions.begin(), positions.end());
  MassFunction m;
  m.base_ = base;
  m.data_ = Empirical{std::move(positions), front_step, lambda_kappa};
  return m;
}

std::size_t MassFunction::count_at_most(double x) const {
  const auto& e = std::get<Empirical>(data_);
  return static_cast<std::size_t>(std::upper_bound(e.sorted.begin(), e.sorted.end(), x) -
                                  e.sorted.begin());
}

double MassFunction::operator()(double y) const {
  if (const auto* p = std::get_if<SupercoolingProfile>(&data_)) {
    return p->mass(base_, base_ + y);
  }
  const auto& e = std::get<Empirical>(data_);
  return static_cast<double>(count_at_most(base_ + y)) * e.front_step * e.lambda_kappa;
}

double MassFunction::front_advance(double y, double lambda_kappa) const {
  if (const auto* p = std::get_if<SupercoolingProfile>(&data_)) {
    return p->mass(base_, base_ + y) / lambda_kappa;
  }
  return std::get<Empirical>(data_).front_step * static_cast<double>(count_at_most(base_ + y));
}

double MassFunction::total() const {
  if (const auto* p = std::get_if<SupercoolingProfile>(&data_)) {
    return p->mass(std::min(base_, p->support_end()), p->support_end());
  }
  const auto& e = std::get<Empirical>(data_);
  return static_cast<double>(e.sorted.size()) * e.front_step * e.lambda_kappa;
}

std::span<const double> MassFunction::sorted_positions() const {
  return std::get<Empirical>(data_).sorted;
}

double MassFunction::front_step() const { return std::get<Empirical>(data_).front_step; }

const SupercoolingProfile* MassFunction::profile() const {
  return std::get_if<SupercoolingProfile>(&data_);
}

std::size_t scan_absorbed(std::span<const double> sorted, double base, double front_step,
                          std::size_t start) {
  std::size_t k = start;
  while (k < sorted.size() && !(sorted[k] > base + front_step * static_cast<double>(k))) {
    ++k;
  }
  return k;
}

double physical_jump(const MassFunction& m, double lambda_kappa) {
  if (const auto* p = m.profile()) {
    return first_crossing(*p, m.base(), lambda_kappa);
  }
  const auto sorted = m.sorted_positions();
  const std::size_t k = scan_absorbed(sorted, m.base(), m.front_step());
  return m.front_step() * static_cast<double>(k);
}

CascadeResult cascade_epsilon(const MassFunction& m, double epsilon, double lambda_kappa,
                              const CascadeOptions& options) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("cascade_epsilon needs epsilon > 0");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("cascade_epsilon needs tol > 0");
  CascadeResult result;
  double z = epsilon;
  if (options.keep_trace) result.trace.push_back(z);
  while (result.iterations < options.max_iterations) {
    const double next = epsilon + m.front_advance(z, lambda_kappa);
    ++result.iterations;
    if (options.keep_trace) result.trace.push_back(next);
    const double increment = next - z;
    z = std::max(z, next);
    if (increment < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.offset = z;
  return result;
}

CascadeLimit cascade_limit(const MassFunction& m, double lambda_kappa,
                           std::span<const double> eps_sequence, const CascadeOptions& options) {
  if (eps_sequence.size() < 2) {
    throw std::invalid_argument("cascade_limit needs at least two epsilons");
  }
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    if (!(eps_sequence[i] > 0.0) || (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))) {
      throw std::invalid_argument("eps_sequence must be positive and strictly decreasing");
    }
  }
  CascadeLimit out;
  for (double eps : eps_sequence) {
    const auto r = cascade_epsilon(m, eps, lambda_kappa, options);
    if (!r.converged) {
      throw std::runtime_error("cascade_epsilon did not converge within the iteration cap");
    }
    out.epsilons.push_back(eps);
    out.offsets.push_back(r.offset);
  }
  const std::size_t n = out.offsets.size();
  const double e1 = out.epsilons[n - 2], e2 = out.epsilons[n - 1];
  const double z1 = out.offsets[n - 2], z2 = out.offsets[n - 1];
  const double slope = (z1 - z2) / (e1 - e2);
  out.limit = std::max(0.0, z2 - slope * e2);
  out.physical_jump = physical_jump(m, lambda_kappa);
  out.discrepancy = std::abs(out.limit - out.physical_jump);
  return out;
}

}  // namespace stefan
