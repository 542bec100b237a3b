#include "stefan/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stefan {

SupercoolingProfile::SupercoolingProfile(double origin, std::vector<ProfilePiece> pieces)
    : origin_(origin), pieces_(std::move(pieces)) {
  if (!std::isfinite(origin_)) {
    throw std::invalid_argument("profile origin must be finite");
  }
  double prev = origin_;
  double running = 0.0;
  cumulative_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& piece = pieces_[i];
    if (!std::isfinite(piece.right) || !(piece.right > prev)) {
      throw std::invalid_argument("profile breakpoint " + std::to_string(i) +
                                  " must be finite and strictly increasing from s0");
    }
    if (!std::isfinite(piece.value) || piece.value < 0.0) {
      throw std::invalid_argument("profile value " + std::to_string(i) +
                                  " must be finite and non-negative");
    }
    running += piece.value * (piece.right - prev);
    cumulative_.push_back(running);
    sup_norm_ = std::max(sup_norm_, piece.value);
    prev = piece.right;
  }
}

SupercoolingProfile SupercoolingProfile::constant(double origin, double width, double value) {
  return SupercoolingProfile(origin, {{origin + width, value}});
}

std::size_t SupercoolingProfile::piece_index(double x) const {
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                             [](const ProfilePiece& p, double v) { return p.right < v; });
  return static_cast<std::size_t>(it - pieces_.begin());
}

double SupercoolingProfile::density(double x) const {
  if (x <= origin_ || pieces_.empty() || x > support_end()) return 0.0;
  return pieces_[piece_index(x)].value;
}

double SupercoolingProfile::cdf(double x) const {
  if (pieces_.empty() || x <= origin_) return 0.0;
  if (x >= support_end()) return total_mass();
  const std::size_t i = piece_index(x);
  const double before = i == 0 ? 0.0 : cumulative_[i - 1];
  if (x == pieces_[i].right) return cumulative_[i];
  return before + pieces_[i].value * (x - left(i));
}

double SupercoolingProfile::mass(double a, double b) const {
  if (a > b) throw std::invalid_argument("mass(a, b) requires a <= b");
  return cdf(b) - cdf(a);
}

double SupercoolingProfile::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  const double total = total_mass();
  if (!(total > 0.0)) throw std::invalid_argument("quantile of a zero-mass profile");
  const double target = q * total;
  if (target <= 0.0) return origin_;
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) return support_end();
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  const double before = i == 0 ? 0.0 : cumulative_[i - 1];
  // target > before, so the piece has positive value
  const double x = left(i) + (target - before) / pieces_[i].value;
  return std::min(x, pieces_[i].right);
}

Stability stability_check(const SupercoolingProfile& p, double lambda_kappa) {
  for (const auto& piece : p.pieces()) {
    // pieces have positive length by construction, so the first one decides
    return piece.value < lambda_kappa ? Stability::stable : Stability::unstable;
  }
  return Stability::stable;
}

double first_crossing(const SupercoolingProfile& p, double base, double lambda_kappa) {
  if (!(lambda_kappa > 0.0)) throw std::invalid_argument("lambda_kappa must be positive");
  // gap(y) = y - mass(base, base + y) / lambda_kappa is continuous, piecewise
  // linear, gap(0) = 0; we want inf{ y > 0 : gap(y) > 0 }.
  double y = 0.0;
  double gap = 0.0;
  const auto pieces = p.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double right = pieces[i].right;
    if (right <= base) continue;
    const double lo = std::max(p.left(i), base) - base;
    const double hi = right - base;
    if (lo > y) {
      // zero density between y and lo: slope 1
      if (gap > 0.0) return y;
      if (gap + (lo - y) > 0.0) return y - gap;
      gap += lo - y;
      y = lo;
    }
    const double slope = 1.0 - pieces[i].value / lambda_kappa;
    if (slope > 0.0) {
      if (gap >= 0.0) return y;
      const double cross = y + (-gap) / slope;
      if (cross < hi) return cross;
    }
    gap += slope * (hi - y);
    y = hi;
  }
  return y + std::max(-gap, 0.0);
}

double initial_physical_jump(const SupercoolingProfile& p, double lambda_kappa) {
  return first_crossing(p, p.origin(), lambda_kappa);
}

}  // namespace stefan
