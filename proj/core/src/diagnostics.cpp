#include "stefan/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stefan/cascade.hpp"

namespace stefan {

bool DiagnosticsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass || !c.hard; });
}

const CheckResult* DiagnosticsReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

EnergyResidual energy_balance_residual(const Trajectory& traj) {
  EnergyResidual r;
  const double lk = traj.params.lambda_kappa();
  const double m = traj.mass_per_particle;
  const double total = m * static_cast<double>(traj.n_particles);
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    const double absorbed = total - m * static_cast<double>(traj.alive[k]);
    const double e = std::abs(lk * (traj.front[k] - traj.params.s0) - absorbed);
    if (e > r.value) {
      r.value = e;
      r.worst_time = traj.times[k];
    }
  }
  return r;
}

CheckResult energy_balance_check(const Trajectory& traj, double rel_tol) {
  const auto r = energy_balance_residual(traj);
  CheckResult c;
  c.name = "energy_balance";
  c.value = r.value;
  c.tolerance = rel_tol * traj.total_mass;
  c.pass = r.value <= c.tolerance;
  c.worst_time = r.worst_time;
  return c;
}

namespace {

struct PhiTerms {
  std::function<double(std::size_t)> value;    // <nu_k, phi(t_k)>
  std::function<double(std::size_t)> d_t;      // <nu_k, d/dt phi(t_k)>
  std::function<double(std::size_t)> d_xx;     // <nu_k, phi_xx(t_k)>
  std::function<double(std::size_t)> d_x;     // <nu_k, phi_x(t_k)>
  std::function<double(double, double)> at;    // phi(r, x)
  std::function<double(std::size_t)> correction;
  double initial = 0.0;                        // <nu_{0-}, phi(0)>
};

PhiTerms make_terms(const Trajectory& traj, TestFunction phi) {
  const double m = traj.mass_per_particle;
  const auto& mo = traj.moments;
  const auto& t = traj.times;
  PhiTerms p;
  auto zero = [](std::size_t) { return 0.0; };
  switch (phi) {
    case TestFunction::one:
      p.value = [&traj, m](std::size_t k) { return m * static_cast<double>(traj.alive[k]); };
      p.d_t = p.d_xx = p.d_x = p.correction = zero;
      p.at = [](double, double) { return 1.0; };
      p.initial = m * static_cast<double>(traj.n_particles);
      break;
    case TestFunction::exp_neg:
      p.value = [&mo](std::size_t k) { return mo[k].exp_neg; };
      p.d_t = zero;
      p.d_xx = p.value;
      p.d_x = [&mo](std::size_t k) { return -mo[k].exp_neg; };
      p.at = [](double, double x) { return std::exp(-x); };
      p.correction = [&mo](std::size_t k) { return mo[k].corr_exp; };
      p.initial = traj.initial_moments.exp_neg;
      break;
    case TestFunction::cos_bump:
      p.value = [&mo](std::size_t k) { return mo[k].bump; };
      p.d_t = zero;
      p.d_xx = [&mo](std::size_t k) { return mo[k].bump_d2; };
      p.d_x = [&mo](std::size_t k) { return mo[k].bump_d1; };
      p.at = [](double, double x) { return cos_bump(x).g; };
      p.correction = [&mo](std::size_t k) { return mo[k].corr_bump; };
      p.initial = traj.initial_moments.bump;
      break;
    case TestFunction::exp_time_exp:
      p.value = [&mo, &t](std::size_t k) { return std::exp(-t[k]) * mo[k].exp_neg; };
      p.d_t = [&mo, &t](std::size_t k) { return -std::exp(-t[k]) * mo[k].exp_neg; };
      p.d_xx = p.value;
      p.d_x = p.d_t;
      p.at = [](double r, double x) { return std::exp(-r) * std::exp(-x); };
      p.correction = [&mo, &t](std::size_t k) { return std::exp(-t[k]) * mo[k].corr_exp; };
      p.initial = traj.initial_moments.exp_neg;
      break;
  }
  return p;
}

}  // namespace

WeakFormResidual weak_form_residual(const Trajectory& traj, TestFunction phi) {
  if (traj.first_row != 0) {
    throw std::invalid_argument("weak-form residual needs a trajectory starting at t = 0");
  }
  if (phi != TestFunction::one && traj.moments.size() != traj.rows()) {
    throw std::invalid_argument("weak-form residual for " + std::string(name(phi)) +
                                " needs recorded moments");
  }
  if (traj.dW.size() + 1 != traj.rows()) {
    throw std::invalid_argument("trajectory noise does not cover its rows");
  }
  const PhiTerms p = make_terms(traj, phi);
  const double dt = traj.grid.dt;
  const double kappa = traj.params.kappa;
  const double theta = traj.params.theta;
  const double lk = traj.params.lambda_kappa();
  const double s0 = traj.params.s0;
  const auto& S = traj.front;
  const auto& t = traj.times;

  WeakFormResidual out;
  double time_sum = 0.0, diff_sum = 0.0, noise_sum = 0.0, corr_sum = 0.0;
  // Front integral by parts: sum_j phi'_j (S_j - S_{j-1}) with S_{-1} = s0 and
  // phi'_j = phi(t_j, S_{j-1}); equals phi'_n S_n - phi'_0 s0 + sum_{j<n} S_j (phi'_j - phi'_{j+1}).
  const double phi_first = p.at(t[0], s0);
  double parts = 0.0;
  double phi_prev = phi_first;
  for (std::size_t n = 0; n < traj.rows(); ++n) {
    if (n > 0) {
      const std::size_t k = n - 1;
      time_sum += p.d_t(k) * dt;
      diff_sum += p.d_xx(k) * dt;
      noise_sum += p.d_x(k) * traj.dW[k];
      const double phi_n = p.at(t[n], S[n - 1]);
      parts += S[n - 1] * (phi_prev - phi_n);
      phi_prev = phi_n;
    }
    corr_sum += p.correction(n);
    const double front_term = phi_prev * S[n] - phi_first * s0 + parts;
    const double lhs = p.value(n) - p.initial;
    const double rhs = time_sum + kappa * diff_sum + theta * noise_sum - lk * front_term + corr_sum;
    const double r = std::abs(lhs - rhs);
    if (n == 0 || r > out.value) {
      out.value = r;
      out.worst_time = t[n];
      out.lhs = lhs;
      out.time_term = time_sum;
      out.diffusion_term = kappa * diff_sum;
      out.noise_term = theta * noise_sum;
      out.front_term = -lk * front_term;
      out.correction_term = corr_sum;
    }
  }
  return out;
}

DensityBound density_bound_check(const Trajectory& traj, const DensitySnapshot& snap) {
  if (!(snap.time > 0.0)) {
    throw std::invalid_argument("density bound is vacuous at t = 0");
  }
  DensityBound d;
  d.time = snap.time;
  const double A = traj.total_mass;
  for (double u : snap.density) d.max_density = std::max(d.max_density, A > 0.0 ? u / A : 0.0);
  const double s2 = traj.reduced.sigma * traj.reduced.sigma;
  const double rho = traj.reduced.rho;
  d.bound = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2 * (1.0 - std::abs(rho)) * snap.time);
  d.tight_bound = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2 * (1.0 - rho * rho) * snap.time);
  const double n = std::max<double>(1.0, static_cast<double>(traj.n_particles));
  d.allowance = 3.0 * std::sqrt(d.bound / (n * snap.bin_width));
  d.pass = d.max_density <= d.bound + d.allowance;
  return d;
}

DensityBound density_bound_check(const Trajectory& traj, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("density bound is vacuous at t = 0");
  const DensitySnapshot* best = nullptr;
  for (const auto& s : traj.snapshots) {
    if (!best || std::abs(s.time - t) < std::abs(best->time - t)) best = &s;
  }
  if (!best || std::abs(best->time - t) > 0.5 * traj.grid.dt) {
    throw std::invalid_argument("no density snapshot at the requested time");
  }
  return density_bound_check(traj, *best);
}

double late_jump_time(const ReducedParams& p) {
  return p.alpha * p.alpha /
         (2.0 * std::numbers::pi * p.sigma * p.sigma * (1.0 - std::abs(p.rho)));
}

CheckResult no_late_jump_check(const Trajectory& traj, const ReducedParams& p) {
  CheckResult c;
  c.name = "no_late_jump";
  c.tolerance = late_jump_time(p);
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    if (traj.jump_flag[k] && traj.times[k] > c.tolerance) {
      c.pass = false;
      if (!c.worst_time) c.worst_time = traj.times[k];
      c.value = std::max(c.value, traj.times[k]);
    }
  }
  for (const auto& j : traj.jumps) {
    if (j.time > c.tolerance) {
      c.pass = false;
      if (!c.worst_time) c.worst_time = j.time;
      c.value = std::max(c.value, j.time);
    }
  }
  std::ostringstream os;
  os << "t* = " << c.tolerance;
  c.detail = os.str();
  return c;
}

CheckResult jump_minimality_check(const Trajectory& traj) {
  CheckResult c;
  c.name = "jump_minimality";
  const double lk = traj.params.lambda_kappa();
  std::ostringstream detail;
  std::size_t checked = 0;
  for (const auto& j : traj.jumps) {
    if (j.prejump.empty()) {
      c.pass = false;
      detail << "jump at t=" << j.time << " has no pre-jump measure; ";
      continue;
    }
    double expected = 0.0;
    if (j.kind == JumpRecord::Kind::initial) {
      std::vector<double> sorted = j.prejump;
      std::sort(sorted.begin(), sorted.end());
      const double J = initial_physical_jump(traj.profile, lk);
      expected = traj.front_step *
                 static_cast<double>(initial_absorbed(sorted, j.front_before, J, traj.front_step));
    } else {
      const auto m = MassFunction::empirical(j.prejump, j.front_before, traj.front_step, lk);
      expected = physical_jump(m, lk);
    }
    ++checked;
    const double excess = j.size - expected;
    if (excess != 0.0) {
      c.pass = false;
      c.value = std::max(c.value, std::abs(excess));
      if (!c.worst_time) c.worst_time = j.time;
      detail << "jump at t=" << j.time << (excess > 0 ? " exceeds" : " undershoots")
             << " the physical jump by " << std::abs(excess) << "; ";
    }
    if (j.step < traj.rows() && traj.increment[j.step] != j.size) {
      c.pass = false;
      detail << "row " << j.step << " increment disagrees with its jump record; ";
    }
  }
  detail << checked << " jump(s) recomputed";
  c.detail = detail.str();
  return c;
}

bool RegimeReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass || !c.hard; });
}

RegimeReport threshold_regime_check(const SupercoolingProfile& profile, const PhysicalParams& p,
                                    const BlowupEstimate& ensemble) {
  RegimeReport r;
  const double lk = p.lambda_kappa();
  r.subcritical = profile.sup_norm() < lk;
  for (const auto& piece : profile.pieces()) r.supercritical = r.supercritical || piece.value > lk;
  r.stable_start = stability_check(profile, lk) == Stability::stable;
  r.replicas = ensemble.replicas;
  r.jumping = ensemble.jumping;
  r.wilson = ensemble.wilson;
  r.jump_free_fraction =
      ensemble.replicas == 0
          ? 0.0
          : static_cast<double>(ensemble.replicas - ensemble.jumping) / ensemble.replicas;

  if (r.subcritical) {
    CheckResult c;
    c.name = "no_jumps_subcritical";
    c.value = static_cast<double>(ensemble.jumping);
    c.pass = ensemble.jumping == 0;
    r.checks.push_back(c);
  }
  if (r.supercritical) {
    CheckResult c;
    c.name = "blowup_positive_probability";
    c.value = ensemble.wilson.lower;
    c.pass = ensemble.wilson.lower > 0.0;
    std::ostringstream os;
    os << ensemble.jumping << "/" << ensemble.replicas << " replicas jump, Wilson 95% ["
       << ensemble.wilson.lower << ", " << ensemble.wilson.upper << "]";
    c.detail = os.str();
    r.checks.push_back(c);
  }
  if (r.stable_start) {
    CheckResult c;
    c.name = "no_jump_at_first_step";
    std::size_t early = 0;
    for (const auto& s : ensemble.per_replica) {
      if (s.first_jump_row && *s.first_jump_row <= 1) ++early;
    }
    c.value = static_cast<double>(early);
    c.pass = early == 0;
    r.checks.push_back(c);

    CheckResult f;
    f.name = "jump_free_fraction_positive";
    f.value = r.jump_free_fraction;
    f.pass = r.jump_free_fraction > 0.0;
    r.checks.push_back(f);
  }
  return r;
}

DiagnosticsReport run_diagnostics(const Trajectory& traj, const DiagnosticsOptions& opts) {
  DiagnosticsReport rep;
  rep.checks.push_back(energy_balance_check(traj, opts.energy_rel_tol));
  rep.checks.push_back(jump_minimality_check(traj));
  rep.checks.push_back(no_late_jump_check(traj, traj.reduced));
  if (opts.weak_form && traj.first_row == 0 && traj.dW.size() + 1 == traj.rows()) {
    for (auto phi : kAllTestFunctions) {
      if (phi != TestFunction::one && traj.moments.size() != traj.rows()) continue;
      const auto w = weak_form_residual(traj, phi);
      CheckResult c;
      c.name = "weak_form_" + std::string(name(phi));
      c.value = w.value;
      c.worst_time = w.worst_time;
      if (phi == TestFunction::one) {
        c.tolerance = opts.energy_rel_tol * traj.total_mass;
        c.pass = w.value <= c.tolerance;
      } else {
        c.hard = false;
        c.detail = "informational; converges like dt + N^-1/2";
      }
      rep.checks.push_back(c);
    }
  }
  if (opts.density) {
    for (const auto& s : traj.snapshots) {
      if (!(s.time > 0.0)) continue;
      const auto d = density_bound_check(traj, s);
      CheckResult c;
      std::ostringstream os;
      os << "density_bound_t" << s.time;
      c.name = os.str();
      c.value = d.max_density;
      c.tolerance = d.bound + d.allowance;
      c.worst_time = s.time;
      c.pass = d.pass;
      std::ostringstream det;
      det << "bound " << d.bound << ", allowance " << d.allowance << ", tighter bound "
          << d.tight_bound;
      c.detail = det.str();
      rep.checks.push_back(c);
    }
  }
  return rep;
}

}  // namespace stefan
