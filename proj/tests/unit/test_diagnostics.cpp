#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stefan/diagnostics.hpp"

using namespace stefan;

namespace {

Trajectory jumping_run(bool moments = true) {
  const PhysicalParams p{0.5, 1.0, 0.5, 0.0};
  const SupercoolingProfile u(0.0, {{0.5, 0.25}, {1.0, 1.0}});
  SimConfig cfg;
  cfg.n_particles = 5000;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.seed_common = 3;
  cfg.seed_idio = 4;
  cfg.record_moments = moments;
  cfg.snapshot_times = {0.1, 0.3};
  return run(u, p, cfg);
}

Trajectory initial_jump_run() {
  const PhysicalParams p{0.5, 1.0, 0.0, 0.0};
  SimConfig cfg;
  cfg.n_particles = 4000;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  cfg.record_moments = true;
  return run(SupercoolingProfile::constant(0.0, 0.3, 1.0), p, cfg);
}

}  // namespace

TEST(Diagnostics, CleanRunPassesEveryHardCheck) {
  const auto t = jumping_run();
  const auto rep = run_diagnostics(t);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass || !c.hard) << c.name << " " << c.detail;
  EXPECT_TRUE(rep.passed());
  EXPECT_NE(rep.find("energy_balance"), nullptr);
  EXPECT_NE(rep.find("jump_minimality"), nullptr);
  EXPECT_EQ(rep.find("nonexistent"), nullptr);
}

TEST(Diagnostics, WeakFormWithOneIsTheEnergyResidual) {
  for (const auto& t : {jumping_run(), initial_jump_run()}) {
    EXPECT_EQ(weak_form_residual(t, TestFunction::one).value, energy_balance_residual(t).value);
  }
}

TEST(Diagnostics, InitialCascadeIsRecordedAndMinimal) {
  const auto t = initial_jump_run();
  ASSERT_FALSE(t.jumps.empty());
  EXPECT_EQ(t.jumps[0].kind, JumpRecord::Kind::initial);
  EXPECT_NEAR(t.jumps[0].size, 0.6, 2.0 * t.front_step);
  EXPECT_TRUE(jump_minimality_check(t).pass);
}

TEST(Diagnostics, SmoothWeakFormIsSmall) {
  const auto t = jumping_run();
  for (auto phi : {TestFunction::exp_neg, TestFunction::cos_bump, TestFunction::exp_time_exp}) {
    EXPECT_LT(weak_form_residual(t, phi).value, 0.05 * t.total_mass) << name(phi);
  }
}

TEST(Diagnostics, WeakFormNeedsMoments) {
  const auto t = jumping_run(false);
  EXPECT_NO_THROW(weak_form_residual(t, TestFunction::one));
  EXPECT_THROW(weak_form_residual(t, TestFunction::exp_neg), std::invalid_argument);
}

TEST(Diagnostics, TamperedFrontFailsEnergy) {
  auto t = jumping_run();
  t.front[t.rows() / 2] += 1e-6;
  EXPECT_FALSE(energy_balance_check(t).pass);
  EXPECT_FALSE(run_diagnostics(t).passed());
}

TEST(Diagnostics, TamperedJumpFailsMinimality) {
  auto t = jumping_run();
  ASSERT_FALSE(t.jumps.empty());
  t.jumps[0].size += t.front_step;
  EXPECT_FALSE(jump_minimality_check(t).pass);
  auto u = jumping_run();
  u.jumps[0].prejump.clear();
  EXPECT_FALSE(jump_minimality_check(u).pass);
}

TEST(Diagnostics, InflatedDensityFailsBound) {
  auto t = jumping_run();
  ASSERT_EQ(t.snapshots.size(), 2u);
  EXPECT_TRUE(density_bound_check(t, 0.1).pass);
  t.snapshots[0].density[3] = 10.0 * t.total_mass;
  EXPECT_FALSE(density_bound_check(t, 0.1).pass);
  EXPECT_THROW(density_bound_check(t, 0.0), std::invalid_argument);
}

TEST(Diagnostics, DensityBoundFormula) {
  const auto t = jumping_run();
  const auto d = density_bound_check(t, 0.3);
  const double s2 = t.reduced.sigma * t.reduced.sigma;
  EXPECT_NEAR(d.bound, 1.0 / std::sqrt(2.0 * M_PI * s2 * 0.5 * 0.3), 1e-12);
  EXPECT_NEAR(d.tight_bound, 1.0 / std::sqrt(2.0 * M_PI * s2 * 0.75 * 0.3), 1e-12);
  EXPECT_LE(d.tight_bound, d.bound);
}

TEST(Diagnostics, LateJumpWindow) {
  const ReducedParams rp{0.5, 1.0, 1.0};
  EXPECT_NEAR(late_jump_time(rp), 1.0 / (2.0 * M_PI * 0.5), 1e-15);
  auto t = jumping_run();
  EXPECT_TRUE(no_late_jump_check(t, t.reduced).pass);
  JumpRecord late;
  late.time = 10.0;
  late.size = 0.5;
  t.jumps.push_back(late);
  EXPECT_FALSE(no_late_jump_check(t, t.reduced).pass);
}

TEST(Diagnostics, ChecksAreDeterministic) {
  const auto t = jumping_run();
  const auto a = run_diagnostics(t);
  const auto b = run_diagnostics(t);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].value, b.checks[i].value);
    EXPECT_EQ(a.checks[i].pass, b.checks[i].pass);
  }
}

TEST(Diagnostics, RegimeChecksOnSyntheticEnsembles) {
  const PhysicalParams p{0.5, 1.0, 0.5, 0.0};
  const double lk = p.lambda_kappa();
  const SupercoolingProfile sub = SupercoolingProfile::constant(0.0, 1.0, 0.8 * lk);
  BlowupEstimate quiet;
  quiet.replicas = 20;
  quiet.per_replica.resize(20);
  quiet.wilson = wilson_interval(0, 20);
  const auto ok = threshold_regime_check(sub, p, quiet);
  EXPECT_TRUE(ok.subcritical);
  EXPECT_TRUE(ok.passed());

  auto noisy = quiet;
  noisy.jumping = 1;
  noisy.per_replica[0].macroscopic_jumps = 1;
  noisy.per_replica[0].first_jump_time = 0.2;
  noisy.per_replica[0].first_jump_row = 200;
  noisy.wilson = wilson_interval(1, 20);
  EXPECT_FALSE(threshold_regime_check(sub, p, noisy).passed());
}
