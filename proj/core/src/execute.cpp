#include "stefan/execute.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "stefan/cascade.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/noise.hpp"
#include "stefan/picard.hpp"
#include "stefan/svg.hpp"
#include "stefan/trajectory_io.hpp"

namespace stefan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string shortest(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << text;
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json echo_json(const Scenario& scn) {
  json pieces = json::array();
  for (const auto& p : scn.profile.pieces()) pieces.push_back({p.right, p.value});
  json snaps = scn.sim.snapshot_times;
  return {
      {"mode", scn.mode ? std::string(mode_name(*scn.mode)) : std::string("simulate")},
      {"params",
       {{"kappa", scn.params.kappa},
        {"lambda", scn.params.lambda},
        {"theta", scn.params.theta},
        {"s0", scn.params.s0}}},
      {"profile", {{"origin", scn.profile.origin()}, {"pieces", pieces}}},
      {"sim",
       {{"n_particles", scn.sim.n_particles},
        {"dt", scn.sim.dt},
        {"t_end", scn.sim.t_end},
        {"seed_common", scn.sim.seed_common},
        {"seed_idio", scn.sim.seed_idio},
        {"blowup_threshold",
         scn.sim.blowup_threshold ? json(*scn.sim.blowup_threshold) : json(nullptr)},
        {"bridge_correction", scn.sim.bridge_correction},
        {"record_moments", scn.sim.record_moments},
        {"keep_prejump", scn.sim.keep_prejump},
        {"snapshots",
         {{"times", snaps},
          {"bins", scn.sim.density_bins},
          {"span", scn.sim.density_span ? json(*scn.sim.density_span) : json(nullptr)}}}}},
      {"picard",
       {{"m_samples", scn.picard.config.m_samples},
        {"seed", scn.picard.config.seed},
        {"max_iters", scn.picard.max_iters},
        {"tol", scn.picard.tol},
        {"bridge_correction", scn.picard.config.bridge_correction},
        {"compare_particles", scn.picard.compare_particles}}},
      {"blowup",
       {{"replicas", scn.blowup.replicas},
        {"jump_cutoff", scn.blowup.jump_cutoff ? json(*scn.blowup.jump_cutoff) : json(nullptr)}}},
      {"cascade",
       {{"epsilons", scn.cascade.epsilons},
        {"tol", scn.cascade.tol},
        {"max_iterations", scn.cascade.max_iterations}}},
      {"check", {{"input", scn.check_input ? json(*scn.check_input) : json(nullptr)}}},
      {"output", {{"svg", scn.output.svg}, {"threads", scn.output.threads}}},
  };
}

json summary_header(const Scenario& scn, Mode mode) {
  const std::string echo = config_echo(scn);
  return {{"schema_version", kSummarySchemaVersion},
          {"mode", std::string(mode_name(mode))},
          {"config", json::parse(echo)},
          {"config_hash", hex64(fnv1a64(echo))},
          {"seeds", {{"common", scn.sim.seed_common}, {"idio", scn.sim.seed_idio}}}};
}

json jumps_json(const Trajectory& t) {
  json out = json::array();
  for (const auto& j : t.jumps) {
    out.push_back({{"t", j.time},
                   {"size", j.size},
                   {"absorbed", j.absorbed},
                   {"front_before", j.front_before},
                   {"kind", j.kind == JumpRecord::Kind::initial ? "initial" : "step"}});
  }
  return out;
}

json check_json(const CheckResult& c) {
  json j = {{"name", c.name},
            {"pass", c.pass},
            {"hard", c.hard},
            {"value", c.value},
            {"tolerance", c.tolerance},
            {"detail", c.detail}};
  j["worst_time"] = c.worst_time ? json(*c.worst_time) : json(nullptr);
  return j;
}

void write_front_svg(const fs::path& dir, const std::vector<Series>& series) {
  write_text(dir / "front.svg", line_chart(series, "Freezing front", "t", "s(t)"));
}

void write_density_svg(const fs::path& dir, const Trajectory& t) {
  std::vector<Series> series;
  const auto& prof = t.profile;
  if (!prof.empty()) {
    Series s{"u0", {}, {}, true};
    for (std::size_t i = 0; i < prof.pieces().size(); ++i) {
      s.x.push_back(prof.left(i));
      s.y.push_back(prof.pieces()[i].value);
    }
    s.x.push_back(prof.support_end());
    s.y.push_back(0.0);
    series.push_back(std::move(s));
  }
  for (const auto& snap : t.snapshots) {
    Series s{"t=" + shortest(snap.time), {}, {}, true};
    for (std::size_t j = 0; j < snap.density.size(); ++j) {
      s.x.push_back(snap.bin_left(j));
      s.y.push_back(snap.density[j]);
    }
    series.push_back(std::move(s));
  }
  write_text(dir / "density.svg", line_chart(series, "Supercooling density", "x", "u(t, x)"));
}

int run_simulate(const Scenario& scn, const fs::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Trajectory traj = run(scn.profile, scn.params, scn.sim);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_trajectory(out, traj);

  json summary = summary_header(scn, Mode::simulate);
  summary["final_front"] = traj.front.back();
  summary["final_loss"] = traj.loss.back();
  summary["alive"] = traj.alive.back();
  summary["alpha"] = traj.reduced.alpha;
  summary["initial_physical_jump"] =
      initial_physical_jump(scn.profile, scn.params.lambda_kappa());
  summary["max_increment"] = traj.max_increment();
  summary["blowup_threshold"] = traj.blowup_threshold;
  summary["blowup"] = !traj.jumps.empty();
  summary["jumps"] = jumps_json(traj);
  summary["energy_residual"] = energy_balance_residual(traj).value;
  write_json(out / "summary.json", summary);
  write_json(out / "timing.json", {{"runtime_seconds", seconds}});
  if (scn.output.svg) {
    write_front_svg(out, {{"particles", traj.times, traj.front, true}});
    write_density_svg(out, traj);
  }
  log << "final front " << shortest(traj.front.back()) << ", loss "
      << shortest(traj.loss.back()) << ", macroscopic jumps " << traj.jumps.size() << '\n';
  log << "blowup " << (traj.jumps.empty() ? "false" : "true") << '\n';
  return exit_code::ok;
}

int run_picard(const Scenario& scn, const fs::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const TimeGrid grid = scn.sim.grid();
  const NoisePath W = NoisePath::generate(scn.sim.seed_common, grid);
  const ReducedParams rp = reduce(scn.params, scn.profile.total_mass());
  PicardConfig pc = scn.picard.config;
  pc.threads = scn.output.threads;
  const auto res = iterate_to_fixed_point(scn.profile, rp, W, pc, scn.picard.max_iters,
                                          scn.picard.tol);
  save_front_path(out, res.front, res.residuals);

  json summary = summary_header(scn, Mode::picard);
  summary["iterations"] = res.iterations;
  summary["converged"] = res.converged;
  summary["residuals"] = res.residuals;
  summary["iterates_increasing"] = res.increasing;
  summary["iterates_decreasing"] = res.decreasing;
  summary["final_front"] = res.front.values.back();
  summary["initial_physical_jump"] =
      initial_physical_jump(scn.profile, scn.params.lambda_kappa());
  std::vector<Series> series{{"Picard", {}, res.front.values, true}};
  for (std::size_t k = 0; k < res.front.values.size(); ++k) {
    series[0].x.push_back(grid.time(k));
  }
  if (scn.picard.compare_particles) {
    const Trajectory traj = run(scn.profile, scn.params, scn.sim);
    save_trajectory(out, traj);
    const double d = compare_with_particles(traj, res.front);
    summary["particle_distance"] = d;
    series.push_back({"particles", traj.times, traj.front, true});
    log << "sup-norm distance to particle front " << shortest(d) << '\n';
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out / "summary.json", summary);
  write_json(out / "timing.json", {{"runtime_seconds", seconds}});
  if (scn.output.svg) write_front_svg(out, series);
  log << "picard " << (res.converged ? "converged" : "did not converge") << " after "
      << res.iterations << " iteration(s), last residual " << shortest(res.residuals.back())
      << '\n';
  return exit_code::ok;
}

int run_blowup(const Scenario& scn, const fs::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const double A = scn.profile.total_mass();
  const ReducedParams rp = reduce(scn.params, A);
  const double a = scn.sim.n_particles > 0 ? rp.alpha / static_cast<double>(scn.sim.n_particles)
                                           : 0.0;
  const double cutoff = scn.blowup.jump_cutoff.value_or(
      scn.sim.blowup_threshold.value_or(default_blowup_threshold(rp.alpha, a)));
  const auto est = monte_carlo_blowup(scn.profile, scn.params, scn.sim, scn.blowup.replicas,
                                      cutoff, scn.output.threads);
  const auto regime = threshold_regime_check(scn.profile, scn.params, est);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::ofstream os(out / "replicas.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write replicas.csv");
    os << "replica,seed_common,seed_idio,jumps,first_jump_time,max_increment,final_front\n";
    for (std::size_t r = 0; r < est.per_replica.size(); ++r) {
      const auto& s = est.per_replica[r];
      os << r << ',' << s.seed_common << ',' << s.seed_idio << ',' << s.macroscopic_jumps << ','
         << (s.first_jump_time ? format_double(*s.first_jump_time) : std::string()) << ','
         << format_double(s.max_increment) << ',' << format_double(s.final_front) << '\n';
    }
  }
  json checks = json::array();
  for (const auto& c : regime.checks) checks.push_back(check_json(c));
  json summary = summary_header(scn, Mode::blowup_prob);
  summary["replicas"] = est.replicas;
  summary["jumping"] = est.jumping;
  summary["jump_cutoff"] = est.jump_cutoff;
  summary["p_hat"] = est.p_hat;
  summary["wilson95"] = {est.wilson.lower, est.wilson.upper};
  summary["first_jump_times"] = est.first_jump_times;
  summary["blowup"] = est.jumping > 0;
  summary["regime"] = {{"subcritical", regime.subcritical},
                       {"supercritical", regime.supercritical},
                       {"stable_start", regime.stable_start},
                       {"jump_free_fraction", regime.jump_free_fraction},
                       {"checks", checks}};
  write_json(out / "summary.json", summary);
  write_json(out / "timing.json", {{"runtime_seconds", seconds}});
  log << est.jumping << "/" << est.replicas << " replicas jump (cutoff " << shortest(cutoff)
      << "), p_hat " << shortest(est.p_hat) << ", Wilson 95% [" << shortest(est.wilson.lower)
      << ", " << shortest(est.wilson.upper) << "]\n";
  for (const auto& c : regime.checks) {
    log << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
  }
  return exit_code::ok;
}

int run_cascade(const Scenario& scn, const fs::path& out, std::ostream& log) {
  const double lk = scn.params.lambda_kappa();
  const auto m = MassFunction::from_profile(scn.profile, scn.params.s0);
  const double jump = physical_jump(m, lk);
  CascadeOptions opts;
  opts.tolerance = scn.cascade.tol;
  opts.max_iterations = scn.cascade.max_iterations;
  opts.keep_trace = true;

  std::ofstream os(out / "cascade_trace.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write cascade_trace.csv");
  os << "epsilon,iteration,offset\n";
  json per_eps = json::array();
  for (double eps : scn.cascade.epsilons) {
    const auto r = cascade_epsilon(m, eps, lk, opts);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      os << format_double(eps) << ',' << i << ',' << format_double(r.trace[i]) << '\n';
    }
    per_eps.push_back({{"epsilon", eps},
                       {"offset", r.offset},
                       {"iterations", r.iterations},
                       {"converged", r.converged}});
    if (!r.converged) throw std::runtime_error("cascade did not converge within the cap");
  }
  const auto lim = cascade_limit(m, lk, scn.cascade.epsilons, opts);
  json summary = summary_header(scn, Mode::cascade);
  summary["physical_jump"] = jump;
  summary["stability"] =
      stability_check(scn.profile, lk) == Stability::stable ? "stable" : "unstable";
  summary["epsilon_cascade"] = per_eps;
  summary["extrapolated_limit"] = lim.limit;
  summary["discrepancy"] = lim.discrepancy;
  write_json(out / "summary.json", summary);
  log << shortest(jump) << '\n';
  return exit_code::ok;
}

int run_check(const Scenario& scn, const fs::path& out, std::ostream& log) {
  const fs::path input = scn.check_input ? fs::path(*scn.check_input) : out;
  const Trajectory traj = load_trajectory(input);
  const auto rep = run_diagnostics(traj);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back(check_json(c));
    log << (c.pass ? "PASS " : (c.hard ? "FAIL " : "INFO ")) << c.name << " value "
        << shortest(c.value);
    if (c.tolerance > 0.0) log << " tolerance " << shortest(c.tolerance);
    if (!c.detail.empty()) log << " (" << c.detail << ")";
    log << '\n';
  }
  fs::create_directories(out);
  write_json(out / "report.json", {{"schema_version", kSummarySchemaVersion},
                                   {"input", input.string()},
                                   {"passed", rep.passed()},
                                   {"checks", checks}});
  log << (rep.passed() ? "all hard checks passed" : "hard check failure") << '\n';
  return rep.passed() ? exit_code::ok : exit_code::check_failure;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_echo(const Scenario& scn) { return echo_json(scn).dump(); }

fs::path resolve_out_dir(const Scenario& scn, const ExecOptions& opts) {
  if (opts.out_dir) return *opts.out_dir;
  if (scn.output.dir) return *scn.output.dir;
  if (const char* env = std::getenv("STEFAN_OUT_DIR"); env && *env) return env;
  return "stefan_out";
}

Scenario apply_overrides(Scenario scn, const ExecOptions& opts) {
  if (opts.seed_common) scn.sim.seed_common = *opts.seed_common;
  if (opts.seed_idio) scn.sim.seed_idio = *opts.seed_idio;
  if (opts.threads) scn.output.threads = std::max(1u, *opts.threads);
  return scn;
}

int execute(const Scenario& input, const ExecOptions& opts, std::ostream& log) {
  const Scenario scn = apply_overrides(input, opts);
  const Mode mode = scn.mode.value_or(Mode::simulate);
  const fs::path out = resolve_out_dir(scn, opts);
  try {
    fs::create_directories(out);
    switch (mode) {
      case Mode::simulate: return run_simulate(scn, out, log);
      case Mode::picard: return run_picard(scn, out, log);
      case Mode::blowup_prob: return run_blowup(scn, out, log);
      case Mode::cascade: return run_cascade(scn, out, log);
      case Mode::check: return run_check(scn, out, log);
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    try {
      fs::create_directories(out);
      write_json(out / "error.json", {{"error", "runtime"},
                                      {"mode", std::string(mode_name(mode))},
                                      {"message", e.what()}});
    } catch (const std::exception&) {
    }
    return exit_code::runtime_error;
  }
  return exit_code::runtime_error;
}

}  // namespace stefan
