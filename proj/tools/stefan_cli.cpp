#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stefan/execute.hpp"
#include "stefan/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed_common = 0;
  std::uint64_t seed_idio = 0;
  std::string input;
};

void add_common(CLI::App* sub, Flags& f, bool needs_config) {
  auto* c = sub->add_option("-c,--config", f.config, "Scenario file");
  if (needs_config) c->required();
  sub->add_option("-o,--out", f.out, "Output directory");
  sub->add_option("-j,--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed-common", f.seed_common, "Override the common-noise seed");
  sub->add_option("--seed-idio", f.seed_idio, "Override the idiosyncratic seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supercooled Stefan problem with transport noise: simulator and checks"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "Run the particle system");
  auto* pic = app.add_subcommand("picard", "Iterate the fixed-point map for the front");
  auto* blow = app.add_subcommand("blowup-prob", "Monte Carlo estimate of the blow-up probability");
  auto* cas = app.add_subcommand("cascade", "Physical jump and epsilon-cascade limit");
  auto* chk = app.add_subcommand("check", "Run the diagnostics on a saved trajectory");
  add_common(sim, f, true);
  add_common(pic, f, true);
  add_common(blow, f, true);
  add_common(cas, f, true);
  add_common(chk, f, false);
  chk->add_option("-i,--input", f.input, "Directory holding a saved trajectory");

  CLI11_PARSE(app, argc, argv);

  stefan::Mode mode = stefan::Mode::simulate;
  if (pic->parsed()) mode = stefan::Mode::picard;
  if (blow->parsed()) mode = stefan::Mode::blowup_prob;
  if (cas->parsed()) mode = stefan::Mode::cascade;
  if (chk->parsed()) mode = stefan::Mode::check;

  std::string text;
  if (!f.config.empty()) {
    std::ifstream is(f.config, std::ios::binary);
    if (!is) {
      std::cerr << "config error: cannot read " << f.config << '\n';
      return stefan::exit_code::config_error;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  auto parsed = stefan::parse_scenario(text, mode);
  if (!parsed.ok()) {
    std::cerr << "config error(s) in " << (f.config.empty() ? "<none>" : f.config) << ":\n";
    for (const auto& e : parsed.errors) {
      std::cerr << "  ";
      if (e.line > 0) std::cerr << "line " << e.line << ": ";
      if (!e.key.empty()) std::cerr << e.key << ": ";
      std::cerr << e.message << '\n';
    }
    return stefan::exit_code::config_error;
  }
  stefan::Scenario scn = std::move(*parsed.scenario);
  if (!f.input.empty()) scn.check_input = f.input;

  stefan::ExecOptions opts;
  auto* active = app.get_subcommands().front();
  if (!f.out.empty()) opts.out_dir = f.out;
  if (active->count("--threads") > 0) opts.threads = f.threads;
  if (active->count("--seed-common") > 0) opts.seed_common = f.seed_common;
  if (active->count("--seed-idio") > 0) opts.seed_idio = f.seed_idio;
  return stefan::execute(scn, opts, std::cout);
}
