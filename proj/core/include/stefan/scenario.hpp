#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stefan/params.hpp"
#include "stefan/particle.hpp"
#include "stefan/picard.hpp"
#include "stefan/profile.hpp"

namespace stefan {

enum class Mode { simulate, picard, blowup_prob, cascade, check };

std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view s);

struct PicardSettings {
  PicardConfig config;
  std::size_t max_iters = 50;
  double tol = 1e-4;
  bool compare_particles = true;
};

struct BlowupSettings {
  std::size_t replicas = 100;
  std::optional<double> jump_cutoff;  ///< default: the simulation's blow-up threshold
};

struct CascadeSettings {
  std::vector<double> epsilons{0.1, 0.01, 0.001};
  double tol = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

struct OutputSettings {
  std::optional<std::string> dir;
  bool svg = true;
  unsigned threads = 1;
};

/// A validated run description. Text format:
///
///   # comment
///   mode = simulate
///   [params]
///   kappa = 0.5
///   [profile]
///   units = lambda_kappa          # or absolute
///   pieces = 0.5:0.5, 1.0:2.0      # right_end:value, contiguous from s0
///   [sim.snapshots]
///   times = 0.1, 0.5
///
/// Section names may be dotted to nest. Every key must be known to the schema.
struct Scenario {
  std::optional<Mode> mode;
  PhysicalParams params;
  SupercoolingProfile profile;
  SimConfig sim;
  PicardSettings picard;
  BlowupSettings blowup;
  CascadeSettings cascade;
  std::optional<std::string> check_input;
  OutputSettings output;
  bool has_params = false;
  bool has_sim = false;
};

struct ConfigError {
  std::size_t line = 0;  ///< 0 if not tied to a line
  std::string key;
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ConfigError> errors;
  bool ok() const { return scenario.has_value(); }
};

/// Parses and validates; collects every error instead of stopping at the
/// first one. `mode` overrides the mode key and decides which blocks are required.
ParseResult parse_scenario(std::string_view text, std::optional<Mode> mode = std::nullopt);

/// Every key accepted by the parser, as section.key.
std::vector<std::string> scenario_keys();

}  // namespace stefan
