#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "stefan/scenario.hpp"

namespace stefan {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int runtime_error = 2;
inline constexpr int check_failure = 3;
}  // namespace exit_code

inline constexpr int kSummarySchemaVersion = 1;

struct ExecOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed_common;
  std::optional<std::uint64_t> seed_idio;
};

/// Output directory: flag, then output.dir, then $STEFAN_OUT_DIR, then "stefan_out".
std::filesystem::path resolve_out_dir(const Scenario& scn, const ExecOptions& opts);

/// Applies flag overrides (seeds, threads) to a parsed scenario.
Scenario apply_overrides(Scenario scn, const ExecOptions& opts);

/// Canonical JSON echo of the effective configuration (sorted keys).
std::string config_echo(const Scenario& scn);
/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

/// Runs the scenario's mode and writes its artifacts into the output
/// directory. Progress and results go to `log`. Returns an exit code; runtime
/// failures also leave error.json in the output directory.
int execute(const Scenario& scn, const ExecOptions& opts, std::ostream& log);

}  // namespace stefan
