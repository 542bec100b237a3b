#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stefan/particle.hpp"
#include "stefan/picard.hpp"

namespace stefan {

/// 17 significant digits, shortest form that round-trips.
std::string format_double(double v);
/// Strict parse of a full token; throws std::invalid_argument.
double parse_double(const std::string& s);

/// Writes trajectory.csv, noise.csv, jumps.csv, jumps/prejump_<i>.csv,
/// snapshots/snapshot_<i>.csv, moments.csv (if recorded) and
/// trajectory_meta.json into `dir`.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj);
/// Inverse of save_trajectory; throws std::runtime_error on missing or malformed files.
Trajectory load_trajectory(const std::filesystem::path& dir);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_snapshot_csv(std::ostream& os, const DensitySnapshot& snap);

/// state.csv (index, position, alive) plus state.json (front, masses, step).
void save_state(const std::filesystem::path& dir, const ParticleState& state);
ParticleState load_state(const std::filesystem::path& dir);

/// front.csv with the trajectory front columns (t, front) and residuals.csv.
void save_front_path(const std::filesystem::path& dir, const FrontPath& fp,
                     const std::vector<double>& residuals);

/// Minimal CSV reader: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& file);

}  // namespace stefan
