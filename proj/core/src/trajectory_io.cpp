#include "stefan/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stefan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

json read_json(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  auto os = open_out(file);
  os << j.dump(2) << '\n';
}

json moments_json(const MomentRow& m) {
  return {{"exp_neg", m.exp_neg}, {"bump", m.bump}, {"bump_d1", m.bump_d1},
          {"bump_d2", m.bump_d2}, {"corr_exp", m.corr_exp}, {"corr_bump", m.corr_bump}};
}

MomentRow moments_from_json(const json& j) {
  MomentRow m;
  m.exp_neg = j.at("exp_neg");
  m.bump = j.at("bump");
  m.bump_d1 = j.at("bump_d1");
  m.bump_d2 = j.at("bump_d2");
  m.corr_exp = j.at("corr_exp");
  m.corr_bump = j.at("corr_bump");
  return m;
}

std::vector<double> read_column(const fs::path& file, const std::string& name) {
  const auto t = read_csv(file);
  const auto c = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back(parse_double(r.at(c)));
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("missing CSV column '" + name + "'");
}

CsvTable read_csv(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV " + file.string());
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error("ragged row in " + file.string());
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,front,loss,alive,jump_flag,jump_size\n";
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    os << format_double(traj.times[k]) << ',' << format_double(traj.front[k]) << ','
       << format_double(traj.loss[k]) << ',' << traj.alive[k] << ','
       << static_cast<int>(traj.jump_flag[k]) << ',' << format_double(traj.increment[k]) << '\n';
  }
}

void write_snapshot_csv(std::ostream& os, const DensitySnapshot& snap) {
  os << "bin_left,bin_right,density\n";
  for (std::size_t j = 0; j < snap.density.size(); ++j) {
    os << format_double(snap.bin_left(j)) << ',' << format_double(snap.bin_left(j + 1)) << ','
       << format_double(snap.density[j]) << '\n';
  }
}

void save_trajectory(const fs::path& dir, const Trajectory& traj) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  {
    auto os = open_out(dir / "noise.csv");
    os << "k,t,dW\n";
    for (std::size_t i = 0; i < traj.dW.size(); ++i) {
      const std::size_t k = traj.first_row + i;
      os << k << ',' << format_double(traj.grid.time(k)) << ',' << format_double(traj.dW[i])
         << '\n';
    }
  }
  if (!traj.moments.empty()) {
    auto os = open_out(dir / "moments.csv");
    os << "t,exp_neg,bump,bump_d1,bump_d2,corr_exp,corr_bump\n";
    for (std::size_t k = 0; k < traj.moments.size(); ++k) {
      const auto& m = traj.moments[k];
      os << format_double(traj.times[k]) << ',' << format_double(m.exp_neg) << ','
         << format_double(m.bump) << ',' << format_double(m.bump_d1) << ','
         << format_double(m.bump_d2) << ',' << format_double(m.corr_exp) << ','
         << format_double(m.corr_bump) << '\n';
    }
  }
  {
    auto os = open_out(dir / "jumps.csv");
    os << "index,kind,row,t,front_before,size,absorbed,prejump_file\n";
    if (!traj.jumps.empty()) fs::create_directories(dir / "jumps");
    for (std::size_t i = 0; i < traj.jumps.size(); ++i) {
      const auto& j = traj.jumps[i];
      std::string file;
      if (!j.prejump.empty()) {
        file = "jumps/prejump_" + std::to_string(i) + ".csv";
        auto ps = open_out(dir / file);
        ps << "x\n";
        for (double x : j.prejump) ps << format_double(x) << '\n';
      }
      os << i << ',' << (j.kind == JumpRecord::Kind::initial ? "initial" : "step") << ','
         << j.step << ',' << format_double(j.time) << ',' << format_double(j.front_before) << ','
         << format_double(j.size) << ',' << j.absorbed << ',' << file << '\n';
    }
  }
  json snaps = json::array();
  if (!traj.snapshots.empty()) fs::create_directories(dir / "snapshots");
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& s = traj.snapshots[i];
    const std::string file = "snapshots/snapshot_" + std::to_string(i) + ".csv";
    auto os = open_out(dir / file);
    write_snapshot_csv(os, s);
    snaps.push_back({{"file", file}, {"t", s.time}, {"front", s.front}, {"bin_width", s.bin_width},
                     {"bins", s.density.size()}});
  }
  json pieces = json::array();
  for (const auto& p : traj.profile.pieces()) pieces.push_back({p.right, p.value});
  const json meta = {
      {"params",
       {{"kappa", traj.params.kappa},
        {"lambda", traj.params.lambda},
        {"theta", traj.params.theta},
        {"s0", traj.params.s0}}},
      {"reduced",
       {{"rho", traj.reduced.rho}, {"sigma", traj.reduced.sigma}, {"alpha", traj.reduced.alpha}}},
      {"profile", {{"origin", traj.profile.origin()}, {"pieces", pieces}}},
      {"total_mass", traj.total_mass},
      {"n_particles", traj.n_particles},
      {"mass_per_particle", traj.mass_per_particle},
      {"front_step", traj.front_step},
      {"dt", traj.grid.dt},
      {"n_steps", traj.grid.n_steps},
      {"seed_common", traj.seed_common},
      {"seed_idio", traj.seed_idio},
      {"blowup_threshold", traj.blowup_threshold},
      {"bridge_correction", traj.bridge_correction},
      {"first_row", traj.first_row},
      {"has_moments", !traj.moments.empty()},
      {"initial_moments", moments_json(traj.initial_moments)},
      {"snapshots", snaps},
  };
  write_json(dir / "trajectory_meta.json", meta);
}

Trajectory load_trajectory(const fs::path& dir) {
  Trajectory t;
  const json meta = read_json(dir / "trajectory_meta.json");
  try {
    const auto& p = meta.at("params");
    t.params.kappa = p.at("kappa");
    t.params.lambda = p.at("lambda");
    t.params.theta = p.at("theta");
    t.params.s0 = p.at("s0");
    const auto& r = meta.at("reduced");
    t.reduced.rho = r.at("rho");
    t.reduced.sigma = r.at("sigma");
    t.reduced.alpha = r.at("alpha");
    std::vector<ProfilePiece> pieces;
    for (const auto& pc : meta.at("profile").at("pieces")) {
      pieces.push_back({pc.at(0).get<double>(), pc.at(1).get<double>()});
    }
    t.profile = SupercoolingProfile(meta.at("profile").at("origin").get<double>(), pieces);
    t.total_mass = meta.at("total_mass");
    t.n_particles = meta.at("n_particles");
    t.mass_per_particle = meta.at("mass_per_particle");
    t.front_step = meta.at("front_step");
    t.grid.dt = meta.at("dt");
    t.grid.n_steps = meta.at("n_steps");
    t.seed_common = meta.at("seed_common");
    t.seed_idio = meta.at("seed_idio");
    t.blowup_threshold = meta.at("blowup_threshold");
    t.bridge_correction = meta.at("bridge_correction");
    t.first_row = meta.at("first_row");
    t.initial_moments = moments_from_json(meta.at("initial_moments"));
  } catch (const json::exception& e) {
    throw std::runtime_error("trajectory_meta.json: " + std::string(e.what()));
  }

  const auto tr = read_csv(dir / "trajectory.csv");
  const std::size_t ct = tr.column("t"), cf = tr.column("front"), cl = tr.column("loss"),
                    ca = tr.column("alive"), cj = tr.column("jump_flag"),
                    cs = tr.column("jump_size");
  for (const auto& row : tr.rows) {
    t.times.push_back(parse_double(row[ct]));
    t.front.push_back(parse_double(row[cf]));
    t.loss.push_back(parse_double(row[cl]));
    t.alive.push_back(static_cast<std::size_t>(std::stoull(row[ca])));
    t.jump_flag.push_back(row[cj] == "1" ? 1 : 0);
    t.increment.push_back(parse_double(row[cs]));
  }
  t.dW = read_column(dir / "noise.csv", "dW");

  if (meta.value("has_moments", false)) {
    const auto mt = read_csv(dir / "moments.csv");
    const std::size_t c1 = mt.column("exp_neg"), c2 = mt.column("bump"),
                      c3 = mt.column("bump_d1"), c4 = mt.column("bump_d2"),
                      c5 = mt.column("corr_exp"), c6 = mt.column("corr_bump");
    for (const auto& row : mt.rows) {
      t.moments.push_back({parse_double(row[c1]), parse_double(row[c2]), parse_double(row[c3]),
                           parse_double(row[c4]), parse_double(row[c5]), parse_double(row[c6])});
    }
  }

  const auto jt = read_csv(dir / "jumps.csv");
  for (const auto& row : jt.rows) {
    JumpRecord j;
    j.kind = row.at(jt.column("kind")) == "initial" ? JumpRecord::Kind::initial
                                                     : JumpRecord::Kind::step;
    j.step = static_cast<std::size_t>(std::stoull(row.at(jt.column("row"))));
    j.time = parse_double(row.at(jt.column("t")));
    j.front_before = parse_double(row.at(jt.column("front_before")));
    j.size = parse_double(row.at(jt.column("size")));
    j.absorbed = static_cast<std::size_t>(std::stoull(row.at(jt.column("absorbed"))));
    const std::string file = row.at(jt.column("prejump_file"));
    if (!file.empty()) j.prejump = read_column(dir / file, "x");
    t.jumps.push_back(std::move(j));
  }

  for (const auto& s : meta.at("snapshots")) {
    DensitySnapshot snap;
    snap.time = s.at("t");
    snap.front = s.at("front");
    snap.bin_width = s.at("bin_width");
    snap.density = read_column(dir / s.at("file").get<std::string>(), "density");
    t.snapshots.push_back(std::move(snap));
  }
  return t;
}

void save_state(const fs::path& dir, const ParticleState& state) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "state.csv");
    os << "index,position,alive\n";
    for (std::size_t i = 0; i < state.size(); ++i) {
      os << i << ',' << format_double(state.positions[i]) << ',' << static_cast<int>(state.alive[i])
         << '\n';
    }
  }
  write_json(dir / "state.json", {{"n", state.size()},
                                  {"mass_per_particle", state.mass_per_particle},
                                  {"front_step", state.front_step},
                                  {"s0", state.s0},
                                  {"front", state.front},
                                  {"step_index", state.step_index},
                                  {"time", state.time}});
}

ParticleState load_state(const fs::path& dir) {
  const json j = read_json(dir / "state.json");
  ParticleState s;
  try {
    s.mass_per_particle = j.at("mass_per_particle");
    s.front_step = j.at("front_step");
    s.s0 = j.at("s0");
    s.front = j.at("front");
    s.step_index = j.at("step_index");
    s.time = j.at("time");
  } catch (const json::exception& e) {
    throw std::runtime_error("state.json: " + std::string(e.what()));
  }
  const auto t = read_csv(dir / "state.csv");
  const auto cp = t.column("position"), ca = t.column("alive");
  for (const auto& row : t.rows) {
    s.positions.push_back(parse_double(row[cp]));
    s.alive.push_back(row[ca] == "1" ? 1 : 0);
  }
  if (s.positions.size() != j.at("n").get<std::size_t>()) {
    throw std::runtime_error("state.csv does not match state.json");
  }
  s.reindex();
  return s;
}

void save_front_path(const fs::path& dir, const FrontPath& fp,
                     const std::vector<double>& residuals) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "front.csv");
    os << "t,front\n";
    for (std::size_t k = 0; k < fp.values.size(); ++k) {
      os << format_double(fp.grid.time(k)) << ',' << format_double(fp.values[k]) << '\n';
    }
  }
  auto os = open_out(dir / "residuals.csv");
  os << "iteration,residual\n";
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    os << (i + 1) << ',' << format_double(residuals[i]) << '\n';
  }
}

}  // namespace stefan
