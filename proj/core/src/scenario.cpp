#include "stefan/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <stdexcept>

#include "stefan/trajectory_io.hpp"

namespace stefan {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::picard: return "picard";
    case Mode::blowup_prob: return "blowup-prob";
    case Mode::cascade: return "cascade";
    case Mode::check: return "check";
  }
  return "unknown";
}

std::optional<Mode> mode_from_name(std::string_view s) {
  for (auto m : {Mode::simulate, Mode::picard, Mode::blowup_prob, Mode::cascade, Mode::check}) {
    if (mode_name(m) == s) return m;
  }
  return std::nullopt;
}

namespace {

enum class Need { optional, model, sim };

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Entries = std::map<std::string, Entry>;

struct Field {
  const char* key;
  Need need;
};

constexpr Field kFields[] = {
    {"mode", Need::optional},
    {"params.kappa", Need::model},
    {"params.lambda", Need::model},
    {"params.theta", Need::model},
    {"params.s0", Need::model},
    {"profile.units", Need::optional},
    {"profile.pieces", Need::model},
    {"sim.n_particles", Need::sim},
    {"sim.dt", Need::sim},
    {"sim.t_end", Need::sim},
    {"sim.seed_common", Need::sim},
    {"sim.seed_idio", Need::sim},
    {"sim.blowup_threshold", Need::optional},
    {"sim.bridge_correction", Need::optional},
    {"sim.record_moments", Need::optional},
    {"sim.keep_prejump", Need::optional},
    {"sim.snapshots.times", Need::optional},
    {"sim.snapshots.bins", Need::optional},
    {"sim.snapshots.span", Need::optional},
    {"picard.m_samples", Need::optional},
    {"picard.seed", Need::optional},
    {"picard.max_iters", Need::optional},
    {"picard.tol", Need::optional},
    {"picard.bridge_correction", Need::optional},
    {"picard.compare_particles", Need::optional},
    {"blowup.replicas", Need::optional},
    {"blowup.jump_cutoff", Need::optional},
    {"cascade.epsilons", Need::optional},
    {"cascade.tol", Need::optional},
    {"cascade.max_iterations", Need::optional},
    {"check.input", Need::optional},
    {"output.dir", Need::optional},
    {"output.svg", Need::optional},
    {"output.threads", Need::optional},
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_name(std::string_view s) {
  if (s.empty() || s.front() == '.' || s.back() == '.') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool ok = std::islower(static_cast<unsigned char>(c)) ||
                    std::isdigit(static_cast<unsigned char>(c)) || c == '_' ||
                    (c == '.' && s[i - 1] != '.');
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

class Reader {
 public:
  Reader(const Entries& entries, std::vector<ConfigError>& errors)
      : entries_(entries), errors_(errors) {}

  const Entry* get(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void type_error(const std::string& key, const std::string& expected) {
    const Entry* e = get(key);
    errors_.push_back({e ? e->line : 0, key,
                       "type mismatch: expected " + expected + ", got '" +
                           (e ? e->value : std::string()) + "'"});
  }

  template <class T>
  void real(const std::string& key, T& target) {
    const Entry* e = get(key);
    if (!e) return;
    try {
      target = parse_double(e->value);
    } catch (const std::invalid_argument&) {
      type_error(key, "a real number");
    }
  }

  template <class T>
  void unsigned_int(const std::string& key, T& target) {
    const Entry* e = get(key);
    if (!e) return;
    std::uint64_t v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || e->value.empty()) {
      type_error(key, "a non-negative integer");
      return;
    }
    target = static_cast<T>(v);
  }

  void boolean(const std::string& key, bool& target) {
    const Entry* e = get(key);
    if (!e) return;
    if (e->value == "true") {
      target = true;
    } else if (e->value == "false") {
      target = false;
    } else {
      type_error(key, "true or false");
    }
  }

  void real_list(const std::string& key, std::vector<double>& target) {
    const Entry* e = get(key);
    if (!e) return;
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) {
      try {
        out.push_back(parse_double(item));
      } catch (const std::invalid_argument&) {
        type_error(key, "a comma-separated list of reals");
        return;
      }
    }
    target = std::move(out);
  }

  void invariant(const std::string& key, const std::string& message) {
    const Entry* e = get(key);
    errors_.push_back({e ? e->line : 0, key, message});
  }

 private:
  const Entries& entries_;
  std::vector<ConfigError>& errors_;
};

}  // namespace

std::vector<std::string> scenario_keys() {
  std::vector<std::string> out;
  for (const auto& f : kFields) out.emplace_back(f.key);
  return out;
}

ParseResult parse_scenario(std::string_view text, std::optional<Mode> mode_override) {
  ParseResult res;
  auto& errors = res.errors;
  Entries entries;

  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, "", "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(section)) {
        errors.push_back({line_no, section, "invalid section name '" + section + "'"});
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line_no, "", "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key) || key.find('.') != std::string::npos) {
      errors.push_back({line_no, key, "invalid key name '" + key + "'"});
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (auto it = entries.find(full); it != entries.end()) {
      errors.push_back({line_no, full,
                        "duplicate key '" + full + "' (first set on line " +
                            std::to_string(it->second.line) + ")"});
      continue;
    }
    entries[full] = {value, line_no};
  }

  for (const auto& [key, entry] : entries) {
    const bool known = std::any_of(std::begin(kFields), std::end(kFields),
                                   [&](const Field& f) { return key == f.key; });
    if (!known) errors.push_back({entry.line, key, "unknown key '" + key + "'"});
  }

  Reader rd(entries, errors);
  Scenario scn;
  if (const Entry* e = rd.get("mode")) {
    scn.mode = mode_from_name(e->value);
    if (!scn.mode) rd.type_error("mode", "one of simulate, picard, blowup-prob, cascade, check");
  }
  if (mode_override) scn.mode = mode_override;
  const Mode mode = scn.mode.value_or(Mode::simulate);
  const bool need_model = mode != Mode::check;
  const bool need_sim = mode == Mode::simulate || mode == Mode::picard || mode == Mode::blowup_prob;

  for (const auto& f : kFields) {
    const bool required = (f.need == Need::model && need_model) || (f.need == Need::sim && need_sim);
    if (required && !rd.get(f.key)) {
      errors.push_back({0, f.key, std::string("missing required key '") + f.key + "'"});
    }
  }

  const std::size_t errors_before_types = errors.size();
  rd.real("params.kappa", scn.params.kappa);
  rd.real("params.lambda", scn.params.lambda);
  rd.real("params.theta", scn.params.theta);
  rd.real("params.s0", scn.params.s0);
  scn.has_params = rd.get("params.kappa") || rd.get("params.lambda") || rd.get("params.theta") ||
                   rd.get("params.s0");

  bool lambda_kappa_units = false;
  if (const Entry* e = rd.get("profile.units")) {
    if (e->value == "lambda_kappa") {
      lambda_kappa_units = true;
    } else if (e->value != "absolute") {
      rd.type_error("profile.units", "absolute or lambda_kappa");
    }
  }
  std::vector<ProfilePiece> pieces;
  bool pieces_ok = true;
  if (const Entry* e = rd.get("profile.pieces")) {
    for (const auto& item : split_list(e->value)) {
      const auto colon = item.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        pieces.push_back({parse_double(trim(std::string_view(item).substr(0, colon))),
                          parse_double(trim(std::string_view(item).substr(colon + 1)))});
      } catch (const std::invalid_argument&) {
        rd.type_error("profile.pieces", "a list of right_end:value pairs");
        pieces_ok = false;
        break;
      }
    }
  }

  rd.unsigned_int("sim.n_particles", scn.sim.n_particles);
  rd.real("sim.dt", scn.sim.dt);
  rd.real("sim.t_end", scn.sim.t_end);
  rd.unsigned_int("sim.seed_common", scn.sim.seed_common);
  rd.unsigned_int("sim.seed_idio", scn.sim.seed_idio);
  if (rd.get("sim.blowup_threshold")) {
    double v = 0.0;
    rd.real("sim.blowup_threshold", v);
    scn.sim.blowup_threshold = v;
  }
  rd.boolean("sim.bridge_correction", scn.sim.bridge_correction);
  rd.boolean("sim.record_moments", scn.sim.record_moments);
  rd.boolean("sim.keep_prejump", scn.sim.keep_prejump);
  rd.real_list("sim.snapshots.times", scn.sim.snapshot_times);
  rd.unsigned_int("sim.snapshots.bins", scn.sim.density_bins);
  if (rd.get("sim.snapshots.span")) {
    double v = 0.0;
    rd.real("sim.snapshots.span", v);
    scn.sim.density_span = v;
  }
  scn.has_sim = rd.get("sim.n_particles") != nullptr;

  scn.picard.config.seed = scn.sim.seed_idio ^ 0x5DEECE66Dull;
  rd.unsigned_int("picard.m_samples", scn.picard.config.m_samples);
  rd.unsigned_int("picard.seed", scn.picard.config.seed);
  rd.unsigned_int("picard.max_iters", scn.picard.max_iters);
  rd.real("picard.tol", scn.picard.tol);
  scn.picard.config.bridge_correction = scn.sim.bridge_correction;
  rd.boolean("picard.bridge_correction", scn.picard.config.bridge_correction);
  rd.boolean("picard.compare_particles", scn.picard.compare_particles);

  rd.unsigned_int("blowup.replicas", scn.blowup.replicas);
  if (rd.get("blowup.jump_cutoff")) {
    double v = 0.0;
    rd.real("blowup.jump_cutoff", v);
    scn.blowup.jump_cutoff = v;
  }
  rd.real_list("cascade.epsilons", scn.cascade.epsilons);
  rd.real("cascade.tol", scn.cascade.tol);
  rd.unsigned_int("cascade.max_iterations", scn.cascade.max_iterations);
  if (const Entry* e = rd.get("check.input")) scn.check_input = e->value;
  if (const Entry* e = rd.get("output.dir")) scn.output.dir = e->value;
  rd.boolean("output.svg", scn.output.svg);
  rd.unsigned_int("output.threads", scn.output.threads);
  const bool types_ok = errors.size() == errors_before_types;

  // Cross-field invariants, only on values that parsed.
  if (types_ok && scn.has_params) {
    if (auto err = validate(scn.params)) {
      const std::string key = err->constraint == "parabolicity" ? "params.theta"
                                                                : "params." + err->constraint;
      rd.invariant(key, err->constraint + ": " + err->message);
    }
  }
  if (types_ok && pieces_ok && rd.get("profile.pieces")) {
    if (lambda_kappa_units) {
      for (auto& p : pieces) p.value *= scn.params.lambda_kappa();
    }
    try {
      scn.profile = SupercoolingProfile(scn.params.s0, pieces);
    } catch (const std::invalid_argument& e) {
      rd.invariant("profile.pieces", e.what());
    }
  }
  if (types_ok && scn.has_sim) {
    try {
      scn.sim.validate();
    } catch (const std::invalid_argument& e) {
      rd.invariant("sim", e.what());
    }
  }
  if (types_ok) {
    if (scn.picard.config.m_samples < 1) rd.invariant("picard.m_samples", "must be >= 1");
    if (scn.picard.max_iters < 1) rd.invariant("picard.max_iters", "must be >= 1");
    if (!(scn.picard.tol > 0.0)) rd.invariant("picard.tol", "must be positive");
    if (scn.blowup.replicas < 1) rd.invariant("blowup.replicas", "must be >= 1");
    if (scn.blowup.jump_cutoff && !(*scn.blowup.jump_cutoff > 0.0)) {
      rd.invariant("blowup.jump_cutoff", "must be positive");
    }
    const auto& eps = scn.cascade.epsilons;
    bool eps_ok = eps.size() >= 2;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      eps_ok = eps_ok && eps[i] > 0.0 && (i == 0 || eps[i] < eps[i - 1]);
    }
    if (!eps_ok) {
      rd.invariant("cascade.epsilons", "need at least two positive, strictly decreasing values");
    }
    if (!(scn.cascade.tol > 0.0)) rd.invariant("cascade.tol", "must be positive");
    if (scn.output.threads < 1) rd.invariant("output.threads", "must be >= 1");
  }

  std::stable_sort(errors.begin(), errors.end(), [](const ConfigError& a, const ConfigError& b) {
    return a.line < b.line;
  });
  if (errors.empty()) res.scenario = std::move(scn);
  return res;
}

}  // namespace stefan
