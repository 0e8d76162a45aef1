#include "muskat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace muskat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyValue {
  std::string key, value, where;
};

double parse_double(const KeyValue& kv) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(kv.value, &pos);
  } catch (const std::exception&) {
    throw ConfigError(kv.where + ": expected a number for '" + kv.key + "', got '" +
                      kv.value + "'");
  }
  if (pos != kv.value.size())
    throw ConfigError(kv.where + ": trailing characters in value of '" + kv.key + "'");
  return v;
}

std::uint64_t parse_u64(const KeyValue& kv) {
  try {
    return std::stoull(kv.value);
  } catch (const std::exception&) {
    throw ConfigError(kv.where + ": expected an integer for '" + kv.key + "'");
  }
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "on") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "off") return false;
  throw ConfigError(kv.where + ": expected a boolean for '" + kv.key + "'");
}

std::vector<std::tuple<int, double, double>> parse_modes(const KeyValue& kv) {
  // "k:amp[:phase],k:amp[:phase],..."
  std::vector<std::tuple<int, double, double>> modes;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream ms(item);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ms, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(kv.where + ": mode entry '" + item + "' is not k:amp[:phase]");
    try {
      const int k = std::stoi(parts[0]);
      const double amp = std::stod(parts[1]);
      const double phase = parts.size() == 3 ? std::stod(parts[2]) : 0.0;
      if (k < 1) throw ConfigError(kv.where + ": mode number must be >= 1");
      modes.emplace_back(k, amp, phase);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(kv.where + ": malformed mode entry '" + item + "'");
    }
  }
  if (modes.empty()) throw ConfigError(kv.where + ": empty mode list");
  return modes;
}

void apply_key(RunConfig& cfg, const KeyValue& kv) {
  const std::string& k = kv.key;
  if (k == "command") {
    if (kv.value == "simulate") cfg.command = Command::Simulate;
    else if (kv.value == "equilibria") cfg.command = Command::Equilibria;
    else if (kv.value == "spectrum") cfg.command = Command::Spectrum;
    else if (kv.value == "verify") cfg.command = Command::Verify;
    else if (kv.value == "velocity") cfg.command = Command::Velocity;
    else throw ConfigError(kv.where + ": unknown command '" + kv.value + "'");
  } else if (k == "n") cfg.grid_n = static_cast<std::size_t>(parse_u64(kv));
  else if (k == "mu_minus") cfg.params.mu_minus = parse_double(kv);
  else if (k == "mu_plus") cfg.params.mu_plus = parse_double(kv);
  else if (k == "rho_minus") cfg.params.rho_minus = parse_double(kv);
  else if (k == "rho_plus") cfg.params.rho_plus = parse_double(kv);
  else if (k == "permeability") cfg.params.permeability = parse_double(kv);
  else if (k == "sigma") cfg.params.sigma = parse_double(kv);
  else if (k == "gravity") cfg.params.gravity = parse_double(kv);
  else if (k == "frame_speed") cfg.params.frame_speed = parse_double(kv);
  else if (k == "t_end") cfg.t_end = parse_double(kv);
  else if (k == "dt_init") cfg.control.dt_init = parse_double(kv);
  else if (k == "dt_min") cfg.control.dt_min = parse_double(kv);
  else if (k == "dt_max") cfg.control.dt_max = parse_double(kv);
  else if (k == "rel_tol") cfg.control.rel_tol = parse_double(kv);
  else if (k == "abs_tol") cfg.control.abs_tol = parse_double(kv);
  else if (k == "max_h2_norm") cfg.control.max_h2_norm = parse_double(kv);
  else if (k == "scheme") {
    if (kv.value == "auto") cfg.control.scheme = Scheme::Auto;
    else if (kv.value == "erk") cfg.control.scheme = Scheme::Erk;
    else if (kv.value == "imex") cfg.control.scheme = Scheme::Imex;
    else throw ConfigError(kv.where + ": unknown scheme '" + kv.value + "'");
  } else if (k == "init") {
    if (kv.value == "modes") cfg.init.kind = InitKind::Modes;
    else if (kv.value == "tail") cfg.init.kind = InitKind::Tail;
    else if (kv.value == "file") cfg.init.kind = InitKind::File;
    else throw ConfigError(kv.where + ": unknown init kind '" + kv.value + "'");
  } else if (k == "modes") cfg.init.modes = parse_modes(kv);
  else if (k == "tail_exponent") cfg.init.tail_exponent = parse_double(kv);
  else if (k == "tail_amplitude") cfg.init.tail_amplitude = parse_double(kv);
  else if (k == "init_file") cfg.init.file = kv.value;
  else if (k == "out_dir") cfg.out_dir = kv.value;
  else if (k == "seed") cfg.seed = parse_u64(kv);
  else if (k == "expect_termination") cfg.expect_termination = parse_bool(kv);
  else if (k == "emit_plot") cfg.emit_plot = parse_bool(kv);
  else if (k == "ell") cfg.ell = static_cast<int>(parse_u64(kv));
  else if (k == "ds") cfg.ds = parse_double(kv);
  else if (k == "steps") cfg.steps = static_cast<int>(parse_u64(kv));
  else if (k == "slope_cap") cfg.slope_cap = parse_double(kv);
  else if (k == "branch_eigs") cfg.branch_eigs = parse_bool(kv);
  else if (k == "vel_ny") cfg.vel_ny = static_cast<std::size_t>(parse_u64(kv));
  else if (k == "vel_ymax") cfg.vel_ymax = parse_double(kv);
  else if (k == "dump_operator") cfg.dump_operator = kv.value;
  else throw ConfigError(kv.where + ": unknown key '" + k + "'");
}

}  // namespace

PeriodicField InitialData::realize(std::size_t n, std::uint64_t seed) const {
  switch (kind) {
    case InitKind::Modes:
      return PeriodicField::from_modes(n, modes);
    case InitKind::Tail: {
      std::mt19937_64 gen(seed);
      std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
      std::vector<std::tuple<int, double, double>> tail;
      for (int k = 1; k <= static_cast<int>(n) / 2 - 1; ++k)
        tail.emplace_back(
            k,
            2.0 * tail_amplitude * std::pow(1.0 + static_cast<double>(k) * k, -tail_exponent),
            uni(gen));
      return PeriodicField::from_modes(n, tail);
    }
    case InitKind::File: {
      std::ifstream is(file);
      if (!is) throw ConfigError("init_file: cannot open '" + file + "'");
      std::vector<double> values;
      std::string line;
      while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::stringstream ss(line);
        double x, v;
        if (!(ss >> x >> v)) throw ConfigError("init_file: malformed line '" + line + "'");
        values.push_back(v);
      }
      if (values.size() != n)
        throw ConfigError("init_file: found " + std::to_string(values.size()) +
                          " samples, expected n = " + std::to_string(n));
      return PeriodicField(std::move(values));
    }
  }
  throw ConfigError("init: unreachable kind");
}

void RunConfig::validate() const {
  const bool pow2 = grid_n >= 32 && grid_n <= 1024 && (grid_n & (grid_n - 1)) == 0;
  if (!pow2)
    throw ConfigError("n must be a power of two between 32 and 1024, got " +
                      std::to_string(grid_n));
  try {
    (void)derive_constants(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("physical parameters: ") + e.what());
  }
  try {
    control.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("step control: ") + e.what());
  }
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (ell < 1) throw ConfigError("ell must be >= 1");
  if (!(ds > 0.0)) throw ConfigError("ds must be positive");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides,
                       Command command) {
  RunConfig cfg;
  cfg.command = command;
  std::vector<KeyValue> entries;

  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config file: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
      entries.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                         path + ":" + std::to_string(line_no)});
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "': expected key=value");
    entries.push_back(
        {trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)), "override '" + ov + "'"});
  }

  for (const auto& kv : entries) apply_key(cfg, kv);
  cfg.command = command;  // the subcommand wins over a config "command" key
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& overrides, Command command) {
  return parse_config("", overrides, command);
}

}  // namespace muskat
