#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "muskat/evolution.hpp"
#include "muskat/physics.hpp"

namespace muskat {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Equilibria, Spectrum, Verify, Velocity };

enum class InitKind { Modes, Tail, File };

/// Initial interface specification: an explicit mode list, a random-phase
/// spectral tail law |f^(k)| = amp (1+k^2)^{-exponent}, or a two-column
/// (x, f) file matching the grid.
struct InitialData {
  InitKind kind = InitKind::Modes;
  std::vector<std::tuple<int, double, double>> modes = {{1, 0.01, 0.0}};  // k:amp:phase
  double tail_exponent = 1.3;
  double tail_amplitude = 0.1;
  std::string file;

  PeriodicField realize(std::size_t n, std::uint64_t seed) const;
};

struct RunConfig {
  Command command = Command::Simulate;
  PhysicalParams params;
  std::size_t grid_n = 128;
  InitialData init;
  StepControl control;
  double t_end = 1.0;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool expect_termination = false;
  bool emit_plot = false;

  // equilibria command
  int ell = 1;
  double ds = 0.01;
  int steps = 40;
  double slope_cap = 25.0;
  bool branch_eigs = true;

  // velocity command
  std::size_t vel_ny = 9;
  double vel_ymax = 3.0;

  // spectrum command
  std::string dump_operator;

  void validate() const;  ///< throws ConfigError on violated invariants
};

/// Flat key=value config file ('#' comments) plus ordered overrides of the
/// same form. Unknown keys and malformed values are reported with their line
/// (or the offending override).
RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides,
                       Command command);

/// Overrides only (no file).
RunConfig parse_config(const std::vector<std::string>& overrides, Command command);

}  // namespace muskat
