#pragma once

#include <string>

#include "muskat/config.hpp"
#include "muskat/equilibria.hpp"

namespace muskat {

/// Exit codes of the command runner (also the process exit codes).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBlowup = 3;
inline constexpr int kExitRayleighTaylor = 4;
inline constexpr int kExitVerifyFailed = 5;

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
};

/// Executes the configured command and writes its artifacts under
/// cfg.out_dir: run_header.json always; series.csv/final_state.csv/
/// spectrum.csv for simulate; branch.csv for equilibria; eigs.csv for
/// spectrum; traces.csv/velocity.csv for velocity; verify_report.txt for
/// verify. Plot-ready .dat files are added when cfg.emit_plot is set.
RunResult run(const RunConfig& cfg);

/// Whitespace-column plot files for a simulation series (decay.dat,
/// spectrum_final.dat) plus a PLOTS_README.txt describing the columns.
void emit_series_plot_data(const SimSeries& series, const std::string& dir);

/// Branch diagram (branch_l<ell>.dat: lambda, max_f) and three nested finger
/// profiles along the branch.
void emit_branch_plot_data(const Branch& branch, const std::string& dir);

/// The true vortex-sheet strength of a frozen interface,
/// 2 b_mu (1 + a_mu A)^{-1}[(sigma kappa(f) - Theta f)'].
PeriodicField sheet_strength(const PeriodicField& f, const PhysicalParams& p);

}  // namespace muskat
