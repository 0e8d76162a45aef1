#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "muskat/config.hpp"
#include "muskat/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  long long seed = -1;
  long long grid_n = -1;
  bool expect_termination = false;
  bool emit_plot = false;
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "flat key=value config file");
  app->add_option("--set", opts.sets, "override a config key, e.g. --set sigma=0.5");
  app->add_option("--out", opts.out_dir, "output directory");
  app->add_option("--seed", opts.seed, "seed for randomized pieces");
  app->add_option("--n", opts.grid_n, "grid size (power of two, 32..1024)");
  app->add_flag("--expect-termination", opts.expect_termination,
                "exit 0 on blow-up / Rayleigh-Taylor termination");
  app->add_flag("--emit-plot-data", opts.emit_plot, "write plot-ready .dat files");
}

int run_command(const CommonOpts& opts, muskat::Command command,
                const std::vector<std::string>& extra) {
  std::vector<std::string> overrides = opts.sets;
  for (const auto& e : extra) overrides.push_back(e);
  if (!opts.out_dir.empty()) overrides.push_back("out_dir=" + opts.out_dir);
  if (opts.seed >= 0) overrides.push_back("seed=" + std::to_string(opts.seed));
  if (opts.grid_n >= 0) overrides.push_back("n=" + std::to_string(opts.grid_n));
  if (opts.expect_termination) overrides.push_back("expect_termination=true");
  if (opts.emit_plot) overrides.push_back("emit_plot=true");

  try {
    const muskat::RunConfig cfg = muskat::parse_config(opts.config_path, overrides, command);
    const muskat::DerivedConstants c = muskat::derive_constants(cfg.params);
    std::printf("muskat-lab: n=%zu seed=%llu Theta=%.17g a_mu=%.17g b_mu=%.17g c_Theta=%.17g",
                cfg.grid_n, static_cast<unsigned long long>(cfg.seed), c.theta, c.a_mu, c.b_mu,
                c.c_theta);
    if (c.lambda) std::printf(" lambda=%.17g", *c.lambda);
    std::printf("\n");
    const muskat::RunResult result = muskat::run(cfg);
    if (!result.message.empty()) std::printf("%s\n", result.message.c_str());
    return result.exit_code;
  } catch (const muskat::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return muskat::kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"muskat-lab: periodic two-phase interface laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* sim = app.add_subcommand("simulate", "evolve an interface and record diagnostics");
  add_common(sim, opts);
  double t_end = -1.0;
  sim->add_option("--t-end", t_end, "final time");

  auto* eq = app.add_subcommand("equilibria", "continue a finger branch");
  add_common(eq, opts);
  long long ell = -1;
  int steps = -1;
  double ds = -1.0;
  eq->add_option("--ell", ell, "branch mode number");
  eq->add_option("--ds", ds, "initial arclength step");
  eq->add_option("--steps", steps, "number of continuation points");

  auto* sp = app.add_subcommand("spectrum", "linearization eigenvalues at the initial state");
  add_common(sp, opts);
  std::string dump_op;
  sp->add_option("--dump-operator", dump_op, "binary dump of the assembled A operator");

  auto* ve = app.add_subcommand("verify", "run the randomized property suites");
  add_common(ve, opts);

  auto* vl = app.add_subcommand("velocity", "evaluate traces and the off-interface field");
  add_common(vl, opts);

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> extra;
  if (sim->parsed()) {
    if (t_end > 0.0) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "t_end=%.17g", t_end);
      extra.push_back(buf);
    }
    return run_command(opts, muskat::Command::Simulate, extra);
  }
  if (eq->parsed()) {
    if (ell > 0) extra.push_back("ell=" + std::to_string(ell));
    if (ds > 0) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "ds=%.17g", ds);
      extra.push_back(buf);
    }
    if (steps > 0) extra.push_back("steps=" + std::to_string(steps));
    return run_command(opts, muskat::Command::Equilibria, extra);
  }
  if (sp->parsed()) {
    if (!dump_op.empty()) extra.push_back("dump_operator=" + dump_op);
    return run_command(opts, muskat::Command::Spectrum, extra);
  }
  if (ve->parsed()) return run_command(opts, muskat::Command::Verify, extra);
  if (vl->parsed()) return run_command(opts, muskat::Command::Velocity, extra);
  return muskat::kExitConfig;
}
