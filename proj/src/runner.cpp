#include "muskat/runner.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "muskat/verify.hpp"

namespace muskat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open output file " + p.string());
  return os;
}

const char* tag_name(StabilityTag t) {
  switch (t) {
    case StabilityTag::Stable: return "stable";
    case StabilityTag::Unstable: return "unstable";
    case StabilityTag::Fold: return "fold";
    default: return "unknown";
  }
}

void write_run_header(const RunConfig& cfg, const fs::path& dir) {
  const DerivedConstants c = derive_constants(cfg.params);
  json j;
  switch (cfg.command) {
    case Command::Simulate: j["command"] = "simulate"; break;
    case Command::Equilibria: j["command"] = "equilibria"; break;
    case Command::Spectrum: j["command"] = "spectrum"; break;
    case Command::Verify: j["command"] = "verify"; break;
    case Command::Velocity: j["command"] = "velocity"; break;
  }
  j["version"] = "muskat-lab 0.1.0";
  j["n"] = cfg.grid_n;
  j["seed"] = cfg.seed;
  j["t_end"] = cfg.t_end;
  j["params"] = {{"mu_minus", cfg.params.mu_minus},
                 {"mu_plus", cfg.params.mu_plus},
                 {"rho_minus", cfg.params.rho_minus},
                 {"rho_plus", cfg.params.rho_plus},
                 {"permeability", cfg.params.permeability},
                 {"sigma", cfg.params.sigma},
                 {"gravity", cfg.params.gravity},
                 {"frame_speed", cfg.params.frame_speed}};
  j["derived"] = {{"theta", c.theta},
                  {"a_mu", c.a_mu},
                  {"b_mu", c.b_mu},
                  {"c_theta", c.c_theta}};
  if (c.lambda)
    j["derived"]["lambda"] = *c.lambda;
  else
    j["derived"]["lambda"] = nullptr;
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                            now.time_since_epoch())
                            .count();
  auto os = open_out(dir / "run_header.json");
  os << j.dump(2) << "\n";
}

void write_series_csv(const SimSeries& series, const fs::path& path) {
  auto os = open_out(path);
  os << "t,dt,mean,l2,h2,min_a_rt,tail_max\n";
  for (const auto& r : series.records)
    os << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.mean) << ',' << fmt(r.l2) << ','
       << fmt(r.h2) << ',' << fmt(r.min_a_rt) << ',' << fmt(r.tail_max) << "\n";
}

void write_state_csv(const PeriodicField& f, const fs::path& path) {
  auto os = open_out(path);
  os << "x,f\n";
  for (std::size_t j = 0; j < f.size(); ++j) os << fmt(f.node(j)) << ',' << fmt(f[j]) << "\n";
}

void write_spectrum_csv(const PeriodicField& f, const fs::path& path) {
  auto os = open_out(path);
  os << "k,abs_fk\n";
  const Spectrum s = f.spectrum();
  for (std::size_t k = 0; k <= f.size() / 2; ++k)
    os << k << ',' << fmt(std::abs(s.raw()[k])) << "\n";
}

void write_branch_csv(const Branch& br, const fs::path& path) {
  auto os = open_out(path);
  os << "ell,s,lambda,arclen,max_f,max_fprime,lead_eig,tag\n";
  for (const auto& p : br.points)
    os << br.ell << ',' << fmt(p.s) << ',' << fmt(p.lambda) << ',' << fmt(p.arclen) << ','
       << fmt(p.max_f()) << ',' << fmt(p.max_fprime()) << ',' << fmt(p.lead_eig) << ','
       << tag_name(p.tag) << "\n";
}

int run_simulate(const RunConfig& cfg, const fs::path& dir) {
  const PeriodicField f0 = cfg.init.realize(cfg.grid_n, cfg.seed);
  SimulationState state = SimulationState::make(f0, cfg.params);
  const SimSeries series = simulate(std::move(state), cfg.control, cfg.t_end);
  write_series_csv(series, dir / "series.csv");
  write_state_csv(series.final_state.f, dir / "final_state.csv");
  write_spectrum_csv(series.final_state.f, dir / "spectrum.csv");
  if (cfg.emit_plot) emit_series_plot_data(series, (dir / "plots").string());
  if (series.status == SimStatus::TerminatedBlowup && !cfg.expect_termination)
    return kExitBlowup;
  if (series.status == SimStatus::TerminatedRT && !cfg.expect_termination)
    return kExitRayleighTaylor;
  return kExitOk;
}

int run_equilibria(const RunConfig& cfg, const fs::path& dir) {
  const DerivedConstants c = derive_constants(cfg.params);
  ContinuationOptions opts;
  opts.grid_n = cfg.grid_n;
  opts.slope_cap = cfg.slope_cap;
  opts.with_eigenvalues = cfg.branch_eigs;
  opts.a_mu = c.a_mu;
  const Branch br = continue_branch(cfg.ell, cfg.ds, cfg.steps, opts);
  write_branch_csv(br, dir / "branch.csv");
  if (cfg.emit_plot) emit_branch_plot_data(br, (dir / "plots").string());
  return kExitOk;
}

int run_spectrum(const RunConfig& cfg, const fs::path& dir) {
  const PeriodicField f0 = cfg.init.realize(cfg.grid_n, cfg.seed);
  const Regime regime = cfg.params.sigma > 0.0 ? Regime::SigmaPositive : Regime::SigmaZero;
  const auto eigs = jacobian_spectrum(f0, cfg.params, regime);
  auto os = open_out(dir / "eigs.csv");
  os << "index,re,im\n";
  for (std::size_t i = 0; i < eigs.size(); ++i)
    os << i << ',' << fmt(eigs[i].real()) << ',' << fmt(eigs[i].imag()) << "\n";
  if (!cfg.dump_operator.empty())
    write_operator_dump(cfg.dump_operator, assemble(f0, OperatorKind::A));
  return kExitOk;
}

int run_verify(const RunConfig& cfg, const fs::path& dir) {
  const VerifyReport report = run_verification(cfg.seed, cfg.grid_n);
  const std::string table = format_verify_report(report);
  std::fputs(table.c_str(), stdout);
  auto os = open_out(dir / "verify_report.txt");
  os << table;
  return report.all_pass ? kExitOk : kExitVerifyFailed;
}

int run_velocity(const RunConfig& cfg, const fs::path& dir) {
  const PeriodicField f = cfg.init.realize(cfg.grid_n, cfg.seed);
  const PeriodicField omega = sheet_strength(f, cfg.params);
  const std::size_t n = cfg.grid_n;

  const auto [m1, m2] = velocity_trace(f, omega, Side::Minus);
  const auto [p1, p2] = velocity_trace(f, omega, Side::Plus);
  const PeriodicField fp = derivative(f, 1);
  {
    auto os = open_out(dir / "traces.csv");
    os << "x,f,omega,v1_minus,v2_minus,v1_plus,v2_plus,tangential_jump\n";
    for (std::size_t j = 0; j < n; ++j) {
      const double jump = (m1[j] - p1[j]) + fp[j] * (m2[j] - p2[j]);
      os << fmt(f.node(j)) << ',' << fmt(f[j]) << ',' << fmt(omega[j]) << ',' << fmt(m1[j])
         << ',' << fmt(m2[j]) << ',' << fmt(p1[j]) << ',' << fmt(p2[j]) << ',' << fmt(jump)
         << "\n";
    }
  }
  {
    const VelocityEvaluator eval(f, omega);
    auto os = open_out(dir / "velocity.csv");
    os << "x,y,vx,vy\n";
    const std::size_t nx = 32;
    for (std::size_t iy = 0; iy < cfg.vel_ny; ++iy) {
      // symmetric ladder of heights clear of the sheet
      const double frac = cfg.vel_ny == 1 ? 0.0
                                          : static_cast<double>(iy) /
                                                static_cast<double>(cfg.vel_ny - 1);
      const double y = -cfg.vel_ymax + 2.0 * cfg.vel_ymax * frac;
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const double x = PeriodicField::node(ix * (n / nx), n);
        if (std::abs(y - f.eval(x)) < 0.25) continue;  // keep clear of the sheet
        const Vec2 v = eval(x, y);
        os << fmt(x) << ',' << fmt(y) << ',' << fmt(v[0]) << ',' << fmt(v[1]) << "\n";
      }
    }
  }
  return kExitOk;
}

}  // namespace

PeriodicField sheet_strength(const PeriodicField& f, const PhysicalParams& p) {
  const DerivedConstants c = derive_constants(p);
  PeriodicField g = p.sigma * curvature(f);
  g -= c.theta * f;
  PeriodicField rhs = project_zero_mean(derivative(g, 1));
  rhs *= 2.0 * c.b_mu;
  return solve_omega(f, c.a_mu, rhs);
}

void emit_series_plot_data(const SimSeries& series, const std::string& dir) {
  fs::create_directories(dir);
  {
    auto os = open_out(fs::path(dir) / "decay.dat");
    for (const auto& r : series.records)
      os << fmt(r.t) << ' ' << fmt(r.l2) << ' ' << fmt(r.h2) << "\n";
  }
  {
    auto os = open_out(fs::path(dir) / "spectrum_final.dat");
    if (!series.records.empty()) {
      const Spectrum s = series.final_state.f.spectrum();
      for (std::size_t k = 0; k <= series.final_state.f.size() / 2; ++k)
        os << k << ' ' << fmt(std::abs(s.raw()[k])) << "\n";
    }
  }
  auto os = open_out(fs::path(dir) / "PLOTS_README.txt");
  os << "decay.dat:          t  l2_norm  h2_norm (one row per accepted step)\n"
     << "spectrum_final.dat: k  |f_hat(k)| of the final state\n";
}

void emit_branch_plot_data(const Branch& branch, const std::string& dir) {
  fs::create_directories(dir);
  {
    auto os = open_out(fs::path(dir) / ("branch_l" + std::to_string(branch.ell) + ".dat"));
    for (const auto& p : branch.points) os << fmt(p.lambda) << ' ' << fmt(p.max_f()) << "\n";
  }
  // three nested profiles along the branch (amplitude grows as lambda drops)
  const std::size_t m = branch.points.size();
  std::size_t count = 0;
  for (std::size_t frac : {3u, 6u, 9u}) {
    if (m < 2) break;
    const std::size_t idx = std::min(m - 1, frac * (m - 1) / 9);
    const BranchPoint& p = branch.points[idx];
    auto os = open_out(fs::path(dir) / ("profile_" + std::to_string(++count) + ".dat"));
    os << "# lambda = " << fmt(p.lambda) << "\n";
    for (std::size_t j = 0; j < p.f.size(); ++j)
      os << fmt(p.f.node(j)) << ' ' << fmt(p.f[j]) << "\n";
  }
  auto os = open_out(fs::path(dir) / "PLOTS_README.txt");
  os << "branch_l<ell>.dat: lambda  max|f| along the bifurcation branch\n"
     << "profile_<i>.dat:   x  f(x) finger profiles at three stations along\n"
     << "                   the branch (lambda in the header comment)\n";
}

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_run_header(cfg, dir);

  RunResult result;
  try {
    switch (cfg.command) {
      case Command::Simulate: result.exit_code = run_simulate(cfg, dir); break;
      case Command::Equilibria: result.exit_code = run_equilibria(cfg, dir); break;
      case Command::Spectrum: result.exit_code = run_spectrum(cfg, dir); break;
      case Command::Verify: result.exit_code = run_verify(cfg, dir); break;
      case Command::Velocity: result.exit_code = run_velocity(cfg, dir); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
  }
  if (result.exit_code == kExitBlowup) result.message = "terminated: blow-up";
  if (result.exit_code == kExitRayleighTaylor)
    result.message = "terminated: Rayleigh-Taylor boundary";
  return result;
}

}  // namespace muskat
