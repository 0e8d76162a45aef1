#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "muskat/config.hpp"
#include "muskat/runner.hpp"

using namespace muskat;
namespace fs = std::filesystem;

namespace {

const char* kBinary = MUSKAT_LAB_BINARY;

struct CmdResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string& args, const fs::path& work) {
  const fs::path out = work / "stdout.txt";
  const fs::path err = work / "stderr.txt";
  const std::string cmd = std::string(kBinary) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int raw = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.stdout_text = slurp(out);
  r.stderr_text = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("muskat_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::size_t cols) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    if (row.size() >= cols) rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("parse_config: defaults, file, overrides, errors") {
  const fs::path dir = fresh_dir("cfg");
  const fs::path cfg_path = dir / "run.cfg";
  {
    std::ofstream os(cfg_path);
    os << "# minimal simulate configuration\n"
       << "n = 64\n"
       << "sigma = 0.0\n"
       << "rho_minus = 2.0\n"
       << "rho_plus = 1.0\n"
       << "modes = 1:0.01\n"
       << "t_end = 0.5\n";
  }
  const RunConfig cfg = parse_config(cfg_path.string(), {"seed=7"}, Command::Simulate);
  CHECK(cfg.grid_n == 64);
  CHECK(cfg.seed == 7);
  CHECK(cfg.t_end == 0.5);
  CHECK(cfg.init.modes.size() == 1);

  // invariant violation
  CHECK_THROWS_AS(parse_config(cfg_path.string(), {"sigma=-1"}, Command::Simulate),
                  ConfigError);
  // unknown keys are rejected with their location
  {
    std::ofstream os(cfg_path, std::ios::app);
    os << "no_such_key = 1\n";
  }
  try {
    parse_config(cfg_path.string(), {}, Command::Simulate);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":8") != std::string::npos);
    CHECK(std::string(e.what()).find("no_such_key") != std::string::npos);
  }
  // n must be a power of two in range
  CHECK_THROWS_AS(parse_config({"n=48"}, Command::Simulate), ConfigError);
  CHECK_THROWS_AS(parse_config({"n=2048"}, Command::Simulate), ConfigError);
}

TEST_CASE("initial data realizations") {
  const InitialData modes{InitKind::Modes, {{2, 0.5, 0.0}}, 1.3, 0.1, ""};
  const PeriodicField f = modes.realize(64, 1);
  CHECK(f.spectrum().abs(2) == doctest::Approx(0.25).epsilon(1e-12));

  InitialData tail;
  tail.kind = InitKind::Tail;
  tail.tail_amplitude = 0.2;
  tail.tail_exponent = 1.3;
  const PeriodicField g1 = tail.realize(64, 5);
  const PeriodicField g2 = tail.realize(64, 5);
  CHECK(max_abs(g1 - g2) == 0.0);  // reproducible from the seed
  const PeriodicField g3 = tail.realize(64, 6);
  CHECK(max_abs(g1 - g3) > 0.0);
  CHECK(g1.spectrum().abs(3) == doctest::Approx(0.2 * std::pow(10.0, -1.3)).epsilon(1e-10));
}

TEST_CASE("cli: simulate writes artifacts and decays at c_Theta") {
  const fs::path dir = fresh_dir("sim");
  const std::string out = (dir / "run").string();
  // c_Theta = 1 parameters, f0 = 0.01 cos x
  const CmdResult r = run_cli(
      "simulate --n 64 --out " + out +
          " --set mu_minus=2 --set mu_plus=1 --set rho_minus=3 --set rho_plus=0"
          " --set sigma=0 --set modes=1:0.01 --set t_end=3.6 --set rel_tol=1e-9"
          " --set dt_max=0.05",
      dir);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("a_mu=0.33") != std::string::npos);

  REQUIRE(fs::exists(out + "/run_header.json"));
  REQUIRE(fs::exists(out + "/series.csv"));
  REQUIRE(fs::exists(out + "/final_state.csv"));
  REQUIRE(fs::exists(out + "/spectrum.csv"));

  const auto header = nlohmann::json::parse(slurp(out + "/run_header.json"));
  CHECK(header["derived"]["c_theta"].get<double>() == doctest::Approx(1.0));

  // decay-rate fit straight from the series file
  const auto rows = read_csv(out + "/series.csv", 7);
  REQUIRE(rows.size() > 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (const auto& row : rows) {
    if (row[0] < 0.5 || row[0] > 3.5) continue;
    sx += row[0];
    sy += std::log(row[3]);
    sxx += row[0] * row[0];
    sxy += row[0] * std::log(row[3]);
    cnt += 1;
  }
  const double rate = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  CHECK(rate == doctest::Approx(1.0).epsilon(0.02));

  // determinism: the same run is byte-identical in its CSV artifacts
  const std::string out2 = (dir / "run2").string();
  const CmdResult r2 = run_cli(
      "simulate --n 64 --out " + out2 +
          " --set mu_minus=2 --set mu_plus=1 --set rho_minus=3 --set rho_plus=0"
          " --set sigma=0 --set modes=1:0.01 --set t_end=3.6 --set rel_tol=1e-9"
          " --set dt_max=0.05",
      dir);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out + "/series.csv") == slurp(out2 + "/series.csv"));
}

TEST_CASE("cli: config error paths exit with code 2") {
  const fs::path dir = fresh_dir("err");
  const CmdResult bad = run_cli("simulate --set sigma=-1 --out " + (dir / "x").string(), dir);
  CHECK(bad.exit_code == 2);
  CHECK(bad.stderr_text.find("sigma") != std::string::npos);

  const CmdResult unknown =
      run_cli("simulate --set nope=1 --out " + (dir / "y").string(), dir);
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.stderr_text.find("unknown key") != std::string::npos);
}

TEST_CASE("cli: blow-up and RT termination exit codes") {
  const fs::path dir = fresh_dir("term");
  // lambda = 2 (unstable): Theta = -2 sigma, blow-up against a small H2 cap
  const std::string common =
      " --set mu_minus=1 --set mu_plus=1 --set rho_minus=0 --set rho_plus=2"
      " --set sigma=1 --set gravity=1 --set modes=1:0.05 --set t_end=50"
      " --set max_h2_norm=0.5";
  const CmdResult blow = run_cli(
      "simulate --n 32 --out " + (dir / "b").string() + common, dir);
  CHECK(blow.exit_code == 3);
  const CmdResult expected = run_cli(
      "simulate --n 32 --out " + (dir / "be").string() + common + " --expect-termination",
      dir);
  CHECK(expected.exit_code == 0);

  // Theta < 0 with sigma = 0: immediate Rayleigh-Taylor exit
  const CmdResult rt = run_cli(
      "simulate --n 32 --out " + (dir / "rt").string() +
          " --set rho_minus=0 --set rho_plus=1 --set sigma=0 --set modes=1:0.01"
          " --set t_end=1",
      dir);
  CHECK(rt.exit_code == 4);
}

TEST_CASE("cli: equilibria branch with curvature fit and plot data") {
  const fs::path dir = fresh_dir("eq");
  const std::string out = (dir / "branch").string();
  const CmdResult r = run_cli(
      "equilibria --n 64 --ell 1 --ds 0.01 --steps 8 --out " + out +
          " --set branch_eigs=false --set sigma=1 --set rho_minus=0 --set rho_plus=0.9"
          " --emit-plot-data",
      dir);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out + "/branch.csv"));
  const auto rows = read_csv(out + "/branch.csv", 8);
  REQUIRE(rows.size() >= 5);
  // quadratic fit of lambda(s): lambda ~ 1 - 0.375 s^2
  double s2 = 0, s4 = 0, sl = 0, s2l = 0, cnt = 0;
  for (const auto& row : rows) {
    const double s = row[1], lam = row[2];
    s2 += s * s;
    s4 += s * s * s * s;
    sl += lam;
    s2l += s * s * lam;
    cnt += 1;
  }
  const double det = cnt * s4 - s2 * s2;
  const double c2 = (cnt * s2l - s2 * sl) / det;
  CHECK(c2 == doctest::Approx(-0.375).epsilon(0.02));

  REQUIRE(fs::exists(out + "/plots/branch_l1.dat"));
  REQUIRE(fs::exists(out + "/plots/profile_1.dat"));
  REQUIRE(fs::exists(out + "/plots/PLOTS_README.txt"));
}

TEST_CASE("cli: spectrum command with operator dump") {
  const fs::path dir = fresh_dir("spec");
  const std::string out = (dir / "s").string();
  const std::string dump = (dir / "op.bin").string();
  const CmdResult r = run_cli(
      "spectrum --n 32 --out " + out +
          " --set sigma=1 --set rho_minus=0 --set rho_plus=0.5 --set modes=1:0.001"
          " --set dump_operator=" + dump,
      dir);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out + "/eigs.csv"));
  REQUIRE(fs::exists(dump));
  const OperatorMatrix op = read_operator_dump(dump);
  CHECK(op.size() == 32);
  CHECK(op.kind == OperatorKind::A);
  const auto rows = read_csv(out + "/eigs.csv", 3);
  REQUIRE(!rows.empty());
  // leading eigenvalue -sigma b_mu (1 - lambda) = -0.25 at a near-flat state
  CHECK(rows.front()[1] == doctest::Approx(-0.25).epsilon(1e-2));
}

TEST_CASE("cli: velocity artifacts") {
  const fs::path dir = fresh_dir("vel");
  const std::string out = (dir / "v").string();
  const CmdResult r = run_cli(
      "velocity --n 64 --out " + out +
          " --set sigma=0.4 --set rho_minus=2 --set rho_plus=1 --set modes=1:0.15",
      dir);
  CHECK(r.exit_code == 0);
  const auto traces = read_csv(out + "/traces.csv", 8);
  REQUIRE(traces.size() == 64);
  for (const auto& row : traces)
    CHECK(row[7] == doctest::Approx(row[2]).epsilon(1e-8));  // jump recovers omega
  const auto vel = read_csv(out + "/velocity.csv", 4);
  CHECK(!vel.empty());
}

TEST_CASE("cli: verify is deterministic and passes") {
  const fs::path dir = fresh_dir("verify");
  const std::string out1 = (dir / "v1").string();
  const std::string out2 = (dir / "v2").string();
  const CmdResult r1 = run_cli("verify --seed 7 --n 64 --out " + out1, dir);
  CHECK(r1.exit_code == 0);
  CHECK(r1.stdout_text.find("ALL PASS") != std::string::npos);
  const CmdResult r2 = run_cli("verify --seed 7 --n 64 --out " + out2, dir);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out1 + "/verify_report.txt") == slurp(out2 + "/verify_report.txt"));
}

TEST_CASE("emit_plot_data: empty series produces empty file") {
  const fs::path dir = fresh_dir("plots");
  SimSeries empty;
  empty.final_state.f = PeriodicField(32);
  emit_series_plot_data(empty, dir.string());
  REQUIRE(fs::exists(dir / "decay.dat"));
  CHECK(fs::file_size(dir / "decay.dat") == 0);
}
