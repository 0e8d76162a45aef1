#include "doctest.h"

#include <cmath>
#include <numbers>

#include "muskat/equilibria.hpp"

using namespace muskat;

namespace {
constexpr double kPi = std::numbers::pi;

/// Independent gamma implementation (Lanczos, g=7) used to cross-check the
/// closed form of lambda_star against std::tgamma.
double lanczos_gamma(double x) {
  static const double coef[9] = {0.99999999999980993,  676.5203681218851,
                                 -1259.1392167224028,  771.32342877765313,
                                 -176.61502916214059,  12.507343278686905,
                                 -0.13857109526572012, 9.9843695780195716e-6,
                                 1.5056327351493116e-7};
  if (x < 0.5) return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = coef[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double sine_content(const PeriodicField& f) {
  const Spectrum s = f.spectrum();
  double m = 0.0;
  for (std::size_t k = 1; k < f.size() / 2; ++k) m = std::max(m, std::abs(s.raw()[k].imag()));
  return m;
}

}  // namespace

TEST_CASE("capillarity residual: trivial and small-amplitude") {
  const std::size_t n = 64;
  CHECK(max_abs(capillarity_residual(0.7, PeriodicField(n))) == 0.0);

  const double eps = 1e-3;
  const PeriodicField f = PeriodicField::from_modes(n, {{1, eps, 0.0}});
  CHECK(max_abs(capillarity_residual(1.0, f)) <= 5.0 * eps * eps * eps);
}

TEST_CASE("lambda_star: two independent gamma evaluations") {
  const double ls = lambda_star();
  CHECK(ls == doctest::Approx(0.3).epsilon(0.05));          // rough estimate
  CHECK(ls == doctest::Approx(0.29090).epsilon(2e-4));      // quoted value

  const double beta = lanczos_gamma(0.75) * lanczos_gamma(0.5) / lanczos_gamma(1.25);
  const double ls_oracle = beta * beta / (2.0 * kPi * kPi);
  CHECK(ls == doctest::Approx(ls_oracle).epsilon(1e-10));

  CHECK(finger_amplitude_limit() == doctest::Approx(2.6221).epsilon(2e-4));
}

TEST_CASE("newton_solve: trivial basin, symmetry preservation, seeded branch point") {
  const std::size_t n = 64;
  // lambda = 2 with a tiny cos x guess falls back to the flat solution
  const PeriodicField guess = PeriodicField::from_modes(n, {{1, 1e-3, 0.0}});
  const PeriodicField sol = newton_solve(2.0, guess);
  CHECK(max_abs(sol) <= 1e-11);

  // continuation-seeded solve at lambda = 0.9
  ContinuationOptions opts;
  opts.grid_n = n;
  const BranchPoint bp = solve_at_lambda(1, 0.9, opts);
  CHECK(max_abs(capillarity_residual(0.9, bp.f)) <= 1e-11 * (1.0 + sobolev_norm(bp.f, 3.0)));
  CHECK(bp.s > 0.0);
  CHECK(sine_content(bp.f) <= 1e-12);
  CHECK(std::abs(mean(bp.f)) <= 1e-12);
}

TEST_CASE("pendulum oracle: residual, amplitude limits, fold approach") {
  const std::size_t n = 128;
  const PeriodicField f6 = pendulum_oracle(0.6, n);
  CHECK(l2_norm(capillarity_residual(0.6, f6)) <= 1e-7);

  // amplitude vanishes towards lambda = 1
  CHECK(max_abs(pendulum_oracle(0.999, n)) <= 0.06);
  CHECK(max_abs(pendulum_oracle(0.99, n)) > max_abs(pendulum_oracle(0.999, n)));

  // slope grows without bound towards the fold
  const double s32 = max_abs(derivative(pendulum_oracle(0.32, 256), 1));
  const double s30 = max_abs(derivative(pendulum_oracle(0.30, 256), 1));
  CHECK(s32 > 3.0);
  CHECK(s30 > s32);

  CHECK_THROWS_AS(pendulum_oracle(0.28, n), NoGraph);
  CHECK_THROWS_AS(pendulum_oracle(1.2, n), std::invalid_argument);
}

TEST_CASE("cross-validation: continuation equals pendulum oracle at lambda=0.6") {
  ContinuationOptions opts;
  opts.grid_n = 128;
  const BranchPoint bp = solve_at_lambda(1, 0.6, opts);
  const PeriodicField oracle = pendulum_oracle(0.6, 128);
  CHECK(l2_norm(bp.f - oracle) <= 1e-6);
}

TEST_CASE("branch fits: lambda curvature -3/8 ell^4 within 2 percent") {
  ContinuationOptions opts;
  opts.grid_n = 64;
  for (int ell : {1, 2}) {
    const Branch br = continue_branch(ell, 0.01, 8, opts);
    REQUIRE(br.points.size() >= 4);
    const double c2 = fit_lambda_curvature(br, 0.081);
    const double expect = -0.375 * std::pow(ell, 4);
    CHECK(c2 == doctest::Approx(expect).epsilon(0.02));
    // lambda decreases with |s| near the bifurcation point
    for (std::size_t i = 2; i < br.points.size(); ++i)
      CHECK(br.points[i].lambda < br.points[i - 1].lambda);
  }
}

TEST_CASE("branch scaling law between ell=2 and ell=1") {
  ContinuationOptions opts;
  opts.grid_n = 128;
  const BranchPoint fine = solve_at_lambda(1, 0.9, opts);
  const BranchPoint coarse = solve_at_lambda(2, 3.6, opts);
  // f_{ell=2, lambda} = (1/2) f_{ell=1, lambda/4}(2x), exact on the grid
  const std::size_t n = opts.grid_n;
  // the node x_j = -pi + j h doubles to the node with index 2j + n/2 (mod n)
  PeriodicField mapped(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t j2 = (2 * j + n / 2) % n;
    mapped.at(j) = 0.5 * fine.f[j2];
  }
  CHECK(l2_norm(coarse.f - mapped) <= 1e-8);
}

TEST_CASE("jacobian spectrum at the flat interface") {
  const std::size_t n = 64;
  const double lambda = 0.5;
  const PhysicalParams p = normalized_params(lambda, 0.25);
  const auto eigs = jacobian_spectrum(PeriodicField(n), p, Regime::SigmaPositive);

  // eigenvalues -(k^3 - lambda k), each double, for k <= n/4
  for (int k = 1; k <= static_cast<int>(n) / 4; ++k) {
    const double expect = -(std::pow(k, 3) - lambda * k);
    int found = 0;
    for (const auto& z : eigs)
      if (std::abs(z.real() - expect) <= 1e-6 * std::abs(expect) + 1e-9 &&
          std::abs(z.imag()) <= 1e-6 * std::abs(expect) + 1e-9)
        ++found;
    CHECK(found == 2);
  }
  // all eigenvalues at most -sigma b_mu (1 - lambda) for lambda < 1
  for (const auto& z : eigs) CHECK(z.real() <= -(1.0 - lambda) + 1e-7);

  // sigma = 0 regime: eigenvalues -c_Theta k, double
  PhysicalParams p0;
  p0.mu_minus = 2.0;
  p0.mu_plus = 1.0;
  p0.rho_minus = 3.0;
  p0.rho_plus = 0.0;
  p0.permeability = 1.0;
  p0.sigma = 0.0;
  const DerivedConstants c0 = derive_constants(p0);
  const auto eigs0 = jacobian_spectrum(PeriodicField(n), p0, Regime::SigmaZero);
  for (int k = 1; k <= static_cast<int>(n) / 4; ++k) {
    int found = 0;
    for (const auto& z : eigs0)
      if (std::abs(z.real() + c0.c_theta * k) <= 1e-6 * c0.c_theta * k) ++found;
    CHECK(found == 2);
  }

  // lambda = 1: the k=1 symbol vanishes (two-dimensional kernel)
  const PhysicalParams pc = normalized_params(1.0, 0.25);
  const auto eigsc = jacobian_spectrum(PeriodicField(n), pc, Regime::SigmaPositive);
  int zeros = 0;
  for (const auto& z : eigsc)
    if (std::abs(z) <= 1e-7) ++zeros;
  CHECK(zeros == 2);
}

TEST_CASE("instability above the bifurcation point and along ell>=2 branches") {
  const std::size_t n = 64;
  // lambda > 1 at f = 0: at least one positive eigenvalue
  const auto eigs = jacobian_spectrum(PeriodicField(n), normalized_params(1.5, 0.0),
                                      Regime::SigmaPositive);
  CHECK(eigs.front().real() > 0.0);

  // small finger on the ell = 2 branch keeps a positive eigenvalue
  ContinuationOptions opts;
  opts.grid_n = n;
  const BranchPoint bp = solve_at_amplitude(2, 0.05, opts);
  const auto eigs2 = jacobian_spectrum(bp.f, normalized_params(bp.lambda, 0.0),
                                       Regime::SigmaPositive);
  CHECK(eigs2.front().real() > 0.0);
}

TEST_CASE("exchange of stability along the ell=1 branch") {
  ContinuationOptions opts;
  opts.grid_n = 64;
  const auto table = exchange_of_stability({0.0, 0.02, 0.05, -0.05, 0.1}, opts);
  REQUIRE(table.size() == 5);
  CHECK(std::abs(table[0].z) <= 1e-7);
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i].z > 0.0);

  // ratio z(s) * sigma b_mu / (-s lambda'(s)) -> 1 with lambda' from the
  // fitted branch
  const Branch br = continue_branch(1, 0.005, 10, opts);
  const double c2 = fit_lambda_curvature(br, 0.06);
  const double s = 0.02;
  const double lambda_prime = 2.0 * c2 * s;
  const double ratio = table[1].z / (-s * lambda_prime);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("branch export fields: lead eigenvalue and tags") {
  ContinuationOptions opts;
  opts.grid_n = 32;
  opts.with_eigenvalues = true;
  opts.a_mu = 0.0;
  const Branch br = continue_branch(1, 0.02, 3, opts);
  REQUIRE(br.points.size() >= 3);
  // the finger is unstable: z(s) > 0 for s != 0
  CHECK(br.points.back().lead_eig > 0.0);
  CHECK(br.points.back().tag == StabilityTag::Unstable);
}

TEST_CASE("fold: ell=1 branch continued to slope 20 lands near lambda_star") {
  ContinuationOptions opts;
  opts.grid_n = 256;
  opts.slope_cap = 20.0;
  const Branch br = continue_branch(1, 0.05, 400, opts);
  REQUIRE(br.reached_slope_cap);
  const BranchPoint& last = br.points.back();
  CHECK(last.lambda == doctest::Approx(0.29090).epsilon(0.03));
  CHECK(last.max_f() == doctest::Approx(2.6221).epsilon(0.05));
}
