#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "muskat/periodic_field.hpp"

using namespace muskat;

namespace {
constexpr double kPi = std::numbers::pi;

PeriodicField mode(std::size_t n, int k, double amp = 1.0, double phase = 0.0) {
  return PeriodicField::from_modes(n, {{k, amp, phase}});
}
}  // namespace

TEST_CASE("nodal/spectral round trip") {
  const std::size_t n = 64;
  const PeriodicField f = random_band_limited(n, 16, 11, 1.0);
  const PeriodicField back = PeriodicField::from_spectrum(f.spectrum());
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(back[j] - f[j]));
  CHECK(err <= 1e-13 * std::max(1.0, max_abs(f)));
}

TEST_CASE("spectrum satisfies Hermitian symmetry and real Nyquist") {
  const PeriodicField f = random_band_limited(64, 30, 3, 2.0);
  const Spectrum s = f.spectrum();
  CHECK(s.coeff(-5) == std::conj(s.coeff(5)));
  CHECK(s.raw()[32].imag() == 0.0);
}

TEST_CASE("derivative: trivial examples") {
  const std::size_t n = 32;
  const PeriodicField c1 = mode(n, 1);
  const PeriodicField d = derivative(c1, 1);
  const PeriodicField expect = mode(n, 1, 1.0, kPi / 2.0);  // -sin x
  CHECK(max_abs(d - expect) <= 1e-13);

  const PeriodicField ones = PeriodicField::from_function(n, [](double) { return 1.0; });
  CHECK(max_abs(derivative(ones, 1)) <= 1e-14);
}

TEST_CASE("derivative: mode-wise symbolic oracle up to order 3") {
  // Oracle: each mode amp*cos(kx+phi) differentiates to amp*k^r*cos(kx+phi+r*pi/2).
  const std::size_t n = 64;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::tuple<int, double, double>> modes;
  for (int k = 1; k <= 8; ++k) modes.emplace_back(k, uni(gen), uni(gen));
  const PeriodicField f = PeriodicField::from_modes(n, modes);
  for (int order = 1; order <= 3; ++order) {
    std::vector<std::tuple<int, double, double>> dmodes;
    for (const auto& [k, amp, phase] : modes)
      dmodes.emplace_back(k, amp * std::pow(k, order), phase + order * kPi / 2.0);
    const PeriodicField expect = PeriodicField::from_modes(n, dmodes);
    CHECK(max_abs(derivative(f, order) - expect) <= 1e-12 * std::max(1.0, max_abs(expect)));
  }
}

TEST_CASE("derivative rejects bad orders") {
  const PeriodicField f(32);
  CHECK_THROWS_AS(derivative(f, 0), std::invalid_argument);
  CHECK_THROWS_AS(derivative(f, 5), std::invalid_argument);
}

TEST_CASE("derivative of derivative matches order 2") {
  const PeriodicField f = random_band_limited(128, 20, 5, 1.5);
  const PeriodicField twice = derivative(derivative(f, 1), 1);
  CHECK(l2_norm(twice - derivative(f, 2)) <= 1e-12 * (1.0 + l2_norm(derivative(f, 2))));
}

TEST_CASE("hilbert transform on modes") {
  const std::size_t n = 64;
  CHECK(max_abs(hilbert(mode(n, 3)) - mode(n, 3, 1.0, -kPi / 2.0)) <= 1e-13);  // cos->sin
  const PeriodicField ones = PeriodicField::from_function(n, [](double) { return 1.0; });
  CHECK(max_abs(hilbert(ones)) <= 1e-15);
}

TEST_CASE("hilbert squared is minus the mean-free projection") {
  const PeriodicField f = random_band_limited(128, 30, 9, 1.0) +
                          PeriodicField::from_function(128, [](double) { return 0.7; });
  const PeriodicField hh = hilbert(hilbert(f));
  const PeriodicField expect = -1.0 * project_zero_mean(f);
  CHECK(max_abs(hh - expect) <= 1e-13 * (1.0 + max_abs(f)));
}

TEST_CASE("hilbert is skew-adjoint on mean-zero fields") {
  const PeriodicField f = random_band_limited(64, 14, 21, 1.0);
  const PeriodicField g = random_band_limited(64, 14, 22, 1.0);
  CHECK(std::abs(inner_product(hilbert(f), g) + inner_product(f, hilbert(g))) <= 1e-12);
}

TEST_CASE("fractional multiplier examples and identity Lambda = H d/dx") {
  const std::size_t n = 64;
  CHECK(max_abs(lambda_op(mode(n, 2)) - mode(n, 2, 2.0)) <= 1e-13);
  CHECK(max_abs(lambda_cubed(mode(n, 1)) - mode(n, 1)) <= 1e-11);

  const PeriodicField f = random_band_limited(n, 20, 33, 2.0);
  CHECK(max_abs(lambda_op(f) - hilbert(derivative(f, 1))) <= 1e-12);
}

TEST_CASE("project_zero_mean") {
  const std::size_t n = 64;
  const PeriodicField f =
      PeriodicField::from_function(n, [](double x) { return 1.0 + std::cos(x); });
  CHECK(max_abs(project_zero_mean(f) - mode(n, 1)) <= 1e-14);
  CHECK(max_abs(project_zero_mean(mode(n, 1)) - mode(n, 1)) <= 1e-15);

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = uni(gen);
  const PeriodicField r(v);
  CHECK(std::abs(mean(project_zero_mean(r))) <= 1e-15);
  CHECK(max_abs(project_zero_mean(project_zero_mean(r)) - project_zero_mean(r)) <= 1e-15);
}

TEST_CASE("sobolev norms against Parseval oracle") {
  const std::size_t n = 64;
  CHECK(sobolev_norm(PeriodicField(n), 2.0) == 0.0);
  CHECK(sobolev_norm(mode(n, 1), 0.0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(sobolev_norm(mode(n, 2), 2.0) ==
        doctest::Approx(std::sqrt(kPi * 25.0)).epsilon(1e-13));
  const PeriodicField ones = PeriodicField::from_function(n, [](double) { return 1.0; });
  CHECK(sobolev_norm(ones, 0.0) == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-13));
}

TEST_CASE("half shift: interpolation oracle") {
  const std::size_t n = 64;
  const double a = kPi / static_cast<double>(n);
  const PeriodicField c = mode(n, 1);
  const PeriodicField expect =
      PeriodicField::from_function(n, [a](double x) { return std::cos(x - a); });
  CHECK(max_abs(half_shift_back(c) - expect) <= 1e-14);

  const PeriodicField ones = PeriodicField::from_function(n, [](double) { return 1.0; });
  CHECK(max_abs(half_shift_back(ones) - ones) <= 1e-15);

  const PeriodicField f = random_band_limited(n, 20, 77, 1.0);
  const PeriodicField shifted = half_shift_back(f);
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    err = std::max(err, std::abs(shifted[j] - f.eval(PeriodicField::node(j, n) - a)));
  CHECK(err <= 1e-13);

  const PeriodicField fwd = half_shift_forward(f);
  for (std::size_t j = 0; j < n; ++j)
    err = std::max(err, std::abs(fwd[j] - f.eval(PeriodicField::node(j, n) + a)));
  CHECK(err <= 1e-13);
}

TEST_CASE("operations are linear") {
  const std::size_t n = 64;
  const PeriodicField f = random_band_limited(n, 10, 1, 1.0);
  const PeriodicField g = random_band_limited(n, 10, 2, 1.0);
  const PeriodicField sum = f + g;
  CHECK(max_abs(derivative(sum, 2) - derivative(f, 2) - derivative(g, 2)) <= 1e-11);
  CHECK(max_abs(hilbert(sum) - hilbert(f) - hilbert(g)) <= 1e-12);
  CHECK(max_abs(half_shift_back(sum) - half_shift_back(f) - half_shift_back(g)) <= 1e-12);
}

TEST_CASE("resample reproduces the interpolant on the fine grid") {
  const std::size_t n = 32;
  const PeriodicField f = random_band_limited(n, 12, 55, 1.0);
  const PeriodicField fine = resample(f, 128);
  double err = 0.0;
  for (std::size_t j = 0; j < fine.size(); ++j)
    err = std::max(err, std::abs(fine[j] - f.eval(PeriodicField::node(j, 128))));
  CHECK(err <= 1e-12);
}

TEST_CASE("dealias cuts the top third of the spectrum") {
  const std::size_t n = 64;
  const PeriodicField f = mode(n, 5) + mode(n, 30);
  const PeriodicField cut = dealias_two_thirds(f);
  const Spectrum s = cut.spectrum();
  CHECK(std::abs(s.coeff(30)) <= 1e-15);
  CHECK(std::abs(s.coeff(5) - std::complex<double>(0.5, 0.0)) <= 1e-14);
}

TEST_CASE("grid size validation") {
  CHECK_THROWS_AS(PeriodicField(std::vector<double>(7, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicField(6), std::invalid_argument);
}
