#include "muskat/periodic_field.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace muskat {

namespace {

constexpr double kPi = std::numbers::pi;

/// Unnormalized DFT of the sample vector: out[k] = sum_j v[j] e^{-2pi i jk/n}.
/// The true Fourier coefficient on our grid is (-1)^k out[k]/n; diagonal
/// multipliers commute with that phase, so most operations act on out[]
/// directly.
std::vector<std::complex<double>> dft(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::complex<double>> in(n), out(n);
  for (std::size_t j = 0; j < n; ++j) in[j] = v[j];
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  return out;
}

std::vector<double> idft(std::vector<std::complex<double>>& coeffs) {
  const std::size_t n = coeffs.size();
  std::vector<std::complex<double>> back(n);
  Eigen::FFT<double> fft;
  fft.inv(back, coeffs);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = back[j].real();
  return v;
}

int signed_mode(std::size_t idx, std::size_t n) {
  return idx <= n / 2 ? static_cast<int>(idx) : static_cast<int>(idx) - static_cast<int>(n);
}

/// Apply a complex symbol m(k) to the DFT array, with Hermitian bookkeeping
/// left to the caller-provided symbol (m(-k) must conjugate m(k) for a real
/// result). The Nyquist entry is special-cased via the nyquist argument.
PeriodicField apply_symbol(const PeriodicField& f,
                           const std::function<std::complex<double>(int)>& symbol,
                           std::complex<double> nyquist_factor) {
  const std::size_t n = f.size();
  auto c = dft(f.values());
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (idx == n / 2) {
      c[idx] *= nyquist_factor;
    } else {
      c[idx] *= symbol(signed_mode(idx, n));
    }
  }
  auto v = idft(c);
  return PeriodicField(std::move(v));
}

void check_size(const PeriodicField& f) {
  if (f.size() < 8 || f.size() % 2 != 0)
    throw std::invalid_argument("PeriodicField: grid size must be even and >= 8");
}

}  // namespace

std::complex<double> Spectrum::coeff(int k) const {
  const int a = k < 0 ? -k : k;
  if (static_cast<std::size_t>(a) >= coeffs_.size())
    throw std::out_of_range("Spectrum::coeff: |k| > n/2");
  return k < 0 ? std::conj(coeffs_[static_cast<std::size_t>(a)])
               : coeffs_[static_cast<std::size_t>(a)];
}

PeriodicField::PeriodicField(std::size_t n) : values_(n, 0.0) { check_size(*this); }

PeriodicField::PeriodicField(std::vector<double> values) : values_(std::move(values)) {
  check_size(*this);
}

double PeriodicField::node(std::size_t j, std::size_t n) {
  return -kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
}

PeriodicField PeriodicField::from_function(std::size_t n,
                                           const std::function<double(double)>& f) {
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f(node(j, n));
  return PeriodicField(std::move(v));
}

PeriodicField PeriodicField::from_modes(
    std::size_t n, const std::vector<std::tuple<int, double, double>>& modes) {
  std::vector<double> v(n, 0.0);
  for (const auto& [k, amp, phase] : modes)
    for (std::size_t j = 0; j < n; ++j) v[j] += amp * std::cos(k * node(j, n) + phase);
  return PeriodicField(std::move(v));
}

Spectrum PeriodicField::spectrum() const {
  const std::size_t n = values_.size();
  auto c = dft(values_);
  std::vector<std::complex<double>> half(n / 2 + 1);
  double sign = 1.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    half[k] = sign * c[k] / static_cast<double>(n);
    sign = -sign;
  }
  half[n / 2] = half[n / 2].real();  // Nyquist treated as real
  return Spectrum(std::move(half), n);
}

PeriodicField PeriodicField::from_spectrum(const Spectrum& s) {
  const std::size_t n = s.grid_size();
  std::vector<std::complex<double>> c(n);
  double sign = 1.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    c[k] = sign * s.raw()[k] * static_cast<double>(n);
    sign = -sign;
  }
  for (std::size_t k = n / 2 + 1; k < n; ++k) c[k] = std::conj(c[n - k]);
  auto v = idft(c);
  return PeriodicField(std::move(v));
}

double PeriodicField::eval(double x) const {
  const Spectrum s = spectrum();
  const std::size_t n = values_.size();
  double acc = s.coeff(0).real();
  for (std::size_t k = 1; k < n / 2; ++k) {
    const auto c = s.coeff(static_cast<int>(k));
    acc += 2.0 * (c.real() * std::cos(k * x) - c.imag() * std::sin(k * x));
  }
  acc += s.raw()[n / 2].real() * std::cos(0.5 * static_cast<double>(n) * x);
  return acc;
}

double PeriodicField::eval_derivative(double x) const {
  const Spectrum s = spectrum();
  const std::size_t n = values_.size();
  double acc = 0.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const auto c = s.coeff(static_cast<int>(k));
    const double kk = static_cast<double>(k);
    acc += 2.0 * kk * (-c.real() * std::sin(k * x) - c.imag() * std::cos(k * x));
  }
  return acc;  // Nyquist dropped, matching the odd-derivative convention
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  if (o.size() != size()) throw std::invalid_argument("field size mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  if (o.size() != size()) throw std::invalid_argument("field size mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
  return *this;
}

PeriodicField& PeriodicField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

PeriodicField hadamard(const PeriodicField& a, const PeriodicField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("field size mismatch");
  std::vector<double> v(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) v[j] = a[j] * b[j];
  return PeriodicField(std::move(v));
}

double mean(const PeriodicField& f) {
  // Pairwise summation keeps the mean of O(1) data near 1e-17.
  const auto& v = f.values();
  std::function<double(std::size_t, std::size_t)> sum = [&](std::size_t lo,
                                                            std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t j = lo; j < hi; ++j) s += v[j];
      return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return sum(lo, mid) + sum(mid, hi);
  };
  return sum(0, v.size()) / static_cast<double>(v.size());
}

PeriodicField project_zero_mean(const PeriodicField& f) {
  const double m = mean(f);
  std::vector<double> v = f.values();
  for (double& x : v) x -= m;
  return PeriodicField(std::move(v));
}

PeriodicField derivative(const PeriodicField& f, int order) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("derivative: order must lie in 1..4");
  const bool odd = order % 2 == 1;
  const double nyq = 0.5 * static_cast<double>(f.size());
  std::complex<double> nyquist_factor =
      odd ? std::complex<double>(0.0, 0.0) : std::pow(std::complex<double>(0.0, nyq), order);
  return apply_symbol(
      f,
      [order](int k) {
        return std::pow(std::complex<double>(0.0, static_cast<double>(k)), order);
      },
      nyquist_factor);
}

PeriodicField hilbert(const PeriodicField& f) {
  return apply_symbol(
      f,
      [](int k) {
        if (k == 0) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(0.0, k > 0 ? -1.0 : 1.0);
      },
      {0.0, 0.0});
}

PeriodicField fractional_multiplier(const PeriodicField& f, double s) {
  if (s < 0.0) throw std::invalid_argument("fractional_multiplier: s must be >= 0");
  const double nyq = 0.5 * static_cast<double>(f.size());
  return apply_symbol(
      f,
      [s](int k) {
        return std::complex<double>(std::pow(std::abs(static_cast<double>(k)), 2.0 * s), 0.0);
      },
      {std::pow(nyq, 2.0 * s), 0.0});
}

PeriodicField lambda_op(const PeriodicField& f) { return fractional_multiplier(f, 0.5); }

PeriodicField lambda_cubed(const PeriodicField& f) { return fractional_multiplier(f, 1.5); }

namespace {
PeriodicField half_shift_impl(const PeriodicField& f, double direction) {
  const double a = direction * kPi / static_cast<double>(f.size());
  return apply_symbol(
      f,
      [a](int k) {
        return std::exp(std::complex<double>(0.0, -static_cast<double>(k) * a));
      },
      // cos(n/2 (x -+ pi/n)) vanishes at every node: the shifted Nyquist mode
      // is invisible on the grid.
      {0.0, 0.0});
}
}  // namespace

PeriodicField half_shift_back(const PeriodicField& f) { return half_shift_impl(f, 1.0); }

PeriodicField half_shift_forward(const PeriodicField& f) { return half_shift_impl(f, -1.0); }

PeriodicField shift_by_cells(const PeriodicField& f, long m) {
  const long n = static_cast<long>(f.size());
  std::vector<double> v(f.size());
  for (long j = 0; j < n; ++j) {
    long src = (j - m) % n;
    if (src < 0) src += n;
    v[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(src)];
  }
  return PeriodicField(std::move(v));
}

PeriodicField resample(const PeriodicField& f, std::size_t n_new) {
  const std::size_t n = f.size();
  if (n_new < n) throw std::invalid_argument("resample: only upsampling is supported");
  if (n_new == n) return f;
  if (n_new % 2 != 0) throw std::invalid_argument("resample: grid size must be even");
  const Spectrum s = f.spectrum();
  std::vector<std::complex<double>> half(n_new / 2 + 1, 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) half[k] = s.raw()[k];
  // The old Nyquist cosine becomes a regular interior mode on the fine grid.
  half[n / 2] = 0.5 * s.raw()[n / 2].real();
  return PeriodicField::from_spectrum(Spectrum(std::move(half), n_new));
}

PeriodicField dealias_two_thirds(const PeriodicField& f) {
  const double cut = static_cast<double>(f.size()) / 3.0;
  return apply_symbol(
      f,
      [cut](int k) {
        return std::complex<double>(std::abs(static_cast<double>(k)) > cut ? 0.0 : 1.0, 0.0);
      },
      {0.0, 0.0});
}

double inner_product(const PeriodicField& a, const PeriodicField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("field size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return 2.0 * kPi * s / static_cast<double>(a.size());
}

double sobolev_norm(const PeriodicField& f, double r) {
  if (r < 0.0 || r > 4.0) throw std::invalid_argument("sobolev_norm: r must lie in [0,4]");
  const Spectrum s = f.spectrum();
  const std::size_t n = f.size();
  double acc = std::norm(s.raw()[0]);
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double kk = static_cast<double>(k);
    acc += 2.0 * std::pow(1.0 + kk * kk, r) * std::norm(s.raw()[k]);
  }
  const double nyq = 0.5 * static_cast<double>(n);
  acc += std::pow(1.0 + nyq * nyq, r) * std::norm(s.raw()[n / 2]);
  return std::sqrt(2.0 * kPi * acc);
}

double max_abs(const PeriodicField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double spectral_tail_max(const PeriodicField& f) {
  const Spectrum s = f.spectrum();
  const std::size_t n = f.size();
  double m = 0.0;
  for (std::size_t k = (3 * n) / 8; k <= n / 2; ++k) m = std::max(m, std::abs(s.raw()[k]));
  return m;
}

PeriodicField random_band_limited(std::size_t n, int kmax, std::uint64_t seed,
                                  double fprime_max) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::tuple<int, double, double>> modes;
  for (int k = 1; k <= kmax; ++k) {
    // amp*cos(kx) + amp2*sin(kx) written as two phased cosines
    modes.emplace_back(k, uni(gen) / k, 0.0);
    modes.emplace_back(k, uni(gen) / k, -kPi / 2.0);
  }
  PeriodicField f = PeriodicField::from_modes(n, modes);
  const double sup = max_abs(derivative(f, 1));
  if (sup > 0.0 && fprime_max > 0.0) f *= fprime_max / sup;
  return project_zero_mean(f);
}

std::uint64_t field_fingerprint(const PeriodicField& f) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const unsigned char* p, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t n = f.size();
  mix(reinterpret_cast<const unsigned char*>(&n), sizeof(n));
  mix(reinterpret_cast<const unsigned char*>(f.values().data()),
      f.values().size() * sizeof(double));
  return h;
}

}  // namespace muskat
