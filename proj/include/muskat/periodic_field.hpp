#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace muskat {

/// Complex Fourier coefficients of a real 2*pi-periodic field.
///
/// coeff(k) is defined by f(x) ~ sum_k coeff(k) e^{ikx}; only k = 0..n/2 is
/// stored, negative modes follow from Hermitian symmetry. The Nyquist
/// coefficient is real by convention.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::vector<std::complex<double>> coeffs, std::size_t n)
      : coeffs_(std::move(coeffs)), n_(n) {}

  std::size_t size() const { return coeffs_.size(); }  // n/2 + 1
  std::size_t grid_size() const { return n_; }

  /// Coefficient for |k| <= n/2; negative k returns the conjugate.
  std::complex<double> coeff(int k) const;
  double abs(int k) const { return std::abs(coeffs_[static_cast<std::size_t>(k < 0 ? -k : k)]); }

  const std::vector<std::complex<double>>& raw() const { return coeffs_; }

 private:
  std::vector<std::complex<double>> coeffs_;
  std::size_t n_ = 0;
};

/// Real 2*pi-periodic function sampled at the uniform nodes
/// x_j = -pi + 2*pi*j/n, j = 0..n-1.
///
/// The class is a plain value type: all operations return new fields and the
/// sample vector is immutable through the public interface, so fields can be
/// shared freely across threads.
class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(std::size_t n);  // zero field
  explicit PeriodicField(std::vector<double> values);

  static PeriodicField from_function(std::size_t n, const std::function<double(double)>& f);
  /// amp * cos(k x + phase) added over a list of (k, amp, phase) triples.
  static PeriodicField from_modes(std::size_t n,
                                  const std::vector<std::tuple<int, double, double>>& modes);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& at(std::size_t j) { return values_[j]; }

  static double node(std::size_t j, std::size_t n);
  double node(std::size_t j) const { return node(j, values_.size()); }

  Spectrum spectrum() const;
  static PeriodicField from_spectrum(const Spectrum& s);

  /// Trigonometric interpolant and its derivative at arbitrary x.
  double eval(double x) const;
  double eval_derivative(double x) const;

  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double a);

  friend PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
  friend PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
  friend PeriodicField operator*(double a, PeriodicField f) { return f *= a; }

 private:
  std::vector<double> values_;
};

/// Pointwise product of nodal values.
PeriodicField hadamard(const PeriodicField& a, const PeriodicField& b);

/// Arithmetic mean of the samples; identical to the k = 0 Fourier coefficient.
double mean(const PeriodicField& f);

/// f - <f>; idempotent, output mean at roundoff level.
PeriodicField project_zero_mean(const PeriodicField& f);

/// Spectral derivative of the given order (1..4). Odd orders zero the
/// Nyquist mode (standard real-FFT convention).
PeriodicField derivative(const PeriodicField& f, int order);

/// Periodic Hilbert transform, Fourier symbol -i sign(k).
PeriodicField hilbert(const PeriodicField& f);

/// Fractional Laplacian (-d^2/dx^2)^s, Fourier symbol |k|^{2s}, s >= 0.
PeriodicField fractional_multiplier(const PeriodicField& f, double s);

/// |k| multiplier (s = 1/2 above).
PeriodicField lambda_op(const PeriodicField& f);
/// |k|^3 multiplier (s = 3/2 above).
PeriodicField lambda_cubed(const PeriodicField& f);

/// Samples of the interpolant at the half-shifted nodes x_j - pi/n.
/// The Nyquist cosine vanishes identically on the shifted grid.
PeriodicField half_shift_back(const PeriodicField& f);
/// Samples at x_j + pi/n (the transpose of half_shift_back).
PeriodicField half_shift_forward(const PeriodicField& f);

/// Exact grid translation f(x - m*h) by an integer number of cells.
PeriodicField shift_by_cells(const PeriodicField& f, long m);

/// Band-limited resampling onto a finer (or equal) grid via spectral
/// zero-padding; exact for the trigonometric interpolant.
PeriodicField resample(const PeriodicField& f, std::size_t n_new);

/// Zero all modes with |k| > n/3 (2/3-rule dealiasing; optional, off by
/// default everywhere).
PeriodicField dealias_two_thirds(const PeriodicField& f);

/// Discrete L2(S) inner product, (2*pi/n) * sum_j a_j b_j.
double inner_product(const PeriodicField& a, const PeriodicField& b);

/// Sobolev norm (2*pi*sum_k (1+k^2)^r |f^(k)|^2)^{1/2}; r in [0,4].
/// Normalized so that the constant 1 has H^0 norm sqrt(2*pi).
double sobolev_norm(const PeriodicField& f, double r);

inline double l2_norm(const PeriodicField& f) { return sobolev_norm(f, 0.0); }

double max_abs(const PeriodicField& f);

/// Largest |f^(k)| over the top quarter of modes, k in [3n/8, n/2].
double spectral_tail_max(const PeriodicField& f);

/// Reproducible band-limited test field: random cos/sin amplitudes on modes
/// 1..kmax drawn from a seeded generator, then scaled to the requested
/// sup-norm of f'. Mean-zero.
PeriodicField random_band_limited(std::size_t n, int kmax, std::uint64_t seed,
                                  double fprime_max);

/// FNV-1a fingerprint of the raw sample bytes.
std::uint64_t field_fingerprint(const PeriodicField& f);

}  // namespace muskat
