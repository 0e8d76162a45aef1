#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "muskat/periodic_field.hpp"

namespace muskat {

/// Principal-value quadrature shared by every singular operator: the
/// half-offset trapezoidal rule with nodes s_m = (m + 1/2) * 2*pi/n,
/// m = 0..n-1, weight 2*pi/n. No node ever hits s = 0 (mod 2*pi), and the
/// rule annihilates cot(s/2) exactly by symmetry, which makes it spectrally
/// accurate on Hilbert-type kernels.
struct QuadratureRule {
  explicit QuadratureRule(std::size_t n);

  std::size_t n = 0;
  double weight = 0.0;                ///< 2*pi/n
  std::vector<double> offset;         ///< s_m in (0, 2*pi)
  std::vector<double> offset_wrapped; ///< s_m wrapped to (-pi, pi), for 1/s kernels
  std::vector<double> tan_half;       ///< tan(s_m / 2)
};

enum class OperatorKind : std::uint32_t { A = 0, B = 1, AAdjoint = 2, BAdjoint = 3, Cnm = 4 };

/// Dense Nystrom realization of a singular operator for a frozen interface f.
struct OperatorMatrix {
  Eigen::MatrixXd entries;
  OperatorKind kind = OperatorKind::A;
  std::uint64_t frozen_f_hash = 0;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  PeriodicField apply(const PeriodicField& omega) const;
};

/// Kernel of the vortex-strength coupling operator A(f):
///   [f'(x) t (1 - T^2) - (1 + t^2) T] / (t^2 + T^2),
/// t = tan(s/2), T = tanh((f(x) - f(x-s))/2). Removable singularity at s = 0
/// with limit f''(x)/(1 + f'(x)^2); s = 0 is rejected.
double kernel_a(const PeriodicField& f, double x, double s);

/// Kernel of the interface-velocity operator B(f):
///   [f'(x) (1 + t^2) T + t (1 - T^2)] / (t^2 + T^2),
/// behaves like 2/s near s = 0.
double kernel_b(const PeriodicField& f, double x, double s);

/// Dense Nystrom matrix of A(f) or B(f): offset trapezoidal rule composed
/// with the spectral half-grid interpolation map. Rows are assembled in
/// parallel. kind must be A or B.
OperatorMatrix assemble(const PeriodicField& f, OperatorKind kind);

/// Transpose of an assembled matrix, tagged as the discrete adjoint.
OperatorMatrix transpose_as_adjoint(const OperatorMatrix& m);

/// Matrix-free application of A(f), (1/2pi) PV integral by the offset rule.
PeriodicField apply_a(const PeriodicField& f, const PeriodicField& omega);
/// Matrix-free application of B(f).
PeriodicField apply_b(const PeriodicField& f, const PeriodicField& omega);

/// Transpose action of the assembled A matrix.
PeriodicField apply_a_adjoint(const PeriodicField& f, const PeriodicField& xi);

/// Double layer potential evaluated from its own kernel,
///   [(1 + t^2) T - f'(x-s) t (1 - T^2)] / (t^2 + T^2);
/// the L2-adjoint of A(f) up to quadrature error.
PeriodicField apply_double_layer(const PeriodicField& f, const PeriodicField& xi);

/// Adjoint of B(f) assembled from its decomposition:
///   B(f)*[xi] = -B1(f)[f' xi] + B2(f)[xi] - (C01(f)[xi] + C11(f)[f, f' xi])/pi.
PeriodicField apply_b_adjoint(const PeriodicField& f, const PeriodicField& xi);

/// Thrown when the dense solve of the vortex-strength equation breaks down.
struct SingularOperatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solves (1 + a_mu A(f))[w] = rhs in the mean-zero subspace by dense LU with
/// partial pivoting plus one step of iterative refinement. Requires
/// |a_mu| < 1 and mean-zero rhs.
PeriodicField solve_omega(const PeriodicField& f, double a_mu, const PeriodicField& rhs);

/// Factored form of (1 + a_mu A(f)) for repeated solves against one f.
class VortexStrengthSolver {
 public:
  VortexStrengthSolver(const PeriodicField& f, double a_mu);
  PeriodicField solve(const PeriodicField& rhs) const;
  const Eigen::MatrixXd& system_matrix() const { return system_; }

 private:
  Eigen::MatrixXd system_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// B(f)[(1 + a_mu A(f))^{-1}[rhs]], the composite at the core of both
/// evolution operators and of the Rayleigh-Taylor diagnostic.
PeriodicField apply_b_after_solve(const PeriodicField& f, double a_mu,
                                  const PeriodicField& rhs);

/// Multilinear singular operator
///   C_{n,m}(a_1..a_m)[b_1..b_n, w](x)
///     = PV int_{-pi}^{pi} w(x-s)/s * prod_i (d b_i / s) / prod_i (1 + (d a_i/s)^2) ds,
/// d g = g(x) - g(x-s), discretized by the shared offset rule on the wrapped
/// interval (-pi, pi).
PeriodicField apply_cnm(const std::vector<PeriodicField>& a_list,
                        const std::vector<PeriodicField>& b_list, const PeriodicField& omega);

enum class Part { B1, B2, B3, A3 };

/// Pieces of the decompositions B = f' B1 - B2 + B3 and A = -f' B2 - B1 + A3.
/// All parts share the offset rule, so the recompositions hold at roundoff.
PeriodicField apply_b_part(const PeriodicField& f, const PeriodicField& omega, Part part);

/// Lower-order commutator T_lot(f)[w] = (A(f)[w])' - A(f)[w'], assembled from
/// its closed form (C operators plus B1/B2 commutators with d/dx).
PeriodicField t_lot_a(const PeriodicField& f, const PeriodicField& omega);

/// Residual of the energy identity
///   int [ |B w|^2 + 2 s f' (B w)(1 + s A)w - |(1 + s A)w|^2 ] / (1 + f'^2) dx
/// for s = +1 or -1; vanishes identically in the continuum.
double energy_identity_residual(const PeriodicField& f, const PeriodicField& omega, int sign);

/// L2 norm of  d/dx B3(f)[w] - { B3(f)[w'] + (-2 C22(f,f)[f',f,w]
///   + f'' C11(f)[f,w] + f' C11(f)[f',w] - 2 f' C32(f,f)[f',f,f,w])/pi }.
double derivative_identity_residual_b3(const PeriodicField& f, const PeriodicField& omega);

/// Same for A3: d/dx A3(f)[w] - { A3(f)[w'] + (f'' C01(f)[w]
///   - 2 f' C22(f,f)[f',f,w] - C11(f)[f',w] + 2 C32(f,f)[f',f,f,w])/pi }.
double derivative_identity_residual_a3(const PeriodicField& f, const PeriodicField& omega);

/// Binary operator dump: magic "MUSKOP01", u32 n, u32 kind, then n*n
/// little-endian doubles, row-major.
void write_operator_dump(const std::string& path, const OperatorMatrix& m);
OperatorMatrix read_operator_dump(const std::string& path);

}  // namespace muskat
