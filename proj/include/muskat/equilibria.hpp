#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "muskat/evolution.hpp"
#include "muskat/physics.hpp"

namespace muskat {

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularJacobian : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoGraph : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pointwise residual of the capillarity equation, f''/(1+f'^2)^{3/2} + lambda f.
PeriodicField capillarity_residual(double lambda, const PeriodicField& f);

/// Newton iteration for the capillarity equation in the even, mean-zero
/// cosine subspace; the iterates never leave it. Converges to residual
/// <= 1e-12 or throws NoConvergence / SingularJacobian.
PeriodicField newton_solve(double lambda, const PeriodicField& f_guess, int max_iter = 50);

enum class StabilityTag { Stable, Unstable, Fold, Unknown };

struct BranchPoint {
  double lambda = 0.0;
  PeriodicField f;
  double s = 0.0;       ///< coefficient of cos(ell x)
  double arclen = 0.0;  ///< accumulated pseudo-arclength
  double lead_eig = std::numeric_limits<double>::quiet_NaN();
  StabilityTag tag = StabilityTag::Unknown;

  double max_f() const { return max_abs(f); }
  double max_fprime() const { return max_abs(derivative(f, 1)); }
};

struct Branch {
  int ell = 1;
  std::vector<BranchPoint> points;
  bool reached_slope_cap = false;  ///< stopped because ||f'||_inf hit slope_cap
};

struct ContinuationOptions {
  std::size_t grid_n = 128;
  double slope_cap = 25.0;
  double newton_tol = 1e-12;
  int max_newton = 25;
  bool with_eigenvalues = false;  ///< fill lead_eig/tag via the evolution Jacobian
  double sigma_b_mu = 1.0;        ///< normalization used for the eigenvalue fill
  double a_mu = 0.0;
};

/// Pseudo-arclength continuation of the even finger branch emanating from
/// (ell^2, 0), stepping in amplitude direction first. Stops after n_steps
/// points or when ||f'||_inf exceeds slope_cap.
Branch continue_branch(int ell, double ds, int n_steps,
                       const ContinuationOptions& opts = {});

/// Newton solve with the amplitude coordinate pinned: finds (lambda, f) on
/// the ell-branch with cos(ell x) coefficient exactly s.
BranchPoint solve_at_amplitude(int ell, double s, const ContinuationOptions& opts = {});

/// Walks the branch until lambda crosses the target, then polishes with a
/// pinned-lambda Newton solve. Requires ell^2 * lambda_star < lambda < ell^2.
BranchPoint solve_at_lambda(int ell, double lambda, const ContinuationOptions& opts = {});

/// Quadratic coefficient c2 of the least-squares fit lambda(s) ~ l0 + c2 s^2
/// over branch points with |s| <= s_window.
double fit_lambda_curvature(const Branch& branch, double s_window);

/// Fold value of the bifurcation parameter, B(3/4,1/2)^2 / (2 pi^2).
double lambda_star();
/// Height limit sqrt(2/lambda_star) of the finger tips at the fold.
double finger_amplitude_limit();

/// Independent equilibrium construction through the pendulum phase plane:
/// the inclination angle obeys theta'' + lambda sin(theta) = 0 in arclength,
/// and f = -theta'/lambda. Requires lambda_star < lambda < 1; throws NoGraph
/// when the slope leaves the graph regime.
PeriodicField pendulum_oracle(double lambda, std::size_t n);

enum class Regime { SigmaPositive, SigmaZero };

/// Central finite-difference Jacobian of the evolution right-hand side in
/// the mean-zero subspace, dense eigen-decomposition, eigenvalues sorted by
/// descending real part.
std::vector<std::complex<double>> jacobian_spectrum(const PeriodicField& f,
                                                    const PhysicalParams& params,
                                                    Regime regime);

/// Same Jacobian restricted to the even cosine subspace; returns the matrix
/// so callers can track eigenvectors.
Eigen::MatrixXd jacobian_even_subspace(const PeriodicField& f, const PhysicalParams& params,
                                       Regime regime);

struct ExchangePoint {
  double s = 0.0;
  double lambda = 0.0;
  double z = 0.0;  ///< eigenvalue continuing from 0 at the bifurcation point
};

/// Tracks the exchange-of-stability eigenvalue along the ell = 1 branch by
/// maximal-overlap eigenvector matching from the cos(x) direction.
std::vector<ExchangePoint> exchange_of_stability(const std::vector<double>& s_values,
                                                 const ContinuationOptions& opts = {});

/// Physical parameters realizing the normalization sigma = b_mu = 1 with
/// bifurcation parameter lambda (Theta = -lambda) and the given Atwood
/// number.
PhysicalParams normalized_params(double lambda, double a_mu);

}  // namespace muskat
