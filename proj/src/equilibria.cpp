#include "muskat/equilibria.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace muskat {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Even mean-zero cosine coordinates
// ---------------------------------------------------------------------------

Eigen::VectorXd cos_coeffs(const PeriodicField& f) {
  const std::size_t n = f.size();
  const Spectrum s = f.spectrum();
  Eigen::VectorXd a(static_cast<Eigen::Index>(n / 2 - 1));
  for (std::size_t k = 1; k < n / 2; ++k)
    a(static_cast<Eigen::Index>(k - 1)) = 2.0 * s.raw()[k].real();
  return a;
}

PeriodicField field_from_cos(const Eigen::VectorXd& a, std::size_t n) {
  std::vector<std::complex<double>> half(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k < n / 2; ++k)
    half[k] = 0.5 * a(static_cast<Eigen::Index>(k - 1));
  return PeriodicField::from_spectrum(Spectrum(std::move(half), n));
}

/// Residual of the capillarity equation in cosine coordinates.
Eigen::VectorXd residual_cos(const Eigen::VectorXd& a, double lambda, std::size_t n) {
  return cos_coeffs(capillarity_residual(lambda, field_from_cos(a, n)));
}

/// Jacobian of residual_cos with respect to the cosine coefficients: the
/// analytic linearization h -> h''/(1+f'^2)^{3/2} - 3 f' f'' h'/(1+f'^2)^{5/2}
/// + lambda h applied to each cosine mode.
Eigen::MatrixXd jacobian_cos(const Eigen::VectorXd& a, double lambda, std::size_t n) {
  const PeriodicField f = field_from_cos(a, n);
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  std::vector<double> p(n), r(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double q = 1.0 + fp[j] * fp[j];
    p[j] = std::pow(q, -1.5);
    r[j] = 3.0 * fp[j] * fpp[j] * std::pow(q, -2.5);
  }
  const std::size_t m = n / 2 - 1;
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> col(n);
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double kk = static_cast<double>(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = PeriodicField::node(j, n);
      const double c = std::cos(kk * x), s = std::sin(kk * x);
      // h = cos(kx): h' = -k sin, h'' = -k^2 cos
      col[j] = -kk * kk * c * p[j] + kk * s * r[j] + lambda * c;
    }
    jac.col(static_cast<Eigen::Index>(k - 1)) = cos_coeffs(PeriodicField(col));
  }
  return jac;
}

Eigen::VectorXd lambda_derivative_cos(const Eigen::VectorXd& a) { return a; }

void check_pivots(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  const Eigen::VectorXd d = lu.matrixLU().diagonal().cwiseAbs();
  if (d.minCoeff() <= 1e-13 * d.maxCoeff())
    throw SingularJacobian("capillarity Jacobian is numerically singular");
}

struct PinnedSolveResult {
  Eigen::VectorXd a;
  double lambda = 0.0;
};

/// Newton for the system residual_cos = 0 with the cos(ell x) coefficient
/// pinned to s; unknowns are the remaining coefficients and lambda.
PinnedSolveResult pinned_amplitude_newton(int ell, double s, double lambda0,
                                          Eigen::VectorXd a0, std::size_t n, double tol,
                                          int max_iter) {
  const Eigen::Index m = a0.size();
  const Eigen::Index ell_idx = ell - 1;
  Eigen::VectorXd a = std::move(a0);
  a(ell_idx) = s;
  double lambda = lambda0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = residual_cos(a, lambda, n);
    if (g.lpNorm<Eigen::Infinity>() <= tol * (1.0 + std::abs(lambda) + a.norm()))
      return {a, lambda};
    Eigen::MatrixXd sys(m, m);
    const Eigen::MatrixXd ja = jacobian_cos(a, lambda, n);
    Eigen::Index col = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == ell_idx) continue;
      sys.col(col++) = ja.col(k);
    }
    sys.col(m - 1) = lambda_derivative_cos(a);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    check_pivots(lu);
    const Eigen::VectorXd delta = lu.solve(-g);
    col = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == ell_idx) continue;
      a(k) += delta(col++);
    }
    lambda += delta(m - 1);
  }
  throw NoConvergence("pinned-amplitude Newton did not converge");
}

}  // namespace

PeriodicField capillarity_residual(double lambda, const PeriodicField& f) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    v[j] = fpp[j] / std::pow(1.0 + fp[j] * fp[j], 1.5) + lambda * f[j];
  return PeriodicField(std::move(v));
}

PeriodicField newton_solve(double lambda, const PeriodicField& f_guess, int max_iter) {
  const std::size_t n = f_guess.size();
  Eigen::VectorXd a = cos_coeffs(f_guess);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = residual_cos(a, lambda, n);
    if (g.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + std::abs(lambda) + a.norm()))
      return field_from_cos(a, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian_cos(a, lambda, n));
    check_pivots(lu);
    a += lu.solve(-g);
  }
  throw NoConvergence("newton_solve: no convergence within the iteration budget");
}

Branch continue_branch(int ell, double ds, int n_steps, const ContinuationOptions& opts) {
  if (ell < 1) throw std::invalid_argument("continue_branch: ell must be >= 1");
  if (!(ds > 0.0)) throw std::invalid_argument("continue_branch: ds must be positive");
  const std::size_t n = opts.grid_n;
  const Eigen::Index m = static_cast<Eigen::Index>(n / 2 - 1);

  Branch branch;
  branch.ell = ell;

  auto push_point = [&](const Eigen::VectorXd& a, double lambda, double arclen) {
    BranchPoint bp;
    bp.lambda = lambda;
    bp.f = field_from_cos(a, n);
    bp.s = a(ell - 1);
    bp.arclen = arclen;
    if (opts.with_eigenvalues) {
      const PhysicalParams params = normalized_params(lambda, opts.a_mu);
      const auto eigs = jacobian_spectrum(bp.f, params, Regime::SigmaPositive);
      bp.lead_eig = eigs.front().real();
      bp.tag = bp.lead_eig > 1e-7 ? StabilityTag::Unstable
                                  : (bp.lead_eig < -1e-7 ? StabilityTag::Stable
                                                         : StabilityTag::Fold);
    }
    branch.points.push_back(std::move(bp));
  };

  // Bifurcation point itself.
  Eigen::VectorXd a_prev = Eigen::VectorXd::Zero(m);
  double lambda_prev = static_cast<double>(ell) * ell;
  push_point(a_prev, lambda_prev, 0.0);

  // First point off the trivial branch: pinned amplitude (the pseudo-
  // arclength system is singular exactly at the bifurcation point).
  const double l4 = std::pow(static_cast<double>(ell), 4);
  Eigen::VectorXd a_seed = Eigen::VectorXd::Zero(m);
  const double lam_seed = lambda_prev - 0.375 * l4 * ds * ds;
  if (3 * ell - 1 < m)
    a_seed(3 * ell - 1) = -(3.0 / 64.0) * ell * ell * ds * ds * ds;
  PinnedSolveResult first = pinned_amplitude_newton(ell, ds, lam_seed, a_seed, n,
                                                    opts.newton_tol, opts.max_newton);
  double arclen = std::sqrt(ds * ds + (first.lambda - lambda_prev) * (first.lambda - lambda_prev));
  push_point(first.a, first.lambda, arclen);

  Eigen::VectorXd a_cur = first.a;
  double lambda_cur = first.lambda;
  double step = ds;

  for (int pt = 2; pt <= n_steps; ++pt) {
    // Secant tangent in (a, lambda).
    Eigen::VectorXd tan_a = a_cur - a_prev;
    double tan_l = lambda_cur - lambda_prev;
    const double tnorm = std::sqrt(tan_a.squaredNorm() + tan_l * tan_l);
    tan_a /= tnorm;
    tan_l /= tnorm;

    bool accepted = false;
    for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
      Eigen::VectorXd a_new = a_cur + step * tan_a;
      double lambda_new = lambda_cur + step * tan_l;
      int iters = 0;
      try {
        for (; iters < opts.max_newton; ++iters) {
          const Eigen::VectorXd g = residual_cos(a_new, lambda_new, n);
          const double constraint =
              tan_a.dot(a_new - a_cur) + tan_l * (lambda_new - lambda_cur) - step;
          if (g.lpNorm<Eigen::Infinity>() <=
                  opts.newton_tol * (1.0 + std::abs(lambda_new) + a_new.norm()) &&
              std::abs(constraint) <= opts.newton_tol * (1.0 + step))
            break;
          Eigen::MatrixXd sys(m + 1, m + 1);
          sys.topLeftCorner(m, m) = jacobian_cos(a_new, lambda_new, n);
          sys.topRightCorner(m, 1) = lambda_derivative_cos(a_new);
          sys.bottomLeftCorner(1, m) = tan_a.transpose();
          sys(m, m) = tan_l;
          Eigen::VectorXd rhs(m + 1);
          rhs.head(m) = -g;
          rhs(m) = -constraint;
          Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
          check_pivots(lu);
          const Eigen::VectorXd delta = lu.solve(rhs);
          a_new += delta.head(m);
          lambda_new += delta(m);
        }
        if (iters >= opts.max_newton) throw NoConvergence("arclength corrector stalled");
        a_prev = a_cur;
        lambda_prev = lambda_cur;
        a_cur = a_new;
        lambda_cur = lambda_new;
        arclen += step;
        push_point(a_cur, lambda_cur, arclen);
        accepted = true;
        if (iters <= 4) step *= 1.4;
      } catch (const NoConvergence&) {
        step *= 0.5;
      } catch (const SingularJacobian&) {
        step *= 0.5;
      }
    }
    if (!accepted)
      throw NoConvergence("continue_branch: continuation step failed repeatedly");
    if (branch.points.back().max_fprime() > opts.slope_cap) {
      branch.reached_slope_cap = true;
      break;
    }
  }
  return branch;
}

BranchPoint solve_at_amplitude(int ell, double s, const ContinuationOptions& opts) {
  const std::size_t n = opts.grid_n;
  const Eigen::Index m = static_cast<Eigen::Index>(n / 2 - 1);
  const double l4 = std::pow(static_cast<double>(ell), 4);
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(m);
  if (3 * ell - 1 < m) a0(3 * ell - 1) = -(3.0 / 64.0) * ell * ell * s * s * s;
  const double lam0 = ell * ell - 0.375 * l4 * s * s;
  const PinnedSolveResult res =
      pinned_amplitude_newton(ell, s, lam0, a0, n, opts.newton_tol, opts.max_newton);
  BranchPoint bp;
  bp.lambda = res.lambda;
  bp.f = field_from_cos(res.a, n);
  bp.s = s;
  return bp;
}

BranchPoint solve_at_lambda(int ell, double lambda, const ContinuationOptions& opts) {
  const double l2 = static_cast<double>(ell) * ell;
  if (!(lambda > l2 * lambda_star() && lambda < l2))
    throw std::invalid_argument("solve_at_lambda: lambda outside the branch range");
  const std::size_t n = opts.grid_n;

  // Walk the amplitude coordinate until lambda(s) crosses the target.
  double s_lo = 0.0;
  double s_hi = std::sqrt((l2 - lambda) / (0.375 * l2 * l2));  // leading-order guess
  BranchPoint probe = solve_at_amplitude(ell, s_hi, opts);
  int guard = 0;
  while (probe.lambda > lambda) {
    s_lo = s_hi;
    s_hi *= 1.3;
    probe = solve_at_amplitude(ell, s_hi, opts);
    if (++guard > 60) throw NoConvergence("solve_at_lambda: bracketing failed");
  }
  // Bisection on the amplitude, then a pinned-lambda polish.
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    const BranchPoint bp = solve_at_amplitude(ell, mid, opts);
    if (bp.lambda > lambda)
      s_lo = mid;
    else
      s_hi = mid;
    probe = bp;
    if (std::abs(bp.lambda - lambda) < 1e-10) break;
  }
  PeriodicField f = newton_solve(lambda, probe.f);
  BranchPoint bp;
  bp.lambda = lambda;
  bp.s = cos_coeffs(f)(ell - 1);
  bp.f = std::move(f);
  return bp;
}

double fit_lambda_curvature(const Branch& branch, double s_window) {
  // Least squares of lambda against (1, s^2).
  double s2 = 0, s4 = 0, sl = 0, s2l = 0;
  double count = 0;
  for (const auto& p : branch.points) {
    if (std::abs(p.s) > s_window) continue;
    const double q = p.s * p.s;
    s2 += q;
    s4 += q * q;
    sl += p.lambda;
    s2l += q * p.lambda;
    count += 1;
  }
  if (count < 3) throw std::invalid_argument("fit_lambda_curvature: too few points");
  const double det = count * s4 - s2 * s2;
  return (count * s2l - s2 * sl) / det;
}

double lambda_star() {
  const double beta = std::tgamma(0.75) * std::tgamma(0.5) / std::tgamma(1.25);
  return beta * beta / (2.0 * kPi * kPi);
}

double finger_amplitude_limit() { return std::sqrt(2.0 / lambda_star()); }

namespace {

/// q-parametrized phase-plane quantities of the pendulum construction:
/// u(phi) = 2 asin(q sin phi), integrand cos(u)/cos(u/2).
double pendulum_integrand(double q, double phi) {
  const double su = q * std::sin(phi);
  const double u = 2.0 * std::asin(su);
  return std::cos(u) / std::cos(0.5 * u);
}

/// Composite Gauss quadrature of the pendulum integrand over [0, phi].
double pendulum_x_raw(double q, double phi) {
  constexpr int panels = 24;
  static const std::array<double, 8> gx = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
      -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
      0.7966664774136267,  0.9602898564975363};
  static const std::array<double, 8> gw = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = phi * p / panels, hi = phi * (p + 1) / panels;
    const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (int i = 0; i < 8; ++i) acc += gw[i] * pendulum_integrand(q, mid + hw * gx[i]) * hw;
  }
  return acc;
}

}  // namespace

PeriodicField pendulum_oracle(double lambda, std::size_t n) {
  if (!(lambda < 1.0))
    throw std::invalid_argument("pendulum_oracle: nontrivial fingers require lambda < 1");
  if (!(lambda > lambda_star()))
    throw NoGraph("pendulum_oracle: the interface is not a graph for lambda <= lambda_star");

  // Shooting in the pendulum amplitude: S(q) = (pi/2) sqrt(lambda).
  const double target = 0.5 * kPi * std::sqrt(lambda);
  double qlo = 0.0, qhi = std::sqrt(0.5);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (qlo + qhi);
    if (pendulum_x_raw(mid, 0.5 * kPi) > target)
      qlo = mid;
    else
      qhi = mid;
  }
  const double q = 0.5 * (qlo + qhi);
  const double sqrt_lambda = std::sqrt(lambda);

  // Invert x(phi) for each node in the first quarter period.
  auto f_quarter = [&](double x) -> double {
    if (x <= 0.0) return 2.0 * q / sqrt_lambda;
    if (x >= 0.5 * kPi) return 0.0;
    const double target_x = x * sqrt_lambda;
    double lo = 0.0, hi = 0.5 * kPi;
    double phi = x;  // decent initial bracket midpoint
    for (int it = 0; it < 100; ++it) {
      phi = 0.5 * (lo + hi);
      const double val = pendulum_x_raw(q, phi);
      if (val < target_x)
        lo = phi;
      else
        hi = phi;
      if (hi - lo < 1e-15) break;
    }
    // Newton polish
    for (int it = 0; it < 4; ++it) {
      const double val = pendulum_x_raw(q, phi) - target_x;
      const double dp = pendulum_integrand(q, phi);
      if (dp <= 0.0) break;
      phi -= val / dp;
      phi = std::clamp(phi, 0.0, 0.5 * kPi);
    }
    return 2.0 * q / sqrt_lambda * std::cos(phi);
  };

  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = std::abs(PeriodicField::node(j, n));
    v[j] = x <= 0.5 * kPi ? f_quarter(x) : -f_quarter(kPi - x);
  }
  return PeriodicField(std::move(v));
}

namespace {

using RhsFn = std::function<PeriodicField(const PeriodicField&)>;

RhsFn make_rhs(const PhysicalParams& params, Regime regime) {
  const DerivedConstants c = derive_constants(params);
  if (regime == Regime::SigmaPositive) {
    if (!(params.sigma > 0.0))
      throw std::invalid_argument("jacobian_spectrum: SigmaPositive needs sigma > 0");
    return [params, c](const PeriodicField& f) { return rhs_sigma(f, params, c); };
  }
  if (params.sigma != 0.0)
    throw std::invalid_argument("jacobian_spectrum: SigmaZero needs sigma = 0");
  return [params, c](const PeriodicField& f) { return rhs_zero_st(f, params, c); };
}

Eigen::MatrixXd fd_jacobian(const PeriodicField& f, const RhsFn& rhs,
                            const Eigen::MatrixXd& basis) {
  const std::size_t n = f.size();
  const double eps = 1e-6 * (1.0 + sobolev_norm(f, 2.0));
  const Eigen::Index m = basis.cols();
  Eigen::MatrixXd jac(m, m);
  for (Eigen::Index q = 0; q < m; ++q) {
    PeriodicField fplus = f, fminus = f;
    for (std::size_t j = 0; j < n; ++j) {
      fplus.at(j) += eps * basis(static_cast<Eigen::Index>(j), q);
      fminus.at(j) -= eps * basis(static_cast<Eigen::Index>(j), q);
    }
    const PeriodicField dplus = rhs(fplus);
    const PeriodicField dminus = rhs(fminus);
    Eigen::VectorXd col(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      col(static_cast<Eigen::Index>(j)) = (dplus[j] - dminus[j]) / (2.0 * eps);
    jac.col(q) = basis.transpose() * col;
  }
  return jac;
}

/// Orthonormal Fourier basis of the mean-zero subspace, k = 1..n/2-1. The
/// Nyquist cosine is excluded: odd derivatives annihilate it, so it is a
/// structurally neutral direction of the discretization, not a physical one.
Eigen::MatrixXd mean_zero_basis(std::size_t n) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n - 2));
  Eigen::Index col = 0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = PeriodicField::node(j, n);
      v(static_cast<Eigen::Index>(j), col) = std::cos(k * x) * std::sqrt(2.0 / n);
      v(static_cast<Eigen::Index>(j), col + 1) = std::sin(k * x) * std::sqrt(2.0 / n);
    }
    col += 2;
  }
  return v;
}

Eigen::MatrixXd even_basis(std::size_t n) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n / 2 - 1));
  for (std::size_t k = 1; k < n / 2; ++k)
    for (std::size_t j = 0; j < n; ++j)
      v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k - 1)) =
          std::cos(k * PeriodicField::node(j, n)) * std::sqrt(2.0 / n);
  return v;
}

}  // namespace

std::vector<std::complex<double>> jacobian_spectrum(const PeriodicField& f,
                                                    const PhysicalParams& params,
                                                    Regime regime) {
  const Eigen::MatrixXd jac = fd_jacobian(f, make_rhs(params, regime), mean_zero_basis(f.size()));
  const Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
  std::vector<std::complex<double>> eigs(static_cast<std::size_t>(jac.rows()));
  for (Eigen::Index i = 0; i < jac.rows(); ++i) eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return eigs;
}

Eigen::MatrixXd jacobian_even_subspace(const PeriodicField& f, const PhysicalParams& params,
                                       Regime regime) {
  return fd_jacobian(f, make_rhs(params, regime), even_basis(f.size()));
}

std::vector<ExchangePoint> exchange_of_stability(const std::vector<double>& s_values,
                                                 const ContinuationOptions& opts) {
  std::vector<ExchangePoint> out;
  for (double s : s_values) {
    ExchangePoint ep;
    ep.s = s;
    if (s == 0.0) {
      ep.lambda = 1.0;
      ep.z = 0.0;
      out.push_back(ep);
      continue;
    }
    const BranchPoint bp = solve_at_amplitude(1, s, opts);
    ep.lambda = bp.lambda;
    const PhysicalParams params = normalized_params(bp.lambda, opts.a_mu);
    const Eigen::MatrixXd jac = jacobian_even_subspace(bp.f, params, Regime::SigmaPositive);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
    // Track the eigenvalue whose eigenvector overlaps cos(x) the most.
    double best = -1.0;
    for (Eigen::Index i = 0; i < jac.rows(); ++i) {
      const double overlap =
          std::abs(es.eigenvectors()(0, i)) / es.eigenvectors().col(i).norm();
      if (overlap > best) {
        best = overlap;
        ep.z = es.eigenvalues()(i).real();
      }
    }
    out.push_back(ep);
  }
  return out;
}

PhysicalParams normalized_params(double lambda, double a_mu) {
  if (!(std::abs(a_mu) < 1.0)) throw std::invalid_argument("normalized_params: |a_mu| < 1");
  PhysicalParams p;
  p.mu_minus = 0.5 * (1.0 + a_mu);
  p.mu_plus = 0.5 * (1.0 - a_mu);
  p.permeability = 1.0;  // b_mu = k/(mu_-+mu_+) = 1
  p.sigma = 1.0;
  p.gravity = 1.0;
  p.frame_speed = 0.0;
  p.rho_minus = 0.0;
  p.rho_plus = lambda;  // Theta = g(rho_- - rho_+) = -lambda
  return p;
}

}  // namespace muskat
