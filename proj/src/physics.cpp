#include "muskat/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace muskat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOnSheetTol = 1e-8;

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss16() {
  static const GaussRule rule = [] {
    constexpr int n = 16;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
      double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double step = p1 / dp;
        t -= step;
        if (std::abs(step) < 1e-15) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      r.x[i] = t;
      r.w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return r;
  }();
  return rule;
}

/// Composite 16-point Gauss quadrature with panel length <= 0.25.
double integrate(const std::function<double(double)>& g, double a, double b) {
  if (a == b) return 0.0;
  const double len = std::abs(b - a);
  const int panels = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
  const GaussRule& r = gauss16();
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = a + (b - a) * (p + 1) / panels;
    const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < r.x.size(); ++q) acc += r.w[q] * g(mid + hw * r.x[q]) * hw;
  }
  return acc;
}

double mu_of(const PhysicalParams& p, Side s) {
  return s == Side::Minus ? p.mu_minus : p.mu_plus;
}
double rho_of(const PhysicalParams& p, Side s) {
  return s == Side::Minus ? p.rho_minus : p.rho_plus;
}

}  // namespace

DerivedConstants derive_constants(const PhysicalParams& p) {
  if (!(p.mu_minus > 0.0) || !(p.mu_plus > 0.0))
    throw std::invalid_argument("derive_constants: viscosities must be positive");
  if (!(p.permeability > 0.0))
    throw std::invalid_argument("derive_constants: permeability must be positive");
  if (p.sigma < 0.0) throw std::invalid_argument("derive_constants: sigma must be >= 0");
  DerivedConstants c;
  const double mu_sum = p.mu_minus + p.mu_plus;
  c.theta = p.gravity * (p.rho_minus - p.rho_plus) +
            (p.mu_minus - p.mu_plus) * p.frame_speed / p.permeability;
  c.a_mu = (p.mu_minus - p.mu_plus) / mu_sum;
  c.b_mu = p.permeability / mu_sum;
  c.c_theta = c.b_mu * c.theta;
  if (p.sigma > 0.0) c.lambda = -c.theta / p.sigma;
  return c;
}

PeriodicField curvature(const PeriodicField& f) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    v[j] = fpp[j] / std::pow(1.0 + fp[j] * fp[j], 1.5);
  return PeriodicField(std::move(v));
}

PeriodicField rayleigh_taylor_field(const PeriodicField& f, const DerivedConstants& c) {
  const PeriodicField phi =
      -c.c_theta * apply_b_after_solve(f, c.a_mu, project_zero_mean(derivative(f, 1)));
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) v[j] = c.c_theta + c.a_mu * phi[j];
  return PeriodicField(std::move(v));
}

VelocityEvaluator::VelocityEvaluator(const PeriodicField& f, const PeriodicField& omega,
                                     std::size_t upsample_to)
    : f_(f) {
  if (f.size() != omega.size()) throw std::invalid_argument("velocity: size mismatch");
  n_fine_ = upsample_to == 0 ? std::max<std::size_t>(4 * f.size(), 1024) : upsample_to;
  n_fine_ = std::max(n_fine_, f.size());
  f_fine_ = resample(f, n_fine_).values();
  omega_fine_ = resample(omega, n_fine_).values();
}

Vec2 VelocityEvaluator::operator()(double x, double y) const {
  if (std::abs(y - f_.eval(x)) < kOnSheetTol)
    throw std::invalid_argument("velocity: point lies on the interface");
  double v1 = 0.0, v2 = 0.0;
  for (std::size_t j = 0; j < n_fine_; ++j) {
    const double s = PeriodicField::node(j, n_fine_);
    const double u = 0.5 * (x - s);
    const double sn = std::sin(u), cs = std::cos(u);
    const double T = std::tanh(0.5 * (y - f_fine_[j]));
    // (1 + t^2)/(t^2 + T^2) and t(1-T^2)/(t^2+T^2) rewritten via sin/cos so
    // the s-node at distance pi never touches the tangent pole.
    const double den = sn * sn + cs * cs * T * T;
    v1 -= omega_fine_[j] * T / den;
    v2 += omega_fine_[j] * sn * cs * (1.0 - T * T) / den;
  }
  const double w = 0.5 / static_cast<double>(n_fine_);
  return {w * v1, w * v2};
}

std::vector<Vec2> velocity_field(const PeriodicField& f, const PeriodicField& omega,
                                 const std::vector<Vec2>& points, std::size_t upsample_to) {
  const VelocityEvaluator eval(f, omega, upsample_to);
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval(p[0], p[1]));
  return out;
}

std::pair<PeriodicField, PeriodicField> velocity_trace(const PeriodicField& f,
                                                       const PeriodicField& omega, Side side) {
  const std::size_t n = f.size();
  if (omega.size() != n) throw std::invalid_argument("velocity_trace: size mismatch");
  const QuadratureRule rule(n);
  const std::vector<double> f_half = half_shift_back(f).values();
  const std::vector<double> omega_half = half_shift_back(omega).values();
  const PeriodicField fp = derivative(f, 1);
  std::vector<double> v1(n, 0.0), v2(n, 0.0);
  const double w = 0.5 / static_cast<double>(n);  // (1/4pi) * (2pi/n)
  for (std::size_t i = 0; i < n; ++i) {
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t j = (i + n - m) % n;
      const double t = rule.tan_half[m];
      const double T = std::tanh(0.5 * (f[i] - f_half[j]));
      const double t2 = t * t, T2 = T * T;
      a1 += omega_half[j] * (-T * (1.0 + t2)) / (t2 + T2);
      a2 += omega_half[j] * t * (1.0 - T2) / (t2 + T2);
    }
    const double local = omega[i] / (2.0 * (1.0 + fp[i] * fp[i]));
    const double sgn = side == Side::Minus ? 1.0 : -1.0;
    v1[i] = w * a1 + sgn * local;
    v2[i] = w * a2 + sgn * local * fp[i];
  }
  return {PeriodicField(std::move(v1)), PeriodicField(std::move(v2))};
}

PressureEvaluator::PressureEvaluator(const PeriodicField& f, const PeriodicField& omega,
                                     const PhysicalParams& params)
    : vel_(f, omega, std::max<std::size_t>(8 * f.size(), 4096)),
      f_(f),
      trace_minus_(velocity_trace(f, omega, Side::Minus)),
      trace_plus_(velocity_trace(f, omega, Side::Plus)),
      params_(params) {
  d_ = max_abs(f) + 1.0;
  // Laplace-Young anchor at x = 0 fixes the additive constants.
  c_side_[0] = 0.0;
  c_side_[1] = 0.0;
  const double f0 = f_.eval(0.0);
  const double p_minus = raw_pressure(Side::Minus, 0.0, f0, true);
  const double p_plus = raw_pressure(Side::Plus, 0.0, f0, true);
  const double kappa0 = curvature(f).eval(0.0);
  c_side_[1] = params_.sigma * kappa0 + p_minus - p_plus;
}

double PressureEvaluator::horizontal_integral(Side side, double x, double level) const {
  return integrate([&](double t) { return vel_(t, level)[0]; }, 0.0, x);
}

double PressureEvaluator::vertical_integral(Side side, double x, double y_from,
                                            double y_to) const {
  return integrate([&](double t) { return vel_(x, t)[1]; }, y_from, y_to);
}

double PressureEvaluator::raw_pressure(Side side, double x, double y,
                                       bool to_interface) const {
  const double level = side == Side::Minus ? -d_ : d_;
  const double mu = mu_of(params_, side);
  const double rho = rho_of(params_, side);
  const double k = params_.permeability;
  double line = horizontal_integral(side, x, level);
  if (to_interface) {
    // Integrate up to a small standoff, then close the gap with Simpson using
    // the exact one-sided trace as the interface endpoint value.
    const double fy = f_.eval(x);
    const double delta = 0.02;
    const double sgn = side == Side::Minus ? -1.0 : 1.0;
    const double y_stop = fy + sgn * delta;
    line += vertical_integral(side, x, level, y_stop);
    const auto& tr = side == Side::Minus ? trace_minus_ : trace_plus_;
    const double v_sheet = tr.second.eval(x);
    const double v_mid = vel_(x, fy + 0.5 * sgn * delta)[1];
    const double v_stop = vel_(x, y_stop)[1];
    line += -sgn * delta / 6.0 * (v_sheet + 4.0 * v_mid + v_stop);
  } else {
    line += vertical_integral(side, x, level, y);
  }
  return -mu / k * line - (rho * params_.gravity + mu * params_.frame_speed / k) * y;
}

double PressureEvaluator::operator()(Side side, double x, double y) const {
  const double fy = f_.eval(x);
  if (std::abs(y - fy) < kOnSheetTol)
    throw std::invalid_argument("pressure: point lies on the interface");
  if ((side == Side::Minus && y > fy) || (side == Side::Plus && y < fy))
    throw std::invalid_argument("pressure: point lies in the other phase");
  return c_side_[side == Side::Minus ? 0 : 1] + raw_pressure(side, x, y, false);
}

double PressureEvaluator::interface_pressure(Side side, double x) const {
  return c_side_[side == Side::Minus ? 0 : 1] +
         raw_pressure(side, x, f_.eval(x), true);
}

std::vector<double> pressure_field(const PeriodicField& f, const PeriodicField& omega,
                                   const PhysicalParams& params, Side side,
                                   const std::vector<Vec2>& points) {
  const PressureEvaluator eval(f, omega, params);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval(side, p[0], p[1]));
  return out;
}

}  // namespace muskat
