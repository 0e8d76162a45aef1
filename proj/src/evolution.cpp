#include "muskat/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace muskat {

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicField quasilinear_rhs(const PeriodicField& f, const PeriodicField& h, double theta) {
  // h'''/(1+f'^2)^{3/2} - 3 f' f'' h''/(1+f'^2)^{5/2} - Theta h'
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  const PeriodicField hp = derivative(h, 1);
  const PeriodicField hpp = derivative(h, 2);
  const PeriodicField hppp = derivative(h, 3);
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double q = 1.0 + fp[j] * fp[j];
    v[j] = hppp[j] / std::pow(q, 1.5) - 3.0 * fp[j] * fpp[j] * hpp[j] / std::pow(q, 2.5) -
           theta * hp[j];
  }
  return PeriodicField(std::move(v));
}

}  // namespace

PeriodicField rhs_sigma(const PeriodicField& f, const PhysicalParams& p,
                        const DerivedConstants& c) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("rhs_sigma: requires sigma > 0");
  PeriodicField g = p.sigma * curvature(f);
  g -= c.theta * f;
  const PeriodicField rhs = project_zero_mean(derivative(g, 1));
  PeriodicField out = apply_b_after_solve(f, c.a_mu, rhs);
  out *= c.b_mu;
  return out;
}

PeriodicField rhs_zero_st(const PeriodicField& f, const PhysicalParams& p,
                          const DerivedConstants& c) {
  if (p.sigma != 0.0) throw std::invalid_argument("rhs_zero_st: requires sigma = 0");
  PeriodicField out =
      apply_b_after_solve(f, c.a_mu, project_zero_mean(derivative(f, 1)));
  out *= -c.c_theta;
  return out;
}

PeriodicField omega_of(const PeriodicField& f, const PeriodicField& h, double theta,
                       double a_mu) {
  return solve_omega(f, a_mu, project_zero_mean(quasilinear_rhs(f, h, theta)));
}

std::pair<PeriodicField, PeriodicField> decompose_omega(const PeriodicField& f,
                                                        const PeriodicField& h, double theta,
                                                        double a_mu) {
  const VortexStrengthSolver solver(f, a_mu);
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField hpp = derivative(h, 2);
  std::vector<double> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    v[j] = hpp[j] / std::pow(1.0 + fp[j] * fp[j], 1.5);
  const PeriodicField omega1 = solver.solve(project_zero_mean(PeriodicField(std::move(v))));

  PeriodicField rhs2 = -theta * derivative(h, 1);
  PeriodicField lot = t_lot_a(f, omega1);
  lot *= a_mu;
  rhs2 += lot;
  const PeriodicField omega2 = solver.solve(project_zero_mean(rhs2));
  return {omega1, omega2};
}

void StepControl::validate() const {
  if (!(dt_min <= dt_init && dt_init <= dt_max))
    throw std::invalid_argument("StepControl: need dt_min <= dt_init <= dt_max");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("StepControl: tolerances must be positive");
}

SimulationState SimulationState::make(PeriodicField f0, const PhysicalParams& p) {
  SimulationState s;
  s.f = std::move(f0);
  s.params = p;
  s.constants = derive_constants(p);
  return s;
}

namespace {

using Rhs = std::function<PeriodicField(const PeriodicField&)>;

double error_norm(const PeriodicField& err, const PeriodicField& y0, const PeriodicField& y1,
                  double abs_tol, double rel_tol) {
  double acc = 0.0;
  for (std::size_t j = 0; j < err.size(); ++j) {
    const double sc = abs_tol + rel_tol * std::max(std::abs(y0[j]), std::abs(y1[j]));
    const double e = err[j] / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

struct StepResult {
  PeriodicField y;
  double err = 0.0;
};

/// Dormand-Prince 5(4) step; k1 may be reused from the previous step (FSAL).
StepResult erk_step(const Rhs& rhs, const PeriodicField& y, double dt, PeriodicField& k1,
                    bool& k1_valid, const StepControl& ctrl) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!k1_valid) {
    k1 = rhs(y);
    k1_valid = true;
  }
  PeriodicField k2 = rhs(y + dt * a21 * k1);
  PeriodicField k3 = rhs(y + dt * a31 * k1 + dt * a32 * k2);
  PeriodicField k4 = rhs(y + dt * a41 * k1 + dt * a42 * k2 + dt * a43 * k3);
  PeriodicField k5 = rhs(y + dt * a51 * k1 + dt * a52 * k2 + dt * a53 * k3 + dt * a54 * k4);
  PeriodicField k6 = rhs(y + dt * a61 * k1 + dt * a62 * k2 + dt * a63 * k3 + dt * a64 * k4 +
                         dt * a65 * k5);
  PeriodicField ynew = y + dt * b1 * k1 + dt * b3 * k3 + dt * b4 * k4 + dt * b5 * k5 +
                       dt * b6 * k6;
  PeriodicField k7 = rhs(ynew);
  PeriodicField err = dt * e1 * k1 + dt * e3 * k3 + dt * e4 * k4 + dt * e5 * k5 +
                      dt * e6 * k6 + dt * e7 * k7;
  StepResult res{ynew, error_norm(err, y, ynew, ctrl.abs_tol, ctrl.rel_tol)};
  k1 = std::move(k7);  // FSAL
  return res;
}

/// Crank-Nicolson on L = -sigma*b_mu*|k|^3, explicit Heun on the remainder.
struct ImexStepper {
  double stiff_coeff = 0.0;  ///< sigma * b_mu

  PeriodicField apply_l(const PeriodicField& y) const {
    PeriodicField out = lambda_cubed(y);
    out *= -stiff_coeff;
    return out;
  }

  PeriodicField solve_cn(const PeriodicField& rhs, double dt) const {
    // (1 + dt/2 sigma b_mu |k|^3)^{-1} in spectral space
    const Spectrum s = rhs.spectrum();
    const std::size_t n = rhs.size();
    std::vector<std::complex<double>> half = s.raw();
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const double kk = static_cast<double>(k);
      half[k] /= 1.0 + 0.5 * dt * stiff_coeff * kk * kk * kk;
    }
    return PeriodicField::from_spectrum(Spectrum(std::move(half), n));
  }

  StepResult do_step(const Rhs& rhs, const PeriodicField& y, double dt,
                     const StepControl& ctrl) const {
    const PeriodicField ly = apply_l(y);
    PeriodicField r0 = rhs(y);
    r0 -= ly;
    const PeriodicField base = y + 0.5 * dt * ly;
    const PeriodicField u1 = solve_cn(base + dt * r0, dt);
    PeriodicField r1 = rhs(u1);
    r1 -= apply_l(u1);
    const PeriodicField ynew = solve_cn(base + 0.5 * dt * (r0 + r1), dt);
    const PeriodicField est = solve_cn(0.5 * dt * (r1 - r0), dt);
    return {ynew, error_norm(est, y, ynew, ctrl.abs_tol, ctrl.rel_tol)};
  }
};

}  // namespace

namespace {
SimSeries simulate_impl(SimulationState state, const StepControl& ctrl, double t_end,
                        const DiagnosticSink& sink, long max_accepted);
}

SimSeries simulate(SimulationState state, const StepControl& ctrl, double t_end,
                   const DiagnosticSink& sink) {
  return simulate_impl(std::move(state), ctrl, t_end, sink, -1);
}

namespace {
SimSeries simulate_impl(SimulationState state, const StepControl& ctrl, double t_end,
                        const DiagnosticSink& sink, long max_accepted) {
  ctrl.validate();
  const bool with_st = state.params.sigma > 0.0;
  const Scheme scheme =
      ctrl.scheme == Scheme::Auto ? (with_st ? Scheme::Imex : Scheme::Erk) : ctrl.scheme;
  const Rhs rhs = [&state, with_st](const PeriodicField& f) {
    return with_st ? rhs_sigma(f, state.params, state.constants)
                   : rhs_zero_st(f, state.params, state.constants);
  };
  ImexStepper imex{state.params.sigma * state.constants.b_mu};

  const double eps_rt = 1e-6 * state.constants.c_theta;
  SimSeries series;
  auto record = [&](double dt_used) {
    StepRecord r;
    r.t = state.t;
    r.dt = dt_used;
    r.mean = mean(state.f);
    r.l2 = l2_norm(state.f);
    r.h2 = sobolev_norm(state.f, 2.0);
    r.min_a_rt = std::numeric_limits<double>::quiet_NaN();
    if (!with_st) {
      const PeriodicField art = rayleigh_taylor_field(state.f, state.constants);
      r.min_a_rt = *std::min_element(art.values().begin(), art.values().end());
    }
    r.tail_max = spectral_tail_max(state.f);
    series.records.push_back(r);
    if (sink) sink(r);
    return r;
  };

  StepRecord first = record(0.0);
  if (!with_st && first.min_a_rt <= eps_rt) {
    series.status = SimStatus::TerminatedRT;
    series.message = "initial data violates the Rayleigh-Taylor condition";
    series.final_state = state;
    return series;
  }

  double dt = std::min(ctrl.dt_init, t_end - state.t);
  double err_prev = 1.0;
  PeriodicField k1;
  bool k1_valid = false;
  long accepted = 0;

  while (state.t < t_end * (1.0 - 1e-14)) {
    if (max_accepted >= 0 && accepted >= max_accepted) break;
    dt = std::min(dt, t_end - state.t);
    if (dt < ctrl.dt_min) {
      series.status = SimStatus::TerminatedBlowup;
      series.message = "time step underflow";
      break;
    }
    StepResult res = scheme == Scheme::Erk ? erk_step(rhs, state.f, dt, k1, k1_valid, ctrl)
                                           : imex.do_step(rhs, state.f, dt, ctrl);
    if (!std::isfinite(res.err)) res.err = 1e10;
    if (res.err <= 1.0) {
      state.t += dt;
      state.f = std::move(res.y);
      ++accepted;
      const StepRecord r = record(dt);
      if (r.h2 > ctrl.max_h2_norm) {
        series.status = SimStatus::TerminatedBlowup;
        series.message = "H^2 norm exceeded max_h2_norm";
        break;
      }
      if (!with_st && r.min_a_rt <= eps_rt) {
        series.status = SimStatus::TerminatedRT;
        series.message = "Rayleigh-Taylor condition reached the boundary";
        break;
      }
      // PI controller (accepted)
      const double order = scheme == Scheme::Erk ? 5.0 : 2.0;
      const double fac = 0.9 * std::pow(std::max(res.err, 1e-10), -0.7 / order) *
                         std::pow(std::max(err_prev, 1e-10), 0.4 / order);
      err_prev = std::max(res.err, 1e-10);
      dt = std::min(ctrl.dt_max, dt * std::clamp(fac, 0.2, 5.0));
    } else {
      dt *= std::max(0.2, 0.9 * std::pow(res.err, -1.0 / (scheme == Scheme::Erk ? 5.0 : 2.0)));
      k1_valid = false;  // state unchanged but k1 was overwritten by FSAL
    }
  }
  series.final_state = state;
  return series;
}
}  // namespace

SimulationState step(const SimulationState& state, const StepControl& ctrl) {
  SimSeries series = simulate_impl(state, ctrl, state.t + 100.0 * ctrl.dt_max, nullptr, 1);
  if (series.records.size() < 2) throw std::runtime_error("step: no step was accepted");
  return series.final_state;
}

double shift_equivariance_check(const PeriodicField& f0, const PhysicalParams& params,
                                long a_cells, double c_shift, double t_end,
                                const StepControl& ctrl) {
  SimulationState s1 = SimulationState::make(f0, params);
  PeriodicField shifted = shift_by_cells(f0, a_cells);
  for (std::size_t j = 0; j < shifted.size(); ++j) shifted.at(j) += c_shift;
  SimulationState s2 = SimulationState::make(shifted, params);

  const SimSeries r1 = simulate(std::move(s1), ctrl, t_end);
  const SimSeries r2 = simulate(std::move(s2), ctrl, t_end);
  PeriodicField expected = shift_by_cells(r1.final_state.f, a_cells);
  for (std::size_t j = 0; j < expected.size(); ++j) expected.at(j) += c_shift;
  return l2_norm(r2.final_state.f - expected);
}

double fit_decay_rate(const SimSeries& series, double t_lo, double t_hi) {
  std::vector<double> ts, ys;
  for (const auto& r : series.records) {
    if (r.t >= t_lo && r.t <= t_hi && r.l2 > 0.0) {
      ts.push_back(r.t);
      ys.push_back(std::log(r.l2));
    }
  }
  if (ts.size() < 3) throw std::runtime_error("fit_decay_rate: too few samples in window");
  const double n = static_cast<double>(ts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sx += ts[i];
    sy += ys[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

TailFit fit_spectral_tail(const PeriodicField& f, int k_lo, int k_hi) {
  if (k_lo >= k_hi) throw std::invalid_argument("fit_spectral_tail: empty window");
  const Spectrum s = f.spectrum();
  std::vector<double> ks, ys;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double a = std::abs(s.raw()[static_cast<std::size_t>(k)]);
    if (a > 0.0) {
      ks.push_back(static_cast<double>(k));
      ys.push_back(std::log(a));
    }
  }
  TailFit fit;
  if (ks.size() < 3) return fit;
  const double n = static_cast<double>(ks.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sx += ks[i];
    sy += ys[i];
    sxx += ks[i] * ks[i];
    syy += ys[i] * ys[i];
    sxy += ks[i] * ys[i];
  }
  const double cov = n * sxy - sx * sy;
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  fit.slope = cov / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.correlation = vx > 0 && vy > 0 ? cov / std::sqrt(vx * vy) : 0.0;
  return fit;
}

}  // namespace muskat
