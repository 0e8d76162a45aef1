#pragma once

#include <functional>
#include <string>
#include <vector>

#include "muskat/physics.hpp"

namespace muskat {

/// Full right-hand side with surface tension (sigma > 0):
///   b_mu * B(f) [ (1 + a_mu A(f))^{-1} [ (sigma kappa(f) - Theta f)' ] ].
PeriodicField rhs_sigma(const PeriodicField& f, const PhysicalParams& p,
                        const DerivedConstants& c);

/// Right-hand side without surface tension (sigma = 0):
///   -c_Theta * B(f) [ (1 + a_mu A(f))^{-1} [ f' ] ].
PeriodicField rhs_zero_st(const PeriodicField& f, const PhysicalParams& p,
                          const DerivedConstants& c);

/// Vortex strength induced by a displacement h at frozen interface f, in the
/// normalization sigma = b_mu = 1:
///   w(f)[h] = (1 + a_mu A)^{-1}[ h'''/(1+f'^2)^{3/2}
///                                - 3 f' f'' h''/(1+f'^2)^{5/2} - Theta h' ].
PeriodicField omega_of(const PeriodicField& f, const PeriodicField& h, double theta,
                       double a_mu);

/// Splitting w(f)[h] = (w1)' + w2 into a gradient part and a lower-order
/// part; both components are mean-zero.
std::pair<PeriodicField, PeriodicField> decompose_omega(const PeriodicField& f,
                                                        const PeriodicField& h, double theta,
                                                        double a_mu);

enum class Scheme { Auto, Erk, Imex };

struct StepControl {
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_h2_norm = 100.0;
  Scheme scheme = Scheme::Auto;  ///< Auto: ERK for sigma = 0, IMEX otherwise

  void validate() const;
};

struct SimulationState {
  double t = 0.0;
  PeriodicField f;
  PhysicalParams params;
  DerivedConstants constants;

  static SimulationState make(PeriodicField f0, const PhysicalParams& p);
};

/// One diagnostics record per accepted step (the t = 0 state is also
/// recorded, with dt = 0). min_a_rt is NaN for sigma > 0 runs.
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double mean = 0.0;
  double l2 = 0.0;
  double h2 = 0.0;
  double min_a_rt = 0.0;
  double tail_max = 0.0;
};

enum class SimStatus { Completed, TerminatedBlowup, TerminatedRT };

struct SimSeries {
  std::vector<StepRecord> records;
  SimStatus status = SimStatus::Completed;
  std::string message;
  SimulationState final_state;
};

using DiagnosticSink = std::function<void(const StepRecord&)>;

/// Adaptive time integration of the interface evolution up to t_end.
/// ERK: Dormand-Prince 5(4) with PI step control. IMEX: Crank-Nicolson on
/// the constant-coefficient -sigma b_mu |k|^3 multiplier, explicit Heun on
/// the remainder, first-order embedded error estimate.
/// Termination: blow-up when dt underflows dt_min or ||f||_{H^2} exceeds
/// max_h2_norm; Rayleigh-Taylor exit when min a_RT reaches the parabolicity
/// boundary during a sigma = 0 run.
SimSeries simulate(SimulationState state, const StepControl& ctrl, double t_end,
                   const DiagnosticSink& sink = nullptr);

/// One accepted adaptive step (convenience wrapper over the integrator).
SimulationState step(const SimulationState& state, const StepControl& ctrl);

/// || simulate(shift(f0)) - shift(simulate(f0)) ||_2 at t_end, where shift
/// translates by a_cells grid cells horizontally and adds c_shift.
double shift_equivariance_check(const PeriodicField& f0, const PhysicalParams& params,
                                long a_cells, double c_shift, double t_end,
                                const StepControl& ctrl);

/// Least-squares slope of log(l2) over records with t in [t_lo, t_hi];
/// returns the decay rate (negated slope).
double fit_decay_rate(const SimSeries& series, double t_lo, double t_hi);

/// Linear fit of log|f^(k)| against k over k in [k_lo, k_hi].
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;  ///< Pearson r (negative for decaying tails)
};
TailFit fit_spectral_tail(const PeriodicField& f, int k_lo, int k_hi);

}  // namespace muskat
