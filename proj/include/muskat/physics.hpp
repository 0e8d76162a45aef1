#pragma once

#include <array>
#include <optional>
#include <vector>

#include "muskat/periodic_field.hpp"
#include "muskat/singular_ops.hpp"

namespace muskat {

/// Physical data of the two-fluid system. Fluid "minus" occupies the region
/// below the interface, fluid "plus" the region above.
struct PhysicalParams {
  double mu_minus = 1.0;      ///< viscosity below, > 0
  double mu_plus = 1.0;       ///< viscosity above, > 0
  double rho_minus = 1.0;     ///< density below
  double rho_plus = 0.0;      ///< density above
  double permeability = 1.0;  ///< k > 0
  double sigma = 0.0;         ///< surface tension >= 0
  double gravity = 1.0;
  double frame_speed = 0.0;   ///< V, vertical speed of the co-moving frame
};

struct DerivedConstants {
  double theta = 0.0;    ///< g (rho_- - rho_+) + (mu_- - mu_+) V / k
  double a_mu = 0.0;     ///< Atwood number (mu_- - mu_+)/(mu_- + mu_+), |.| < 1
  double b_mu = 0.0;     ///< k / (mu_- + mu_+)
  double c_theta = 0.0;  ///< k Theta / (mu_- + mu_+) = b_mu * theta
  std::optional<double> lambda;  ///< -Theta/sigma, only when sigma > 0
};

/// Validates the parameter invariants and evaluates the derived constants.
DerivedConstants derive_constants(const PhysicalParams& p);

/// Rayleigh-Taylor diagnostic field a_RT = c_Theta + a_mu * Phi(f), where Phi
/// is the zero-surface-tension evolution operator. The interface lies in the
/// parabolic set O exactly when min a_RT > 0, which requires Theta > 0.
PeriodicField rayleigh_taylor_field(const PeriodicField& f, const DerivedConstants& c);

/// Interface curvature f'' / (1 + f'^2)^{3/2}; mean-free up to aliasing.
PeriodicField curvature(const PeriodicField& f);

using Vec2 = std::array<double, 2>;

enum class Side { Minus, Plus };  ///< Minus: y < f(x), Plus: y > f(x)

/// Velocity field induced by the vortex sheet (f, omega), evaluated off the
/// interface by the periodic trapezoidal rule on a spectrally upsampled copy
/// of the sheet data. omega must be mean-zero; points closer than 1e-8 in
/// vertical distance to the sheet are rejected.
std::vector<Vec2> velocity_field(const PeriodicField& f, const PeriodicField& omega,
                                 const std::vector<Vec2>& points,
                                 std::size_t upsample_to = 0);

/// Reusable evaluator behind velocity_field (precomputes the upsampled sheet).
class VelocityEvaluator {
 public:
  VelocityEvaluator(const PeriodicField& f, const PeriodicField& omega,
                    std::size_t upsample_to = 0);
  Vec2 operator()(double x, double y) const;
  double interface_height(double x) const { return f_.eval(x); }

 private:
  PeriodicField f_;
  std::vector<double> f_fine_, omega_fine_;
  std::size_t n_fine_ = 0;
};

/// One-sided boundary values of the velocity on the interface: the principal
/// value part of the sheet integral plus the local jump term
/// -+ omega (1, f') / (2 (1 + f'^2)).
std::pair<PeriodicField, PeriodicField> velocity_trace(const PeriodicField& f,
                                                       const PeriodicField& omega, Side side);

/// Pressure reconstruction by line integration of Darcy's law from the
/// far field at y = +-d, d = ||f||_inf + 1. The additive constants are fixed
/// by the Laplace-Young condition at the anchor x = 0. The evaluator owns the
/// velocity data of both phases.
class PressureEvaluator {
 public:
  PressureEvaluator(const PeriodicField& f, const PeriodicField& omega,
                    const PhysicalParams& params);

  /// Pressure at an off-interface point of the given phase.
  double operator()(Side side, double x, double y) const;

  /// One-sided limit of the pressure on the interface at horizontal
  /// position x (handles the near-sheet part of the path with the exact
  /// trace value as quadrature endpoint).
  double interface_pressure(Side side, double x) const;

  double far_field_height() const { return d_; }

 private:
  double vertical_integral(Side side, double x, double y_from, double y_to) const;
  double horizontal_integral(Side side, double x, double level) const;
  double raw_pressure(Side side, double x, double y, bool to_interface) const;

  VelocityEvaluator vel_;
  PeriodicField f_;
  std::pair<PeriodicField, PeriodicField> trace_minus_, trace_plus_;
  PhysicalParams params_;
  double d_ = 0.0;
  std::array<double, 2> c_side_ = {0.0, 0.0};  ///< integration constants c_-
                                               ///< and c_+
};

/// Batch evaluation used by the CLI; rejects on-interface points.
std::vector<double> pressure_field(const PeriodicField& f, const PeriodicField& omega,
                                   const PhysicalParams& params, Side side,
                                   const std::vector<Vec2>& points);

}  // namespace muskat
