#include "muskat/singular_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace muskat {

namespace {

constexpr double kPi = std::numbers::pi;

inline double kern_a_val(double fp, double t, double T) {
  const double t2 = t * t, T2 = T * T;
  return (fp * t * (1.0 - T2) - (1.0 + t2) * T) / (t2 + T2);
}

inline double kern_b_val(double fp, double t, double T) {
  const double t2 = t * t, T2 = T * T;
  return (fp * (1.0 + t2) * T + t * (1.0 - T2)) / (t2 + T2);
}

/// Grid data shared by all offset-rule evaluations against one frozen f.
struct OpContext {
  explicit OpContext(const PeriodicField& f)
      : rule(f.size()),
        n(f.size()),
        f_nodal(f.values()),
        fp_nodal(derivative(f, 1).values()),
        f_half(half_shift_back(f).values()) {}

  QuadratureRule rule;
  std::size_t n;
  std::vector<double> f_nodal, fp_nodal, f_half;
};

/// Index of the sample g(x_i - s_m) inside half_shift_back(g).values().
inline std::size_t eval_index(std::size_t i, std::size_t m, std::size_t n) {
  return (i + n - m) % n;
}

void run_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t nthreads = std::clamp<std::size_t>(hw == 0 ? 1 : hw, 1, 8);
  if (n < 64) nthreads = 1;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

QuadratureRule::QuadratureRule(std::size_t n_) : n(n_) {
  weight = 2.0 * kPi / static_cast<double>(n);
  offset.resize(n);
  offset_wrapped.resize(n);
  tan_half.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double s = (static_cast<double>(m) + 0.5) * weight;
    offset[m] = s;
    offset_wrapped[m] = s > kPi ? s - 2.0 * kPi : s;
    tan_half[m] = std::tan(0.5 * offset_wrapped[m]);
  }
}

double kernel_a(const PeriodicField& f, double x, double s) {
  const double swrap = std::remainder(s, 2.0 * kPi);
  if (swrap == 0.0) throw std::invalid_argument("kernel_a: s = 0 mod 2*pi");
  const double t = std::tan(0.5 * swrap);
  const double T = std::tanh(0.5 * (f.eval(x) - f.eval(x - s)));
  return kern_a_val(f.eval_derivative(x), t, T);
}

double kernel_b(const PeriodicField& f, double x, double s) {
  const double swrap = std::remainder(s, 2.0 * kPi);
  if (swrap == 0.0) throw std::invalid_argument("kernel_b: s = 0 mod 2*pi");
  const double t = std::tan(0.5 * swrap);
  const double T = std::tanh(0.5 * (f.eval(x) - f.eval(x - s)));
  return kern_b_val(f.eval_derivative(x), t, T);
}

PeriodicField OperatorMatrix::apply(const PeriodicField& omega) const {
  Eigen::Map<const Eigen::VectorXd> w(omega.values().data(),
                                      static_cast<Eigen::Index>(omega.size()));
  Eigen::VectorXd out = entries * w;
  return PeriodicField(std::vector<double>(out.data(), out.data() + out.size()));
}

OperatorMatrix assemble(const PeriodicField& f, OperatorKind kind) {
  if (kind != OperatorKind::A && kind != OperatorKind::B)
    throw std::invalid_argument("assemble: kind must be A or B");
  const OpContext ctx(f);
  const std::size_t n = ctx.n;
  const double wq = 1.0 / static_cast<double>(n);  // (1/2pi) * (2pi/n)
  const bool is_a = kind == OperatorKind::A;

  OperatorMatrix out;
  out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.kind = kind;
  out.frozen_f_hash = field_fingerprint(f);

  run_rows(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      const double fi = ctx.f_nodal[i];
      const double fpi = ctx.fp_nodal[i];
      for (std::size_t j = 0; j < n; ++j) {
        // quadrature weight against the sample at x_i - s_m, m = i - j mod n
        const std::size_t m = (i + n - j) % n;
        const double T = std::tanh(0.5 * (fi - ctx.f_half[j]));
        const double t = ctx.rule.tan_half[m];
        row[j] = wq * (is_a ? kern_a_val(fpi, t, T) : kern_b_val(fpi, t, T));
      }
      // Compose with the half-grid interpolation map: acting on nodal values
      // means applying the forward half-shift to each row.
      PeriodicField shifted = half_shift_forward(PeriodicField(row));
      for (std::size_t j = 0; j < n; ++j)
        out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = shifted[j];
    }
  });
  return out;
}

OperatorMatrix transpose_as_adjoint(const OperatorMatrix& m) {
  OperatorMatrix out;
  out.entries = m.entries.transpose();
  out.frozen_f_hash = m.frozen_f_hash;
  switch (m.kind) {
    case OperatorKind::A: out.kind = OperatorKind::AAdjoint; break;
    case OperatorKind::B: out.kind = OperatorKind::BAdjoint; break;
    case OperatorKind::AAdjoint: out.kind = OperatorKind::A; break;
    case OperatorKind::BAdjoint: out.kind = OperatorKind::B; break;
    default: out.kind = m.kind; break;
  }
  return out;
}

namespace {

PeriodicField apply_ab(const PeriodicField& f, const PeriodicField& omega, bool is_a) {
  if (f.size() != omega.size()) throw std::invalid_argument("apply: size mismatch");
  const OpContext ctx(f);
  const std::size_t n = ctx.n;
  const std::vector<double> omega_half = half_shift_back(omega).values();
  const double wq = 1.0 / static_cast<double>(n);
  std::vector<double> out(n, 0.0);
  run_rows(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double fi = ctx.f_nodal[i];
      const double fpi = ctx.fp_nodal[i];
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t j = eval_index(i, m, n);
        const double T = std::tanh(0.5 * (fi - ctx.f_half[j]));
        const double t = ctx.rule.tan_half[m];
        acc += (is_a ? kern_a_val(fpi, t, T) : kern_b_val(fpi, t, T)) * omega_half[j];
      }
      out[i] = wq * acc;
    }
  });
  return PeriodicField(std::move(out));
}

}  // namespace

PeriodicField apply_a(const PeriodicField& f, const PeriodicField& omega) {
  return apply_ab(f, omega, true);
}

PeriodicField apply_b(const PeriodicField& f, const PeriodicField& omega) {
  return apply_ab(f, omega, false);
}

PeriodicField apply_a_adjoint(const PeriodicField& f, const PeriodicField& xi) {
  const OperatorMatrix at = transpose_as_adjoint(assemble(f, OperatorKind::A));
  return at.apply(xi);
}

PeriodicField apply_double_layer(const PeriodicField& f, const PeriodicField& xi) {
  if (f.size() != xi.size()) throw std::invalid_argument("apply_double_layer: size mismatch");
  const OpContext ctx(f);
  const std::size_t n = ctx.n;
  const std::vector<double> xi_half = half_shift_back(xi).values();
  const std::vector<double> fp_half = half_shift_back(derivative(f, 1)).values();
  const double wq = 1.0 / static_cast<double>(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = ctx.f_nodal[i];
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t j = eval_index(i, m, n);
      const double T = std::tanh(0.5 * (fi - ctx.f_half[j]));
      const double t = ctx.rule.tan_half[m];
      const double t2 = t * t, T2 = T * T;
      acc += ((1.0 + t2) * T - fp_half[j] * t * (1.0 - T2)) / (t2 + T2) * xi_half[j];
    }
    out[i] = wq * acc;
  }
  return PeriodicField(std::move(out));
}

PeriodicField apply_b_adjoint(const PeriodicField& f, const PeriodicField& xi) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpxi = hadamard(fp, xi);
  PeriodicField out = apply_b_part(f, fpxi, Part::B1);
  out *= -1.0;
  out += apply_b_part(f, xi, Part::B2);
  PeriodicField c = apply_cnm({f}, {}, xi);          // C01(f)[xi]
  c += apply_cnm({f}, {f}, fpxi);                    // C11(f)[f, f' xi]
  c *= 1.0 / kPi;
  out -= c;
  return out;
}

VortexStrengthSolver::VortexStrengthSolver(const PeriodicField& f, double a_mu) {
  if (!(std::abs(a_mu) < 1.0))
    throw std::invalid_argument("VortexStrengthSolver: |a_mu| must be < 1");
  const OperatorMatrix a = assemble(f, OperatorKind::A);
  system_ = a_mu * a.entries;
  system_.diagonal().array() += 1.0;
  lu_.compute(system_);
  const Eigen::VectorXd d = lu_.matrixLU().diagonal().cwiseAbs();
  if (d.minCoeff() <= 1e-14 * d.maxCoeff())
    throw SingularOperatorError("vortex-strength system is numerically singular");
}

PeriodicField VortexStrengthSolver::solve(const PeriodicField& rhs) const {
  const std::size_t n = static_cast<std::size_t>(system_.rows());
  if (rhs.size() != n) throw std::invalid_argument("solve: size mismatch");
  const double scale = l2_norm(rhs);
  if (std::abs(mean(rhs)) > 1e-6 * (scale + 1.0))
    throw std::invalid_argument("solve_omega: rhs must be mean-zero");
  Eigen::Map<const Eigen::VectorXd> b(rhs.values().data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd w = lu_.solve(b);
  w += lu_.solve(b - system_ * w);  // one refinement step
  PeriodicField out(std::vector<double>(w.data(), w.data() + w.size()));
  return project_zero_mean(out);
}

PeriodicField solve_omega(const PeriodicField& f, double a_mu, const PeriodicField& rhs) {
  return VortexStrengthSolver(f, a_mu).solve(rhs);
}

PeriodicField apply_b_after_solve(const PeriodicField& f, double a_mu,
                                  const PeriodicField& rhs) {
  return apply_b(f, solve_omega(f, a_mu, rhs));
}

PeriodicField apply_cnm(const std::vector<PeriodicField>& a_list,
                        const std::vector<PeriodicField>& b_list, const PeriodicField& omega) {
  const std::size_t n = omega.size();
  for (const auto& g : a_list)
    if (g.size() != n) throw std::invalid_argument("apply_cnm: size mismatch");
  for (const auto& g : b_list)
    if (g.size() != n) throw std::invalid_argument("apply_cnm: size mismatch");

  const QuadratureRule rule(n);
  const std::vector<double> omega_half = half_shift_back(omega).values();
  std::vector<std::vector<double>> a_half, b_half;
  a_half.reserve(a_list.size());
  b_half.reserve(b_list.size());
  for (const auto& g : a_list) a_half.push_back(half_shift_back(g).values());
  for (const auto& g : b_list) b_half.push_back(half_shift_back(g).values());

  std::vector<double> out(n, 0.0);
  run_rows(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t j = eval_index(i, m, n);
        const double s = rule.offset_wrapped[m];
        double term = omega_half[j] / s;
        for (std::size_t q = 0; q < b_list.size(); ++q)
          term *= (b_list[q][i] - b_half[q][j]) / s;
        for (std::size_t q = 0; q < a_list.size(); ++q) {
          const double da = (a_list[q][i] - a_half[q][j]) / s;
          term /= 1.0 + da * da;
        }
        acc += term;
      }
      out[i] = rule.weight * acc;
    }
  });
  return PeriodicField(std::move(out));
}

PeriodicField apply_b_part(const PeriodicField& f, const PeriodicField& omega, Part part) {
  if (f.size() != omega.size()) throw std::invalid_argument("apply_b_part: size mismatch");
  const OpContext ctx(f);
  const std::size_t n = ctx.n;
  const std::vector<double> omega_half = half_shift_back(omega).values();
  std::vector<double> out(n, 0.0);
  const double w1 = 1.0 / static_cast<double>(n);        // (1/2pi) weight
  const double w3 = 2.0 / static_cast<double>(n);        // (1/pi) weight
  run_rows(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double fi = ctx.f_nodal[i];
      const double fpi = ctx.fp_nodal[i];
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const std::size_t j = eval_index(i, m, n);
        const double s = ctx.rule.offset_wrapped[m];
        const double d = fi - ctx.f_half[j];
        const double t = ctx.rule.tan_half[m];
        const double T = std::tanh(0.5 * d);
        const double t2 = t * t, T2 = T * T;
        double k = 0.0;
        switch (part) {
          case Part::B1:
            k = t2 * T / (t2 + T2) +
                (T / (t2 + T2) - (0.5 * d) / (0.25 * s * s + 0.25 * d * d));
            break;
          case Part::B2:
            k = t * T2 / (t2 + T2) -
                (t / (t2 + T2) - (0.5 * s) / (0.25 * s * s + 0.25 * d * d));
            break;
          case Part::B3:
            k = (s + fpi * d) / (s * s + d * d);
            break;
          case Part::A3:
            k = (fpi * s - d) / (s * s + d * d);
            break;
        }
        acc += k * omega_half[j];
      }
      out[i] = (part == Part::B3 || part == Part::A3 ? w3 : w1) * acc;
    }
  });
  return PeriodicField(std::move(out));
}

PeriodicField t_lot_a(const PeriodicField& f, const PeriodicField& omega) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  const PeriodicField omega_p = derivative(omega, 1);

  // C-operator block of (A3(f)[w])' - A3(f)[w'].
  PeriodicField c = hadamard(fpp, apply_cnm({f}, {}, omega));
  c -= 2.0 * hadamard(fp, apply_cnm({f, f}, {fp, f}, omega));
  c -= apply_cnm({f}, {fp}, omega);
  c += 2.0 * apply_cnm({f, f}, {fp, f, f}, omega);
  c *= 1.0 / kPi;

  // Commutators of the bounded parts with d/dx.
  PeriodicField comm2 = derivative(hadamard(fp, apply_b_part(f, omega, Part::B2)), 1);
  comm2 -= hadamard(fp, apply_b_part(f, omega_p, Part::B2));
  PeriodicField comm1 = derivative(apply_b_part(f, omega, Part::B1), 1);
  comm1 -= apply_b_part(f, omega_p, Part::B1);

  return c - comm2 - comm1;
}

double energy_identity_residual(const PeriodicField& f, const PeriodicField& omega, int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("energy_identity_residual: sign must be +1 or -1");
  const PeriodicField bw = apply_b(f, omega);
  const PeriodicField aw = apply_a(f, omega);
  const PeriodicField fp = derivative(f, 1);
  const std::size_t n = f.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = omega[i] + sign * aw[i];  // (1 + s A) w
    const double fpi = fp[i];
    acc += (bw[i] * bw[i] + 2.0 * sign * fpi * bw[i] * g - g * g) / (1.0 + fpi * fpi);
  }
  return std::abs(acc * 2.0 * kPi / static_cast<double>(n));
}

double derivative_identity_residual_b3(const PeriodicField& f, const PeriodicField& omega) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  const PeriodicField omega_p = derivative(omega, 1);
  const PeriodicField lhs = derivative(apply_b_part(f, omega, Part::B3), 1);
  PeriodicField rhs = apply_b_part(f, omega_p, Part::B3);
  PeriodicField c = -2.0 * apply_cnm({f, f}, {fp, f}, omega);
  c += hadamard(fpp, apply_cnm({f}, {f}, omega));
  c += hadamard(fp, apply_cnm({f}, {fp}, omega));
  c -= 2.0 * hadamard(fp, apply_cnm({f, f}, {fp, f, f}, omega));
  c *= 1.0 / kPi;
  rhs += c;
  return l2_norm(lhs - rhs);
}

double derivative_identity_residual_a3(const PeriodicField& f, const PeriodicField& omega) {
  const PeriodicField fp = derivative(f, 1);
  const PeriodicField fpp = derivative(f, 2);
  const PeriodicField omega_p = derivative(omega, 1);
  const PeriodicField lhs = derivative(apply_b_part(f, omega, Part::A3), 1);
  PeriodicField rhs = apply_b_part(f, omega_p, Part::A3);
  PeriodicField c = hadamard(fpp, apply_cnm({f}, {}, omega));
  c -= 2.0 * hadamard(fp, apply_cnm({f, f}, {fp, f}, omega));
  c -= apply_cnm({f}, {fp}, omega);
  c += 2.0 * apply_cnm({f, f}, {fp, f, f}, omega);
  c *= 1.0 / kPi;
  rhs += c;
  return l2_norm(lhs - rhs);
}

void write_operator_dump(const std::string& path, const OperatorMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_operator_dump: cannot open " + path);
  const char magic[8] = {'M', 'U', 'S', 'K', 'O', 'P', '0', '1'};
  os.write(magic, 8);
  const std::uint32_t n = static_cast<std::uint32_t>(m.size());
  const std::uint32_t kind = static_cast<std::uint32_t>(m.kind);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&kind), 4);
  for (std::uint32_t i = 0; i < n; ++i)
    os.write(reinterpret_cast<const char*>(m.entries.row(i).eval().data()),
             static_cast<std::streamsize>(n * sizeof(double)));
  if (!os) throw std::runtime_error("write_operator_dump: write failed");
}

OperatorMatrix read_operator_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_operator_dump: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "MUSKOP01", 8) != 0)
    throw std::runtime_error("read_operator_dump: bad magic");
  std::uint32_t n = 0, kind = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&kind), 4);
  OperatorMatrix m;
  m.kind = static_cast<OperatorKind>(kind);
  m.entries.resize(n, n);
  std::vector<double> row(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n * sizeof(double)));
    for (std::uint32_t j = 0; j < n; ++j) m.entries(i, j) = row[j];
  }
  if (!is) throw std::runtime_error("read_operator_dump: truncated file");
  return m;
}

}  // namespace muskat
