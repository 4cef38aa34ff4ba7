#include "runtumble/free_energy.hpp"

#include <cmath>
#include <limits>

#include "runtumble/linalg.hpp"
#include "runtumble/stats.hpp"

namespace rtp {

namespace {

/// C(q) = kappa sum_z p(z)(cos(qz)-1) + lambda (cos q - 1) for complex q.
Complex diagonal_drift_complex(const TwoState1D& m, Complex q) {
  Complex kernel_part = 0.0;
  for (const auto& [z, p] : m.kernel->support)
    kernel_part += p * (std::cos(q * static_cast<double>(z[0])) - 1.0);
  return m.kappa * kernel_part + m.lambda * (std::cos(q) - 1.0);
}

double central_second_difference(const std::function<double(double)>& f,
                                 double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

ClosedExpm matrix_exponential_closed(const LatticeModel& model, Complex q,
                                     double t) {
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  const TwoState1D m = as_two_state_1d(model);
  const Complex s = std::sin(q);
  const Complex imag_unit(0.0, 1.0);

  ClosedExpm out;
  out.q = q;
  out.t = t;
  out.big_a = diagonal_drift_complex(m, q) - m.gamma;
  out.big_b = std::sqrt(Complex(m.gamma * m.gamma) -
                        m.lambda * m.lambda * s * s);

  // M = A I + N with N = [[i lambda sin q, gamma], [gamma, -i lambda sin q]]
  // and N^2 = B^2 I, so e^{tM} = e^{tA}(cosh(tB) I + t sinhc(tB) N).
  const Complex ch = std::cosh(t * out.big_b);
  const Complex sh_over_b = t * sinhc(t * out.big_b);
  const Complex ea = std::exp(t * out.big_a);
  const Complex n11 = imag_unit * m.lambda * s;

  out.matrix << ea * (ch + sh_over_b * n11), ea * sh_over_b * m.gamma,
      ea * sh_over_b * m.gamma, ea * (ch - sh_over_b * n11);

  // Paper-style normalization e^{tM} = (e^{tA}/(2 gamma B)) G(t,q).
  const Complex two_gb = 2.0 * m.gamma * out.big_b;
  out.prefactor = (two_gb == Complex(0.0))
                      ? Complex(std::numeric_limits<double>::infinity(), 0.0)
                      : ea / two_gb;
  out.g11 = two_gb * ch + 2.0 * m.gamma * n11 * std::sinh(t * out.big_b);
  out.g12 = 2.0 * m.gamma * m.gamma * std::sinh(t * out.big_b);
  return out;
}

double moment_generating(const LatticeModel& model, double alpha, double t,
                         Eigen::Vector2d mu0) {
  const ClosedExpm e =
      matrix_exponential_closed(model, Complex(0.0, -alpha), t);
  const Eigen::Vector2cd col = e.matrix * mu0.cast<Complex>();
  const Complex value = col(0) + col(1);
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value)))
    throw NumericalError("moment generating function came out complex");
  return value.real();
}

double free_energy_lattice(const LatticeModel& model, double alpha) {
  const TwoState1D m = as_two_state_1d(model);
  const double sh = std::sinh(alpha);
  return m.kappa * kernel_cumulant(*m.kernel, std::span(&alpha, 1)) +
         m.lambda * (std::cosh(alpha) - 1.0) +
         std::sqrt(m.gamma * m.gamma + m.lambda * m.lambda * sh * sh) -
         m.gamma;
}

double free_energy_lattice_deriv(const LatticeModel& model, double alpha) {
  const TwoState1D m = as_two_state_1d(model);
  double kernel_part = 0.0;
  for (const auto& [z, p] : m.kernel->support)
    kernel_part += p * z[0] * std::sinh(alpha * z[0]);
  const double sh = std::sinh(alpha);
  const double ch = std::cosh(alpha);
  return m.kappa * kernel_part + m.lambda * sh +
         m.lambda * m.lambda * sh * ch /
             std::sqrt(m.gamma * m.gamma + m.lambda * m.lambda * sh * sh);
}

double free_energy_continuum(const ContinuumModel& model, double alpha) {
  const double lam = model.lambda, kap = model.kappa, gam = model.gamma;
  return alpha * alpha * kap + 2.0 * alpha * kap * model.field +
         std::sqrt(lam * lam * alpha * alpha + gam * gam) - gam;
}

double free_energy_continuum_deriv(const ContinuumModel& model, double alpha) {
  const double lam = model.lambda, kap = model.kappa, gam = model.gamma;
  return 2.0 * alpha * kap + 2.0 * kap * model.field +
         lam * lam * alpha /
             std::sqrt(lam * lam * alpha * alpha + gam * gam);
}

double ScalarFreeEnergy::d(double alpha) const {
  if (deriv) return deriv(alpha);
  const double h = 1e-6 * std::max(1.0, std::abs(alpha));
  return (value(alpha + h) - value(alpha - h)) / (2.0 * h);
}

ScalarFreeEnergy lattice_free_energy(const LatticeModel& model) {
  return {[model](double a) { return free_energy_lattice(model, a); },
          [model](double a) { return free_energy_lattice_deriv(model, a); }};
}

ScalarFreeEnergy continuum_free_energy(const ContinuumModel& model) {
  return {[model](double a) { return free_energy_continuum(model, a); },
          [model](double a) { return free_energy_continuum_deriv(model, a); }};
}

LegendrePoint legendre_transform(const ScalarFreeEnergy& f, double x) {
  const double tol = 1e-10;
  auto g = [&](double a) { return f.d(a) - x; };

  // Bracket the root of the increasing function g by doubling.
  double lo = -1.0, hi = 1.0;
  for (int k = 0; g(lo) > 0.0; ++k) {
    if (k > 200) throw NumericalError("Legendre bracket expansion failed");
    lo *= 2.0;
  }
  for (int k = 0; g(hi) < 0.0; ++k) {
    if (k > 200) throw NumericalError("Legendre bracket expansion failed");
    hi *= 2.0;
  }

  double a = 0.5 * (lo + hi);
  double ga = g(a);
  for (int it = 0; it < 200 && std::abs(ga) > tol; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(a));
    const double slope = (g(a + h) - g(a - h)) / (2.0 * h);
    double next = (slope > 0.0) ? a - ga / slope : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisect
    const double gn = g(next);
    if (gn > 0.0)
      hi = next;
    else
      lo = next;
    a = next;
    ga = gn;
  }
  if (std::abs(ga) > tol)
    throw NumericalError("Legendre solver did not reach |F'(a)-x| <= 1e-10");

  LegendrePoint out;
  out.x = x;
  out.alpha_star = a;
  out.rate = a * x - f.value(a);
  if (out.rate < 0.0 && out.rate > -1e-12) out.rate = 0.0;  // rounding guard
  return out;
}

FreeEnergyCurve evaluate_free_energy_curve(const ScalarFreeEnergy& f,
                                           const std::vector<double>& grid) {
  FreeEnergyCurve out;
  out.alpha = grid;
  for (double a : grid) {
    out.value.push_back(f.value(a));
    out.deriv.push_back(f.d(a));
  }
  out.second_deriv_origin = central_second_difference(f.value, 0.0, 1e-4);
  return out;
}

RateCurve evaluate_rate_curve(const ScalarFreeEnergy& f,
                              const std::vector<double>& grid) {
  RateCurve out;
  out.x = grid;
  for (double x : grid) {
    const LegendrePoint p = legendre_transform(f, x);
    out.rate.push_back(p.rate);
    out.alpha_star.push_back(p.alpha_star);
  }
  return out;
}

LimitSeries continuum_limit_check(const LatticeModel& model, double alpha,
                                  std::vector<double> epsilons) {
  const TwoState1D m = as_two_state_1d(model);
  if (!m.nearest_neighbor)
    throw ParameterError(
        "continuum limit check needs the nearest-neighbor kernel");
  const double kap = m.kappa / 2.0;  // per-direction rate
  const double target =
      kap * alpha * alpha +
      std::sqrt(m.gamma * m.gamma + m.lambda * m.lambda * alpha * alpha) -
      m.gamma;

  LimitSeries out;
  out.target = target;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double eps = epsilons[i];
    if (!(eps > 0.0) || (i > 0 && eps >= epsilons[i - 1]))
      throw ParameterError("epsilons must be positive and decreasing");
    const LatticeModel rescaled =
        build_1d_two_state(eps * m.lambda, kap, eps * eps * m.gamma);
    const double value =
        free_energy_lattice(rescaled, eps * alpha) / (eps * eps);
    out.parameter.push_back(eps);
    out.deviation.push_back(std::abs(value - target));
  }
  out.fitted_order = fitted_order(out.parameter, out.deviation);
  return out;
}

}  // namespace rtp
