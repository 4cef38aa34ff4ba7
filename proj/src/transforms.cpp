#include "runtumble/transforms.hpp"

#include <cmath>
#include <functional>

#include "runtumble/stats.hpp"

namespace rtp {

namespace {

/// Real part of the diagonal before the -gamma shift:
/// C(q) = kappa sum_z p(z)(cos(qz)-1) + lambda (cos q - 1).
double diagonal_drift(const TwoState1D& m, double q) {
  double kernel_part = 0.0;
  for (const auto& [z, p] : m.kernel->support)
    kernel_part += p * (std::cos(q * z[0]) - 1.0);
  return m.kappa * kernel_part + m.lambda * (std::cos(q) - 1.0);
}

void check_half_plane(Complex z) {
  if (!(z.real() > 0.0))
    throw DomainError("Fourier-Laplace transform needs Re z > 0");
}

double guard_tolerance(Complex value) {
  return 1e-12 * std::max(1.0, std::abs(value));
}

ScalingDiagnostic run_scaling(double q, double z, double sigma2,
                              std::vector<double>& epsilons,
                              const std::function<Complex(double, double)>& s) {
  if (!(z > 0.0) || q == 0.0)
    throw ParameterError("scaling diagnostic needs z > 0 and q != 0");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0))
      throw ParameterError("epsilons must be positive");
    if (i > 0 && epsilons[i] >= epsilons[i - 1])
      throw ParameterError("epsilons must be decreasing");
  }
  const double target = 1.0 / (z + 0.5 * sigma2 * q * q);
  ScalingDiagnostic out;
  std::vector<double> devs;
  for (double eps : epsilons) {
    const Complex value = s(eps * q, eps * eps * z);
    const double dev = std::abs(eps * eps * value - target);
    out.points.push_back({eps, dev});
    devs.push_back(dev);
  }
  out.fitted_order = fitted_order(epsilons, devs);
  return out;
}

}  // namespace

TransportMatrix1D transport_matrix(const LatticeModel& model, double q) {
  const TwoState1D m = as_two_state_1d(model);
  TransportMatrix1D t;
  t.q = q;
  t.a = Complex(diagonal_drift(m, q) - m.gamma, m.lambda * std::sin(q));
  t.b = m.gamma;
  return t;
}

FourierLaplaceValue fourier_laplace_lattice(const LatticeModel& model,
                                            double q, Complex z,
                                            double alpha0) {
  check_half_plane(z);
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0))
    throw ParameterError("alpha0 must lie in [0,1]");
  const TwoState1D m = as_two_state_1d(model);

  // Closed form: numerator i lambda (2 alpha0 - 1) sin q + 2 gamma + z - C,
  // denominator (gamma + z - C)^2 - gamma^2 + lambda^2 sin^2 q.
  const double c = diagonal_drift(m, q);
  const double s = std::sin(q);
  const Complex numerator =
      Complex(0.0, m.lambda * (2.0 * alpha0 - 1.0) * s) + 2.0 * m.gamma + z -
      c;
  const Complex base = m.gamma + z - c;
  const Complex denominator =
      base * base - m.gamma * m.gamma + m.lambda * m.lambda * s * s;
  const Complex closed = numerator / denominator;

  // Independent route: explicit 2x2 resolvent applied to the initial
  // velocity column.
  const Eigen::Matrix2cd mat = transport_matrix(model, q).matrix();
  const Eigen::Matrix2cd resolvent =
      (z * Eigen::Matrix2cd::Identity() - mat).inverse();
  const Eigen::Vector2cd mu0(alpha0, 1.0 - alpha0);
  const Eigen::Vector2cd applied = resolvent * mu0;
  const Complex from_resolvent = applied(0) + applied(1);

  FourierLaplaceValue out;
  out.q = q;
  out.z = z;
  out.value = closed;
  out.residual = std::abs(closed - from_resolvent);
  if (out.residual > guard_tolerance(closed))
    throw NumericalError("S(q,z) closed form and resolvent disagree by " +
                         std::to_string(out.residual));
  return out;
}

FourierLaplaceValue fourier_laplace_continuum(const ContinuumModel& model,
                                              double q, Complex z) {
  check_half_plane(z);
  if (model.field != 0.0)
    throw ParameterError("continuum transform is for E = 0 only");
  const double lam = model.lambda, kap = model.kappa, gam = model.gamma;

  const Complex numerator = 2.0 * gam + z + kap * q * q;
  const Complex base = z + kap * q * q + gam;
  const Complex denominator =
      base * base + lam * lam * q * q - gam * gam;
  const Complex closed = numerator / denominator;

  Eigen::Matrix2cd m;
  m << Complex(-kap * q * q - gam, lam * q), Complex(gam, 0.0),
      Complex(gam, 0.0), Complex(-kap * q * q - gam, -lam * q);
  const Eigen::Matrix2cd resolvent =
      (z * Eigen::Matrix2cd::Identity() - m).inverse();
  const Eigen::Vector2cd mu0(0.5, 0.5);
  const Eigen::Vector2cd applied = resolvent * mu0;
  const Complex from_resolvent = applied(0) + applied(1);

  FourierLaplaceValue out;
  out.q = q;
  out.z = z;
  out.value = closed;
  out.residual = std::abs(closed - from_resolvent);
  if (out.residual > guard_tolerance(closed))
    throw NumericalError("continuum S(q,z) routes disagree by " +
                         std::to_string(out.residual));
  return out;
}

double diffusion_constant(const LatticeModel& model) {
  const TwoState1D m = as_two_state_1d(model);
  return m.kappa * m.kernel->second_moment()[0] + m.lambda +
         m.lambda * m.lambda / m.gamma;
}

double diffusion_constant(const ContinuumModel& model) {
  return 2.0 * model.kappa + model.lambda * model.lambda / model.gamma;
}

ScalingDiagnostic scaling_diagnostic(const LatticeModel& model, double q,
                                     double z, std::vector<double> epsilons,
                                     double alpha0) {
  const double sigma2 = diffusion_constant(model);
  return run_scaling(q, z, sigma2, epsilons, [&](double qq, double zz) {
    return fourier_laplace_lattice(model, qq, Complex(zz, 0.0), alpha0).value;
  });
}

ScalingDiagnostic scaling_diagnostic(const ContinuumModel& model, double q,
                                     double z, std::vector<double> epsilons) {
  const double sigma2 = diffusion_constant(model);
  return run_scaling(q, z, sigma2, epsilons, [&](double qq, double zz) {
    return fourier_laplace_continuum(model, qq, Complex(zz, 0.0)).value;
  });
}

}  // namespace rtp
