#ifndef RUNTUMBLE_FREE_ENERGY_HPP
#define RUNTUMBLE_FREE_ENERGY_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "runtumble/model.hpp"

namespace rtp {

using Complex = std::complex<double>;

/// Closed-form e^{t M(q)} of the 1D two-state model, valid for complex q
/// (real wave numbers and tilts q = -i alpha alike):
///   e^{tM} = e^{tA} (cosh(tB) I + sinh(tB)/B * N),
/// A = C(q) - gamma, B = sqrt(gamma^2 - lambda^2 sin^2 q) (principal
/// branch; the assembly is an even function of B, and B -> 0 is handled by
/// the sinh(tB)/B limit), N the traceless part of M(q).
struct ClosedExpm {
  Complex q;
  double t = 0;
  Complex big_a;  // A
  Complex big_b;  // B
  Complex prefactor;  // e^{tA}/(2 gamma B); infinite at B = 0
  Complex g11, g12;   // entries of G(t,q); prefactor * G = e^{tM}
  Eigen::Matrix2cd matrix;
};

ClosedExpm matrix_exponential_closed(const LatticeModel& model, Complex q,
                                     double t);

/// E e^{alpha X_t} = (1,1) e^{t M(-i alpha)} mu0; real and >= 1 for the
/// uniform initial velocity distribution.
double moment_generating(const LatticeModel& model, double alpha, double t,
                         Eigen::Vector2d mu0 = Eigen::Vector2d(0.5, 0.5));

/// F(alpha) = kappa Gamma(alpha) + lambda (cosh alpha - 1)
///            + sqrt(gamma^2 + lambda^2 sinh^2 alpha) - gamma,
/// the large-deviation free energy of the 1D two-state model (for the
/// nearest-neighbor kernel the first two terms collapse to
/// (2k + lambda)(cosh alpha - 1)).
double free_energy_lattice(const LatticeModel& model, double alpha);
double free_energy_lattice_deriv(const LatticeModel& model, double alpha);

/// Drifted telegrapher free energy
/// F_E(alpha) = kappa alpha^2 + 2 alpha kappa E
///              + sqrt(lambda^2 alpha^2 + gamma^2) - gamma;
/// F_E'(0) = 2 kappa E (asymptotic velocity) and
/// F_E''(0) = 2 kappa + lambda^2/gamma, independent of E.
double free_energy_continuum(const ContinuumModel& model, double alpha);
double free_energy_continuum_deriv(const ContinuumModel& model, double alpha);

/// A convex differentiable scalar free energy; `deriv` may be empty, in
/// which case a central difference of `value` is used.
struct ScalarFreeEnergy {
  std::function<double(double)> value;
  std::function<double(double)> deriv;

  double d(double alpha) const;
};

ScalarFreeEnergy lattice_free_energy(const LatticeModel& model);
ScalarFreeEnergy continuum_free_energy(const ContinuumModel& model);

struct LegendrePoint {
  double x;
  double rate;        // I(x) = alpha* x - F(alpha*)
  double alpha_star;  // solves F'(alpha*) = x
};

/// Legendre-Fenchel transform at x: safeguarded Newton on F'(a) = x with
/// bracket expansion by doubling; |F'(alpha*) - x| <= 1e-10 at return.
LegendrePoint legendre_transform(const ScalarFreeEnergy& f, double x);

struct FreeEnergyCurve {
  std::vector<double> alpha;
  std::vector<double> value;
  std::vector<double> deriv;
  double second_deriv_origin;  // central difference, h = 1e-4
};
FreeEnergyCurve evaluate_free_energy_curve(const ScalarFreeEnergy& f,
                                           const std::vector<double>& grid);

struct RateCurve {
  std::vector<double> x;
  std::vector<double> rate;
  std::vector<double> alpha_star;
};
RateCurve evaluate_rate_curve(const ScalarFreeEnergy& f,
                              const std::vector<double>& grid);

/// Deviation sequence of a limit: parameter values, |value - target|, and
/// the fitted decay order (log-log slope against the parameter).
struct LimitSeries {
  std::vector<double> parameter;
  std::vector<double> deviation;
  double fitted_order;
  double target;
};

/// Rescaled lattice free energy against the continuum one:
/// eps^-2 F_lattice(eps alpha; eps lambda, kappa, eps^2 gamma) compared to
/// kappa alpha^2 + sqrt(gamma^2 + lambda^2 alpha^2) - gamma, where kappa is
/// the per-direction nearest-neighbor rate. Requires the nearest-neighbor
/// two-state model.
LimitSeries continuum_limit_check(const LatticeModel& model, double alpha,
                                  std::vector<double> epsilons);

}  // namespace rtp

#endif
