#ifndef RUNTUMBLE_TRANSFORMS_HPP
#define RUNTUMBLE_TRANSFORMS_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "runtumble/model.hpp"

namespace rtp {

using Complex = std::complex<double>;

/// The 2x2 Fourier-space evolution matrix M(q) of the 1D two-state model:
/// diagonal a, conj(a) (row order +1, -1) and off-diagonal b = gamma.
struct TransportMatrix1D {
  double q = 0;
  Complex a;
  double b = 0;
  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd m;
    m << a, b, b, std::conj(a);
    return m;
  }
};

/// M(q) for a (possibly general-kernel) 1D two-state model;
/// a = kappa sum_z p(z)(cos(qz)-1) + lambda (cos q - 1) - gamma
///     + i lambda sin q.
TransportMatrix1D transport_matrix(const LatticeModel& model, double q);

struct FourierLaplaceValue {
  double q = 0;
  Complex z;
  Complex value;
  /// |closed form - resolvent route|; both are computed on every call.
  double residual = 0;
};

/// S(q,z) = (1,1) (zI - M(q))^{-1} (alpha0, 1-alpha0)^T for Re z > 0.
/// The closed form and the explicit 2x2 inversion are evaluated side by
/// side; disagreement beyond 1e-12 (relative to max(1,|S|)) is a hard error.
FourierLaplaceValue fourier_laplace_lattice(const LatticeModel& model,
                                            double q, Complex z,
                                            double alpha0 = 0.5);

/// Telegrapher transform (E = 0 only):
/// S(q,z) = (2 gamma + z + kappa q^2) /
///          ((z + kappa q^2 + gamma)^2 + lambda^2 q^2 - gamma^2),
/// cross-checked against the resolvent of the continuum flip matrix.
FourierLaplaceValue fourier_laplace_continuum(const ContinuumModel& model,
                                              double q, Complex z);

/// Lattice: kappa sum_z z^2 p(z) + lambda + lambda^2/gamma
/// (nearest-neighbor form 2k + lambda + lambda^2/gamma with k the
/// per-direction rate). Requires the 1D two-state form.
double diffusion_constant(const LatticeModel& model);

/// Continuum: 2 kappa + lambda^2/gamma (independent of the field).
double diffusion_constant(const ContinuumModel& model);

struct ScalingPoint {
  double epsilon;
  double deviation;  // |eps^2 S(eps q, eps^2 z) - 1/(z + sigma^2 q^2/2)|
};

struct ScalingDiagnostic {
  std::vector<ScalingPoint> points;
  double fitted_order;  // log-log least-squares slope in epsilon
};

ScalingDiagnostic scaling_diagnostic(const LatticeModel& model, double q,
                                     double z, std::vector<double> epsilons,
                                     double alpha0 = 0.5);
ScalingDiagnostic scaling_diagnostic(const ContinuumModel& model, double q,
                                     double z, std::vector<double> epsilons);

}  // namespace rtp

#endif
