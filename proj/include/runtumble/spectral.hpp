#ifndef RUNTUMBLE_SPECTRAL_HPP
#define RUNTUMBLE_SPECTRAL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "runtumble/free_energy.hpp"
#include "runtumble/model.hpp"

namespace rtp {

/// Tilted velocity matrix M(alpha) = gamma A^T + diag(psi_alpha) with tilt
/// potential psi_alpha(v) = kappa Gamma(alpha) + lambda (e^<alpha,v> - 1).
/// The transpose acts on distribution columns (forward-equation
/// convention); for symmetric flip rates A^T = A and M(alpha) is symmetric.
struct TiltedMatrix {
  std::vector<double> alpha;
  Eigen::VectorXd psi;
  Eigen::MatrixXd matrix;
  double gamma = 1;
  bool symmetric = false;
};

TiltedMatrix tilted_matrix(const LatticeModel& model,
                           std::span<const double> alpha);

/// Perron eigenpair of M(alpha): real simple top eigenvalue with strictly
/// positive eigenvector (normalized to unit sum). Symmetric matrices go
/// through a dense symmetric eigensolver; general ones through power
/// iteration on M + cI with c = max_v |M_vv|. The eigenvalue of the
/// transpose is computed as well and must agree (orientation invariance).
struct Eigenpair {
  double value = 0;
  Eigen::VectorXd vector;
  int iterations = 0;
};

Eigenpair principal_eigenvalue(const TiltedMatrix& m);

/// Donsker-Varadhan occupation-time rate I_A(mu) for the unit-rate
/// generator A (the gamma prefactor lives in the variational combination
/// gamma I_A(mu)). Symmetric chains use the Dirichlet form
///   I_A(mu) = -sum_{v,v'} sqrt(mu(v)) sqrt(mu(v')) A(v,v');
/// general chains minimize the smooth convex functional
///   u -> sum_v mu(v) sum_{v'} pi(v,v') (e^{u(v')-u(v)} - 1)
/// over the gauge Sum u = 0 by damped Newton. Zero entries of mu follow
/// the conventions 0*(...) = 0 and sqrt(0) = 0.
double donsker_varadhan_rate(const VelocityChain& chain,
                             const OccupationMeasure& mu);
double donsker_varadhan_dirichlet(const VelocityChain& chain,
                                  const OccupationMeasure& mu);
double donsker_varadhan_minimize(const VelocityChain& chain,
                                 const OccupationMeasure& mu);

/// F(alpha) = sup_mu ( sum_v psi_alpha(v) mu(v) - gamma I_A(mu) ) over the
/// probability simplex on V. Symmetric chains: the maximizer is the
/// squared (unit 2-norm) Perron eigenvector and the value is the
/// variational objective evaluated there. General chains: multiplicative
/// mirror ascent with a Collatz-Wielandt duality certificate;
/// `certificate_gap` bounds the distance to the true supremum.
struct VariationalResult {
  double value = 0;
  OccupationMeasure maximizer;
  int iterations = 0;
  double certificate_gap = 0;
};

VariationalResult variational_free_energy(const LatticeModel& model,
                                          std::span<const double> alpha);

/// Monte Carlo estimate of F(alpha) through the Feynman-Kac representation:
/// simulate the velocity chain with generator gamma A, accumulate
/// int_0^T psi_alpha(v_s) ds exactly between jumps, and return
/// (1/T) log of the empirical mean of the exponential, with a
/// delete-one-batch jackknife standard error computed in log space.
/// `ess` is the effective sample size of the exponential weights; values
/// near 1 mean the mean is carried by a single replica and the estimate is
/// not trustworthy at this (alpha, T, N).
struct FeynmanKacEstimate {
  double estimate = 0;
  double stderr_ = 0;
  double ess = 0;
  long replicas = 0;
};

FeynmanKacEstimate feynman_kac_estimate(const LatticeModel& model,
                                        std::span<const double> alpha,
                                        double horizon, long replicas,
                                        std::uint64_t seed, int threads = 1);

/// |F_gamma(alpha) - F_inf(alpha)| along an increasing gamma grid, with
/// F_inf(alpha) = kappa Gamma(alpha) + lambda sum_v nu(v)(e^<alpha,v> - 1)
/// the slow-fast limit; the deviations decay like 1/gamma.
LimitSeries slow_fast_limit(const LatticeModel& model,
                            std::span<const double> alpha,
                            std::span<const double> gammas);

/// F along the ray a * direction via the principal eigenvalue; the scalar
/// free-energy interface for models without a closed form.
ScalarFreeEnergy spectral_free_energy(const LatticeModel& model,
                                      std::vector<double> direction);

}  // namespace rtp

#endif
