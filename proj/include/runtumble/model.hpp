#ifndef RUNTUMBLE_MODEL_HPP
#define RUNTUMBLE_MODEL_HPP

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "runtumble/errors.hpp"

namespace rtp {

using IntVec = std::vector<int>;  // lattice vector in Z^d

/// Finite symmetric probability distribution p on Z^d \ {0} driving the
/// passive random-walk jumps. Entries come in +/-z pairs with equal weight,
/// probabilities sum to one, and the support is finite, so every exponential
/// moment is a finite sum.
struct JumpKernel {
  int dimension = 1;
  std::vector<std::pair<IntVec, double>> support;

  /// Validating factory; throws ParameterError on a malformed kernel.
  static JumpKernel make(int dimension,
                         std::vector<std::pair<IntVec, double>> support);
  static JumpKernel nearest_neighbor_1d();

  /// Sum_z z_k^2 p(z) for each coordinate k.
  Eigen::VectorXd second_moment() const;
};

/// Gamma(alpha) = sum_z p(z) (cosh<alpha,z> - 1); equals the exponential
/// moment sum_z p(z)(e^<alpha,z> - 1) by symmetry of p. Nonnegative and
/// convex, Gamma(0) = 0.
double kernel_cumulant(const JumpKernel& kernel, std::span<const double> alpha);

/// Finite velocity set V in Z^d with an irreducible flip-rate matrix pi
/// (zero diagonal) and its generator A, A(v,v') = pi(v,v') off-diagonal,
/// rows of A summing to zero. Irreducibility (strong connectivity of the
/// positive-rate graph) is checked at construction.
struct VelocityChain {
  std::vector<IntVec> velocities;
  Eigen::MatrixXd rates;      // pi
  Eigen::MatrixXd generator;  // A
  bool symmetric = false;

  static VelocityChain make(std::vector<IntVec> velocities,
                            Eigen::MatrixXd rates);
  /// V = {+1, -1} with unit flip rate both ways.
  static VelocityChain two_state_1d();
  /// All pairs v != v' flip at rate 1/(|V|-1), so the total rate out of
  /// every state is 1 and the gamma prefactor is the full flip rate.
  static VelocityChain uniform(std::vector<IntVec> velocities);

  int size() const { return static_cast<int>(velocities.size()); }
  int dimension() const {
    return velocities.empty() ? 0 : static_cast<int>(velocities[0].size());
  }
};

/// Probability vector on a velocity set; the argument of the occupation-time
/// rate function and the variational formula.
struct OccupationMeasure {
  Eigen::VectorXd p;

  static OccupationMeasure make(Eigen::VectorXd p);  // simplex check, 1e-12
};

/// Unique stationary measure nu of the chain: nu A = 0, sum nu = 1, nu > 0.
/// For symmetric rates this is the uniform measure.
OccupationMeasure stationary_measure(const VelocityChain& chain);

/// The lattice active-particle model on Z^d: with rate lambda the particle
/// hops by its current velocity, with total rate kappa it makes a passive
/// jump drawn from the kernel, and velocities flip with generator
/// gamma * A. Note kappa multiplies a probability kernel; the
/// nearest-neighbor model of build_1d_two_state stores its passive part as
/// kernel {+1: 1/2, -1: 1/2} with kappa = 2 * (per-direction rate), so the
/// same code path serves the two-state model and the general one.
struct LatticeModel {
  int dimension = 1;
  double lambda = 0;  // transport jump rate
  double kappa = 0;   // total passive jump rate
  double gamma = 1;   // flip rate prefactor
  JumpKernel kernel;
  VelocityChain velocities;

  static LatticeModel make(int dimension, double lambda, double kappa,
                           double gamma, JumpKernel kernel,
                           VelocityChain velocities);

  LatticeModel with_gamma(double new_gamma) const;
};

/// The two-state model on Z: velocities {+1,-1} flipping at rate gamma,
/// transport at rate lambda, and symmetric nearest-neighbor jumps at rate
/// kappa per direction (stored as total passive rate 2*kappa).
LatticeModel build_1d_two_state(double lambda, double kappa, double gamma);

/// 1D two-state model with an arbitrary symmetric kernel; kappa is the
/// total passive jump rate multiplying the kernel probabilities.
LatticeModel build_1d_general(double lambda, double kappa, double gamma,
                              JumpKernel kernel);

/// Telegrapher process on R: drift lambda*v, Brownian noise of variance
/// 2*kappa, Poisson velocity flips at rate gamma, and an optional external
/// field E entering as an extra drift 2*kappa*E.
struct ContinuumModel {
  double lambda = 0;
  double kappa = 0;
  double gamma = 1;
  double field = 0;  // E

  static ContinuumModel make(double lambda, double kappa, double gamma,
                             double field = 0.0);
};

/// View of a model reducible to the 1D two-state form: d = 1, V = {+1,-1},
/// symmetric flip rates. gamma_eff absorbs the chain's flip rate into the
/// gamma prefactor. Throws ParameterError otherwise.
struct TwoState1D {
  double lambda;
  double kappa;      // total passive rate
  double gamma;      // effective flip rate
  const JumpKernel* kernel;
  bool nearest_neighbor;  // kernel == {+1: 1/2, -1: 1/2}
};
TwoState1D as_two_state_1d(const LatticeModel& model);

}  // namespace rtp

#endif
