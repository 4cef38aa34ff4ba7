#ifndef RUNTUMBLE_TESTS_SUPPORT_HPP
#define RUNTUMBLE_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "runtumble/model.hpp"
#include "runtumble/rng.hpp"

namespace rtsupport {

/// Third-party matrix exponential, independent of both the closed forms
/// and the in-tree scaling-and-squaring routine.
template <typename Mat>
Mat eigen_expm(const Mat& m) {
  return m.exp();
}

/// Largest real part over the full spectrum (dense eigendecomposition
/// oracle for the power-iteration implementation).
inline double dense_top_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.isApprox(m.transpose(), 0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    return solver.eigenvalues().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
  return solver.eigenvalues().real().maxCoeff();
}

/// Random irreducible velocity chain on Z (ring plus random extras).
inline rtp::VelocityChain random_chain(rtp::Pcg64& rng, int n,
                                       bool symmetric) {
  std::vector<rtp::IntVec> velocities;
  for (int i = 0; i < n; ++i) velocities.push_back({i + 1});
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    pi(i, (i + 1) % n) = 0.2 + rng.uniform();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform() < 0.4) pi(i, j) += rng.uniform();
  if (symmetric)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double v = 0.5 * (pi(i, j) + pi(j, i));
        pi(i, j) = pi(j, i) = v;
      }
  return rtp::VelocityChain::make(std::move(velocities), std::move(pi));
}

inline Eigen::VectorXd random_measure(rtp::Pcg64& rng, int n) {
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu[i] = 0.05 + rng.uniform();
  return mu / mu.sum();
}

}  // namespace rtsupport

#endif
