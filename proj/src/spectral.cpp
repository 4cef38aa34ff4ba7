#include "runtumble/spectral.hpp"

#include <cmath>
#include <string>

#include "replica_runner.hpp"
#include "runtumble/rng.hpp"
#include "runtumble/stats.hpp"

namespace rtp {

namespace {

Eigen::VectorXd tilt_potential(const LatticeModel& model,
                               std::span<const double> alpha) {
  if (static_cast<int>(alpha.size()) != model.dimension)
    throw ParameterError("alpha dimension does not match model dimension");
  const double kernel_term =
      model.kappa * kernel_cumulant(model.kernel, alpha);
  const int n = model.velocities.size();
  Eigen::VectorXd psi(n);
  for (int i = 0; i < n; ++i) {
    double dot = 0.0;
    for (int k = 0; k < model.dimension; ++k)
      dot += alpha[k] * model.velocities.velocities[i][k];
    psi[i] = kernel_term + model.lambda * std::expm1(dot);
  }
  return psi;
}

Eigen::VectorXd normalize_positive(Eigen::VectorXd v) {
  if (v.sum() < 0.0) v = -v;
  const double scale = v.cwiseAbs().maxCoeff();
  if (v.minCoeff() < -1e-10 * scale)
    throw NumericalError("Perron eigenvector is not positive");
  v = v.cwiseMax(0.0);
  return v / v.sum();
}

struct PowerResult {
  double value;
  Eigen::VectorXd vector;
  int iterations;
};

/// Power iteration on M + cI with c = max_v |M_vv|, which makes the matrix
/// entrywise nonnegative (off-diagonals already are).
PowerResult power_iteration(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  const double shift = m.diagonal().cwiseAbs().maxCoeff();
  const Eigen::MatrixXd shifted =
      m + shift * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(n));
  double value = 0.0;
  const int max_iter = 1000000;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = shifted * x;
    const double norm = y.norm();
    if (norm == 0.0) throw NumericalError("power iteration collapsed");
    y /= norm;
    const Eigen::VectorXd my = m * y;
    value = y.dot(my);
    const double residual = (my - value * y).lpNorm<Eigen::Infinity>();
    x = y;
    if (residual <= 1e-13 * (shift + std::abs(value)))
      return {value, std::move(x), it};
  }
  throw NumericalError(
      "power iteration did not converge after " + std::to_string(max_iter) +
      " iterations (last value " + std::to_string(value) + ")");
}

double row_rate(const VelocityChain& chain, int v) {
  return chain.rates.row(v).sum();
}

/// Inner Donsker-Varadhan objective
///   g(u) = sum_{v != v'} mu(v) pi(v,v') (e^{u(v')-u(v)} - 1)
/// minimized over the gauge Sum u = 0 by damped Newton with a Levenberg
/// floor; `u` is updated in place (callers warm-start it).
/// Returns g(u) at the minimizer.
double minimize_dv_inner(const VelocityChain& chain, const Eigen::VectorXd& mu,
                         Eigen::VectorXd& u) {
  const int n = chain.size();
  const auto& pi = chain.rates;

  Eigen::MatrixXd flow(n, n);
  auto evaluate = [&](const Eigen::VectorXd& uu) {
    double g = 0.0;
    for (int v = 0; v < n; ++v) {
      for (int w = 0; w < n; ++w) {
        if (w == v || pi(v, w) == 0.0 || mu[v] == 0.0) {
          flow(v, w) = 0.0;
          continue;
        }
        flow(v, w) = mu[v] * pi(v, w) * std::exp(uu[w] - uu[v]);
        g += flow(v, w) - mu[v] * pi(v, w);
      }
    }
    return g;
  };

  double g = evaluate(u);
  for (int it = 0; it < 400; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w) {
        grad[w] += flow(v, w);
        grad[v] -= flow(v, w);
      }
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-10) return g;

    // Weighted graph Laplacian Hessian.
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w) {
        if (w == v) continue;
        const double t = flow(v, w);
        hess(w, w) += t;
        hess(v, v) += t;
        hess(v, w) -= t;
        hess(w, v) -= t;
      }
    const double floor = 1e-12 * (1.0 + hess.trace() / n);
    hess.diagonal().array() += floor;

    Eigen::VectorXd step = hess.ldlt().solve(-grad);
    step.array() -= step.mean();  // stay in the gauge
    const double slope = grad.dot(step);
    double scale = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const double trial = evaluate(u + scale * step);
      if (trial <= g + 1e-4 * scale * slope) {
        u += scale * step;
        g = trial;
        break;
      }
      scale *= 0.5;
      if (ls == 59) {
        g = evaluate(u);  // restore flow for the current u
        return g;         // no admissible step left; gradient check caps it
      }
    }
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    for (int w = 0; w < n; ++w) {
      grad[w] += flow(v, w);
      grad[v] -= flow(v, w);
    }
  if (grad.lpNorm<Eigen::Infinity>() > 1e-8)
    throw NumericalError("Donsker-Varadhan inner minimization stalled");
  return g;
}

}  // namespace

TiltedMatrix tilted_matrix(const LatticeModel& model,
                           std::span<const double> alpha) {
  TiltedMatrix out;
  out.alpha.assign(alpha.begin(), alpha.end());
  out.psi = tilt_potential(model, alpha);
  out.gamma = model.gamma;
  out.symmetric = model.velocities.symmetric;
  out.matrix = model.gamma * model.velocities.generator.transpose();
  out.matrix.diagonal() += out.psi;
  return out;
}

Eigenpair principal_eigenvalue(const TiltedMatrix& m) {
  Eigenpair out;
  if (m.symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix);
    if (solver.info() != Eigen::Success)
      throw NumericalError("symmetric eigensolver failed");
    const int last = static_cast<int>(m.matrix.rows()) - 1;
    out.value = solver.eigenvalues()[last];
    out.vector = normalize_positive(solver.eigenvectors().col(last));
    out.iterations = 0;
    return out;
  }
  PowerResult forward = power_iteration(m.matrix);
  PowerResult backward = power_iteration(m.matrix.transpose());
  const double scale =
      1.0 + std::abs(forward.value) + m.matrix.cwiseAbs().maxCoeff();
  if (std::abs(forward.value - backward.value) > 1e-10 * scale)
    throw NumericalError("eigenvalues of M and M^T disagree");
  out.value = forward.value;
  out.vector = normalize_positive(std::move(forward.vector));
  out.iterations = forward.iterations + backward.iterations;
  return out;
}

double donsker_varadhan_dirichlet(const VelocityChain& chain,
                                  const OccupationMeasure& mu) {
  if (!chain.symmetric)
    throw ParameterError("Dirichlet form requires symmetric flip rates");
  if (mu.p.size() != chain.size())
    throw ParameterError("measure size does not match velocity set");
  const Eigen::VectorXd root = mu.p.cwiseSqrt();
  return -root.dot(chain.generator * root);
}

double donsker_varadhan_minimize(const VelocityChain& chain,
                                 const OccupationMeasure& mu) {
  if (mu.p.size() != chain.size())
    throw ParameterError("measure size does not match velocity set");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(chain.size());
  return -minimize_dv_inner(chain, mu.p, u);
}

double donsker_varadhan_rate(const VelocityChain& chain,
                             const OccupationMeasure& mu) {
  return chain.symmetric ? donsker_varadhan_dirichlet(chain, mu)
                         : donsker_varadhan_minimize(chain, mu);
}

VariationalResult variational_free_energy(const LatticeModel& model,
                                          std::span<const double> alpha) {
  const TiltedMatrix tilted = tilted_matrix(model, alpha);
  const auto& chain = model.velocities;
  const int n = chain.size();
  const double gamma = model.gamma;

  if (tilted.symmetric) {
    // Rayleigh quotient in r = sqrt(mu): the maximizer is the squared
    // Perron eigenvector and the value is the objective evaluated there.
    const Eigenpair pe = principal_eigenvalue(tilted);
    Eigen::VectorXd e = pe.vector;
    e /= e.norm();
    OccupationMeasure mu = OccupationMeasure::make(e.cwiseAbs2());
    VariationalResult out;
    out.value = tilted.psi.dot(mu.p) - gamma * donsker_varadhan_dirichlet(chain, mu);
    out.certificate_gap = std::abs(out.value - pe.value);
    out.maximizer = std::move(mu);
    out.iterations = 0;
    return out;
  }

  // General flip rates: exponentiated-gradient ascent of
  //   Phi(mu) = psi.mu - gamma I_A(mu)
  // with the gradient from the inner minimizer u* (envelope theorem) and a
  // Collatz-Wielandt upper bound max_v (K e^{u*})(v) / e^{u*}(v),
  // K = gamma A + diag(psi), certifying the remaining gap.
  const Eigen::MatrixXd k_matrix =
      gamma * chain.generator +
      Eigen::MatrixXd(tilted.psi.asDiagonal());

  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  double phi = tilted.psi.dot(mu) + gamma * minimize_dv_inner(chain, mu, u);

  auto gradient = [&](const Eigen::VectorXd& uu) {
    Eigen::VectorXd g = tilted.psi;
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w)
        if (w != v && chain.rates(v, w) > 0.0)
          g[v] += gamma * chain.rates(v, w) * std::expm1(uu[w] - uu[v]);
    return g;
  };

  const double gap_tol = 1e-9;
  double upper = std::numeric_limits<double>::infinity();
  double eta = 1.0 / (gamma + tilted.psi.cwiseAbs().maxCoeff() + 1.0);
  const int max_iter = 200000;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::VectorXd f = (u.array() - u.maxCoeff()).exp();
    const Eigen::VectorXd kf = k_matrix * f;
    upper = std::min(upper, (kf.array() / f.array()).maxCoeff());
    if (upper - phi <= gap_tol) break;

    const Eigen::VectorXd grad = gradient(u);
    bool moved = false;
    while (eta > 1e-14) {
      Eigen::VectorXd trial =
          (mu.array().log() + eta * (grad.array() - grad.maxCoeff())).exp();
      trial = trial.cwiseMax(1e-300);
      trial /= trial.sum();
      Eigen::VectorXd u_trial = u;
      const double phi_trial =
          tilted.psi.dot(trial) + gamma * minimize_dv_inner(chain, trial, u_trial);
      if (phi_trial > phi) {
        mu = std::move(trial);
        u = std::move(u_trial);
        phi = phi_trial;
        eta = std::min(eta * 1.25, 1e6);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) {
      // Step size exhausted; accept if the certificate is already close.
      if (upper - phi <= 1e2 * gap_tol) break;
      const Eigenpair reference = principal_eigenvalue(tilted);
      throw NumericalError(
          "variational ascent stagnated at " + std::to_string(phi) +
          " (certificate gap " + std::to_string(upper - phi) +
          ", spectral value " + std::to_string(reference.value) + ")");
    }
  }
  if (it == max_iter) {
    const Eigenpair reference = principal_eigenvalue(tilted);
    throw NumericalError(
        "variational ascent did not certify convergence (gap " +
        std::to_string(upper - phi) + ", spectral value " +
        std::to_string(reference.value) + ")");
  }

  VariationalResult out;
  out.value = phi;
  out.maximizer = OccupationMeasure::make(mu);
  out.iterations = it;
  out.certificate_gap = upper - phi;
  return out;
}

FeynmanKacEstimate feynman_kac_estimate(const LatticeModel& model,
                                        std::span<const double> alpha,
                                        double horizon, long replicas,
                                        std::uint64_t seed, int threads) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  if (replicas < 1) throw ParameterError("need at least one replica");
  const Eigen::VectorXd psi = tilt_potential(model, alpha);
  const auto& chain = model.velocities;
  const int n = chain.size();

  std::vector<double> exit_rate(n);
  std::vector<std::vector<double>> jump_cdf(n, std::vector<double>(n));
  for (int v = 0; v < n; ++v) {
    exit_rate[v] = model.gamma * row_rate(chain, v);
    double acc = 0.0;
    for (int w = 0; w < n; ++w) {
      acc += chain.rates(v, w);
      jump_cdf[v][w] = acc / row_rate(chain, v);
    }
  }

  const ReplicaStats stats = detail::run_replicas(
      0, 1, replicas, seed, threads,
      [&](long, Pcg64& rng, BatchStats& batch) {
        int v = static_cast<int>(rng.uniform() * n);
        if (v >= n) v = n - 1;
        double t = 0.0;
        double accumulated = 0.0;
        while (true) {
          const double dt = rng.exponential(exit_rate[v]);
          if (t + dt >= horizon) {
            accumulated += (horizon - t) * psi[v];
            break;
          }
          accumulated += dt * psi[v];
          t += dt;
          const double pick = rng.uniform();
          int w = 0;
          while (w < n - 1 && jump_cdf[v][w] < pick) ++w;
          v = w;
        }
        batch.exps[0].add(accumulated);
      });

  const ReplicaStats::LogMeanExp lme = stats.log_mean_exp(0);
  FeynmanKacEstimate out;
  out.estimate = lme.log_mean / horizon;
  out.stderr_ = lme.jackknife_se / horizon;
  out.ess = lme.ess;
  out.replicas = replicas;
  return out;
}

LimitSeries slow_fast_limit(const LatticeModel& model,
                            std::span<const double> alpha,
                            std::span<const double> gammas) {
  const Eigen::VectorXd psi = tilt_potential(model, alpha);
  const OccupationMeasure nu = stationary_measure(model.velocities);
  // F_inf = kappa Gamma(alpha) + lambda sum_v nu(v)(e^<alpha,v> - 1)
  //       = sum_v psi(v) nu(v).
  const double target = psi.dot(nu.p);

  LimitSeries out;
  out.target = target;
  std::vector<double> inverse;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0) || (i > 0 && gammas[i] <= gammas[i - 1]))
      throw ParameterError("gammas must be positive and increasing");
    const LatticeModel scaled = model.with_gamma(gammas[i]);
    const Eigenpair pe = principal_eigenvalue(tilted_matrix(
        scaled, std::span<const double>(alpha.data(), alpha.size())));
    out.parameter.push_back(gammas[i]);
    out.deviation.push_back(std::abs(pe.value - target));
    inverse.push_back(1.0 / gammas[i]);
  }
  out.fitted_order = fitted_order(inverse, out.deviation);
  return out;
}

ScalarFreeEnergy spectral_free_energy(const LatticeModel& model,
                                      std::vector<double> direction) {
  if (static_cast<int>(direction.size()) != model.dimension)
    throw ParameterError("direction dimension does not match model");
  auto value = [model, direction](double a) {
    std::vector<double> alpha(direction.size());
    for (std::size_t k = 0; k < direction.size(); ++k)
      alpha[k] = a * direction[k];
    return principal_eigenvalue(tilted_matrix(model, alpha)).value;
  };
  return {value, {}};
}

}  // namespace rtp
