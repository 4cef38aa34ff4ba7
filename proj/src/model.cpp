#include "runtumble/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rtp {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

std::string vec_to_string(const IntVec& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

IntVec negated(const IntVec& z) {
  IntVec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = -z[i];
  return out;
}

bool is_zero(const IntVec& z) {
  return std::all_of(z.begin(), z.end(), [](int c) { return c == 0; });
}

/// Strong connectivity of the directed graph of positive rates:
/// every state reachable from state 0 and state 0 reachable from all.
bool strongly_connected(const Eigen::MatrixXd& rates) {
  const int n = static_cast<int>(rates.rows());
  if (n == 0) return false;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        const double r = transpose ? rates(w, v) : rates(v, w);
        if (r > 0.0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
  };
  return reach(false) && reach(true);
}

}  // namespace

JumpKernel JumpKernel::make(int dimension,
                            std::vector<std::pair<IntVec, double>> support) {
  if (dimension < 1) throw ParameterError("kernel dimension must be >= 1");
  if (support.empty()) throw ParameterError("kernel support is empty");
  double total = 0.0;
  for (const auto& [z, p] : support) {
    if (static_cast<int>(z.size()) != dimension)
      throw ParameterError("kernel vector " + vec_to_string(z) +
                           " does not have dimension " +
                           std::to_string(dimension));
    if (is_zero(z)) throw ParameterError("kernel support must exclude 0");
    if (!(p > 0.0) || p > 1.0 || !std::isfinite(p))
      throw ParameterError("kernel probability out of (0,1] at " +
                           vec_to_string(z));
    total += p;
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t j = i + 1; j < support.size(); ++j) {
      if (support[i].first == support[j].first)
        throw ParameterError("duplicate kernel vector " +
                             vec_to_string(support[i].first));
    }
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ParameterError("kernel probabilities sum to " +
                         std::to_string(total) + ", expected 1");
  for (const auto& [z, p] : support) {
    const IntVec neg = negated(z);
    const auto it =
        std::find_if(support.begin(), support.end(),
                     [&](const auto& e) { return e.first == neg; });
    if (it == support.end() || it->second != p)
      throw ParameterError("kernel is not symmetric at " + vec_to_string(z));
  }
  JumpKernel k;
  k.dimension = dimension;
  k.support = std::move(support);
  return k;
}

JumpKernel JumpKernel::nearest_neighbor_1d() {
  return make(1, {{{1}, 0.5}, {{-1}, 0.5}});
}

Eigen::VectorXd JumpKernel::second_moment() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dimension);
  for (const auto& [z, p] : support)
    for (int k = 0; k < dimension; ++k)
      m[k] += p * static_cast<double>(z[k]) * static_cast<double>(z[k]);
  return m;
}

double kernel_cumulant(const JumpKernel& kernel,
                       std::span<const double> alpha) {
  if (static_cast<int>(alpha.size()) != kernel.dimension)
    throw ParameterError("alpha dimension " + std::to_string(alpha.size()) +
                         " does not match kernel dimension " +
                         std::to_string(kernel.dimension));
  double sum = 0.0;
  for (const auto& [z, p] : kernel.support) {
    double dot = 0.0;
    for (int k = 0; k < kernel.dimension; ++k) dot += alpha[k] * z[k];
    sum += p * (std::cosh(dot) - 1.0);
  }
  return sum;
}

VelocityChain VelocityChain::make(std::vector<IntVec> velocities,
                                  Eigen::MatrixXd rates) {
  const int n = static_cast<int>(velocities.size());
  if (n < 2) throw ParameterError("velocity set needs at least two elements");
  const int d = static_cast<int>(velocities[0].size());
  for (const auto& v : velocities)
    if (static_cast<int>(v.size()) != d)
      throw ParameterError("velocities have mixed dimensions");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (velocities[i] == velocities[j])
        throw ParameterError("duplicate velocity " +
                             vec_to_string(velocities[i]));
  if (rates.rows() != n || rates.cols() != n)
    throw ParameterError("rate matrix shape does not match velocity count");
  for (int i = 0; i < n; ++i) {
    if (rates(i, i) != 0.0)
      throw ParameterError("flip rates must have zero diagonal");
    for (int j = 0; j < n; ++j)
      if (!finite_nonneg(rates(i, j)))
        throw ParameterError("flip rates must be finite and nonnegative");
  }
  if (!strongly_connected(rates))
    throw IrreducibilityError("flip-rate graph is not strongly connected");

  VelocityChain c;
  c.velocities = std::move(velocities);
  c.generator = rates;
  for (int i = 0; i < n; ++i) c.generator(i, i) = -rates.row(i).sum();
  c.rates = std::move(rates);
  c.symmetric = c.rates.isApprox(c.rates.transpose(), 0.0);
  return c;
}

VelocityChain VelocityChain::two_state_1d() {
  Eigen::MatrixXd pi(2, 2);
  pi << 0, 1, 1, 0;
  return make({{1}, {-1}}, pi);
}

VelocityChain VelocityChain::uniform(std::vector<IntVec> velocities) {
  const int n = static_cast<int>(velocities.size());
  if (n < 2) throw ParameterError("velocity set needs at least two elements");
  Eigen::MatrixXd pi =
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n - 1));
  pi.diagonal().setZero();
  return make(std::move(velocities), std::move(pi));
}

OccupationMeasure OccupationMeasure::make(Eigen::VectorXd p) {
  if (p.size() == 0) throw ParameterError("empty occupation measure");
  for (int i = 0; i < p.size(); ++i)
    if (!std::isfinite(p[i]) || p[i] < 0.0)
      throw ParameterError("occupation measure entries must be >= 0");
  if (std::abs(p.sum() - 1.0) > 1e-12)
    throw ParameterError("occupation measure does not sum to 1");
  return OccupationMeasure{std::move(p)};
}

OccupationMeasure stationary_measure(const VelocityChain& chain) {
  const int n = chain.size();
  // nu A = 0 with the last equation replaced by the normalization row;
  // nonsingular for any irreducible generator.
  Eigen::MatrixXd m = chain.generator.transpose();
  m.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd nu = m.fullPivLu().solve(b);
  const double residual =
      (nu.transpose() * chain.generator).lpNorm<Eigen::Infinity>();
  if (residual > 1e-12 || nu.minCoeff() <= 0.0)
    throw NumericalError("stationary measure solve failed (residual " +
                         std::to_string(residual) + ")");
  nu /= nu.sum();
  return OccupationMeasure{std::move(nu)};
}

LatticeModel LatticeModel::make(int dimension, double lambda, double kappa,
                                double gamma, JumpKernel kernel,
                                VelocityChain velocities) {
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  if (!finite_nonneg(lambda) || !finite_nonneg(kappa) || !finite_nonneg(gamma))
    throw ParameterError("rates must be finite and nonnegative");
  if (gamma == 0.0)
    throw IrreducibilityError("gamma = 0 freezes the velocity chain");
  if (kernel.dimension != dimension)
    throw ParameterError("kernel dimension does not match model dimension");
  if (velocities.dimension() != dimension)
    throw ParameterError("velocity dimension does not match model dimension");
  LatticeModel m;
  m.dimension = dimension;
  m.lambda = lambda;
  m.kappa = kappa;
  m.gamma = gamma;
  m.kernel = std::move(kernel);
  m.velocities = std::move(velocities);
  return m;
}

LatticeModel LatticeModel::with_gamma(double new_gamma) const {
  return make(dimension, lambda, kappa, new_gamma, kernel, velocities);
}

LatticeModel build_1d_two_state(double lambda, double kappa, double gamma) {
  if (!finite_nonneg(lambda) || !finite_nonneg(kappa) || !finite_nonneg(gamma))
    throw ParameterError("rates must be finite and nonnegative");
  return LatticeModel::make(1, lambda, 2.0 * kappa, gamma,
                            JumpKernel::nearest_neighbor_1d(),
                            VelocityChain::two_state_1d());
}

LatticeModel build_1d_general(double lambda, double kappa, double gamma,
                              JumpKernel kernel) {
  return LatticeModel::make(1, lambda, kappa, gamma, std::move(kernel),
                            VelocityChain::two_state_1d());
}

TwoState1D as_two_state_1d(const LatticeModel& model) {
  const auto& chain = model.velocities;
  if (model.dimension != 1 || chain.size() != 2)
    throw ParameterError("model is not a 1D two-state model");
  int plus = -1;
  if (chain.velocities[0] == IntVec{1} && chain.velocities[1] == IntVec{-1})
    plus = 0;
  else if (chain.velocities[0] == IntVec{-1} &&
           chain.velocities[1] == IntVec{1})
    plus = 1;
  else
    throw ParameterError("velocities are not {+1,-1}");
  const double r01 = chain.rates(plus, 1 - plus);
  const double r10 = chain.rates(1 - plus, plus);
  if (r01 != r10)
    throw ParameterError("two-state flip rates are not symmetric");
  TwoState1D t;
  t.lambda = model.lambda;
  t.kappa = model.kappa;
  t.gamma = model.gamma * r01;
  t.kernel = &model.kernel;
  t.nearest_neighbor = true;
  for (const auto& [z, p] : model.kernel.support)
    if ((z != IntVec{1} && z != IntVec{-1}) || p != 0.5)
      t.nearest_neighbor = false;
  return t;
}

ContinuumModel ContinuumModel::make(double lambda, double kappa, double gamma,
                                    double field) {
  if (!finite_nonneg(lambda) || !finite_nonneg(kappa) || !finite_nonneg(gamma))
    throw ParameterError("rates must be finite and nonnegative");
  if (gamma == 0.0) throw IrreducibilityError("gamma must be positive");
  if (!std::isfinite(field)) throw ParameterError("field must be finite");
  if (field != 0.0 && kappa <= 0.0)
    throw ParameterError("a nonzero field requires kappa > 0");
  return ContinuumModel{lambda, kappa, gamma, field};
}

}  // namespace rtp
