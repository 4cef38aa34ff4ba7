#include "runtumble/reports.hpp"

#include <cmath>

#include "runtumble/free_energy.hpp"
#include "runtumble/rng.hpp"
#include "runtumble/spectral.hpp"

namespace rtp {

namespace {

const std::vector<double> kDefaultAlpha = [] {
  std::vector<double> g;
  for (int i = 0; i < 21; ++i) g.push_back(-2.0 + 4.0 * i / 20.0);
  return g;
}();
const std::vector<double> kDefaultQ = {0.0, 0.3, 1.1, 2.8};
const std::vector<double> kDefaultZ = {0.1, 1.0, 10.0};
const std::vector<double> kDefaultEps = {0.2, 0.1, 0.05, 0.025};
const std::vector<double> kDefaultScgfAlpha = {-0.3, -0.2, -0.1, 0.0,
                                               0.1,  0.2,  0.3};

bool is_two_state(const LatticeModel& m) {
  if (m.dimension != 1 || m.velocities.size() != 2) return false;
  try {
    as_two_state_1d(m);
    return true;
  } catch (const ParameterError&) {
    return false;
  }
}

double second_difference(const ScalarFreeEnergy& f) {
  const double h = 1e-4;
  return (f.value(h) - 2.0 * f.value(0.0) + f.value(-h)) / (h * h);
}

}  // namespace

AnalyzeReport run_analyze(const RunConfig& config) {
  const std::vector<double> qs = config.grid_or("q", kDefaultQ);
  const std::vector<double> zs = config.grid_or("z", kDefaultZ);
  const std::vector<double> eps = config.grid_or("epsilon", kDefaultEps);

  AnalyzeReport out;
  out.scaling_q = 1.0;
  for (double q : qs)
    if (q != 0.0) {
      out.scaling_q = q;
      break;
    }
  out.scaling_z = zs.empty() ? 1.0 : zs.front();

  if (config.is_continuum()) {
    const ContinuumModel model = config.build_continuum();
    for (double q : qs)
      for (double z : zs)
        out.transform_rows.push_back(
            fourier_laplace_continuum(model, q, Complex(z, 0.0)));
    out.sigma2 = diffusion_constant(model);
    out.scaling = scaling_diagnostic(model, out.scaling_q, out.scaling_z, eps);
  } else {
    const LatticeModel model = config.build_lattice();
    const double alpha0 = config.model.alpha0;
    for (double q : qs)
      for (double z : zs)
        out.transform_rows.push_back(
            fourier_laplace_lattice(model, q, Complex(z, 0.0), alpha0));
    out.sigma2 = diffusion_constant(model);
    out.scaling =
        scaling_diagnostic(model, out.scaling_q, out.scaling_z, eps, alpha0);
  }
  return out;
}

LdpReport run_ldp(const RunConfig& config) {
  const std::vector<double> alphas = config.grid_or("alpha", kDefaultAlpha);
  const std::vector<double> xs = config.grid_or("x", kDefaultAlpha);

  LdpReport out;
  if (config.is_continuum()) {
    const ContinuumModel model = config.build_continuum();
    const ScalarFreeEnergy f = continuum_free_energy(model);
    for (double a : alphas) {
      FreeEnergyRow row;
      row.alpha = a;
      row.closed = f.value(a);
      out.free_energy.push_back(row);
    }
    for (double x : xs) {
      const LegendrePoint p = legendre_transform(f, x);
      out.rate.push_back({0, x, p.rate, p.alpha_star});
    }
    out.second_deriv_origin = second_difference(f);
    out.sigma2_closed = diffusion_constant(model);
    out.asymptotic_velocity = f.d(0.0);
    return out;
  }

  const LatticeModel model = config.build_lattice();
  const bool closed_form = is_two_state(model);
  for (int axis = 0; axis < model.dimension; ++axis) {
    std::vector<double> dir(model.dimension, 0.0);
    dir[axis] = 1.0;
    for (double a : alphas) {
      std::vector<double> tilt(model.dimension, 0.0);
      tilt[axis] = a;
      FreeEnergyRow row;
      row.axis = axis;
      row.alpha = a;
      row.spectral = principal_eigenvalue(tilted_matrix(model, tilt)).value;
      row.variational = variational_free_energy(model, tilt).value;
      if (closed_form) row.closed = free_energy_lattice(model, a);
      if (row.closed)
        out.max_closed_vs_spectral = std::max(
            out.max_closed_vs_spectral, std::abs(*row.closed - *row.spectral));
      out.max_spectral_vs_variational =
          std::max(out.max_spectral_vs_variational,
                   std::abs(*row.spectral - *row.variational));
      out.free_energy.push_back(std::move(row));
    }

    const ScalarFreeEnergy f =
        closed_form ? lattice_free_energy(model) : spectral_free_energy(model, dir);
    for (double x : xs) {
      const LegendrePoint p = legendre_transform(f, x);
      out.rate.push_back({axis, x, p.rate, p.alpha_star});
    }
    if (axis == 0) out.second_deriv_origin = second_difference(f);
  }
  if (closed_form) out.sigma2_closed = diffusion_constant(model);
  return out;
}

SimReport run_simulate(const RunConfig& config, int threads) {
  const double t = config.simulation.t;
  const long n = config.simulation.n;
  const std::uint64_t seed = config.simulation.seed;

  SimReport out;
  out.horizon = t;
  out.replicas = n;
  out.seed = seed;

  if (config.is_continuum()) {
    const ContinuumModel model = config.build_continuum();
    const MomentSummary moments =
        estimate_moments(model, t, n, seed, threads);
    out.sigma2 = moments.diffusion;
    out.velocity = moments.velocity;
    out.sigma2_analytic = {diffusion_constant(model)};
    out.clt = clt_check(model, t, std::min<long>(n, 10000),
                        mix64(seed ^ 0x636c74ULL), threads);
    if (config.simulation.endpoints)
      out.continuum_endpoints = sample_endpoints(model, t, n, seed);
    return out;
  }

  const LatticeModel model = config.build_lattice();
  std::vector<double> initial;
  const double a0 = config.model.alpha0;
  if (model.velocities.size() == 2 && a0 != 0.5) initial = {a0, 1.0 - a0};
  const MomentSummary moments = estimate_moments(
      model, t, n, seed, threads, initial.empty() ? nullptr : &initial);
  out.sigma2 = moments.diffusion;
  out.velocity = moments.velocity;
  if (is_two_state(model))
    out.sigma2_analytic = {diffusion_constant(model)};
  else
    out.sigma2_analytic.assign(model.dimension, std::nullopt);
  out.clt = clt_check(model, t, std::min<long>(n, 10000),
                      mix64(seed ^ 0x636c74ULL), threads);

  const std::vector<double> scgf_grid =
      config.grid_or("scgf_alpha", kDefaultScgfAlpha);
  std::vector<std::vector<double>> tilts;
  for (int axis = 0; axis < model.dimension; ++axis)
    for (double a : scgf_grid) {
      std::vector<double> tilt(model.dimension, 0.0);
      tilt[axis] = a;
      tilts.push_back(tilt);
    }
  out.scgf = estimate_scgf(model, tilts, t, n, mix64(seed ^ 0x736366ULL),
                           threads);
  for (const auto& point : out.scgf)
    out.scgf_analytic.push_back(
        principal_eigenvalue(tilted_matrix(model, point.alpha)).value);
  if (config.simulation.endpoints)
    out.lattice_endpoints = sample_endpoints(model, t, n, seed);
  return out;
}

}  // namespace rtp
