#include "runtumble/verify.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <sstream>

#include "runtumble/free_energy.hpp"
#include "runtumble/linalg.hpp"
#include "runtumble/rng.hpp"
#include "runtumble/simulate.hpp"
#include "runtumble/spectral.hpp"
#include "runtumble/transforms.hpp"

namespace rtp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(a + (b - a) * i / static_cast<double>(n - 1));
  return out;
}

double uniform_in(Pcg64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

/// Random lattice model with |V| <= 8, d <= 3 and an irreducible
/// (optionally symmetric) flip chain; used by the random batteries.
LatticeModel random_model(Pcg64& rng, bool symmetric) {
  const int d = 1 + static_cast<int>(rng.uniform() * 3.0);
  const int nv = 2 + static_cast<int>(rng.uniform() * 7.0);

  std::vector<IntVec> velocities;
  while (static_cast<int>(velocities.size()) < nv) {
    IntVec v(d);
    for (int k = 0; k < d; ++k)
      v[k] = static_cast<int>(rng.uniform() * 5.0) - 2;
    if (std::find(velocities.begin(), velocities.end(), v) ==
        velocities.end())
      velocities.push_back(v);
  }

  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(nv, nv);
  for (int i = 0; i < nv; ++i) pi(i, (i + 1) % nv) = uniform_in(rng, 0.2, 1.2);
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      if (i != j && rng.uniform() < 0.35) pi(i, j) += rng.uniform();
  if (symmetric)
    for (int i = 0; i < nv; ++i)
      for (int j = i + 1; j < nv; ++j) {
        const double v = 0.5 * (pi(i, j) + pi(j, i));
        pi(i, j) = pi(j, i) = v;
      }

  const int pairs = 1 + static_cast<int>(rng.uniform() * 2.0);
  std::vector<std::pair<IntVec, double>> support;
  std::vector<double> weights;
  while (static_cast<int>(weights.size()) < pairs) {
    IntVec z(d);
    bool zero = true;
    for (int k = 0; k < d; ++k) {
      z[k] = static_cast<int>(rng.uniform() * 5.0) - 2;
      if (z[k] != 0) zero = false;
    }
    if (zero) continue;
    IntVec neg(d);
    for (int k = 0; k < d; ++k) neg[k] = -z[k];
    bool dup = false;
    for (const auto& [existing, p] : support)
      if (existing == z || existing == neg) dup = true;
    if (dup) continue;
    const double w = uniform_in(rng, 0.2, 1.2);
    support.push_back({z, w});
    support.push_back({neg, w});
    weights.push_back(w);
  }
  double total = 0.0;
  for (auto& [z, w] : support) total += w;
  for (auto& [z, w] : support) w /= total;
  // Renormalize exactly in pairs so the symmetry check sees equal weights.
  for (std::size_t i = 0; i + 1 < support.size(); i += 2)
    support[i + 1].second = support[i].second;
  double sum = 0.0;
  for (auto& [z, w] : support) sum += w;
  support[0].second += 1.0 - sum;
  support[1].second = support[0].second;
  // The pair fix above can leave a tiny residue; absorb it once more.
  sum = 0.0;
  for (auto& [z, w] : support) sum += w;
  if (std::abs(sum - 1.0) > 1e-15) {
    const double scale = 1.0 / sum;
    for (auto& [z, w] : support) w *= scale;
    for (std::size_t i = 0; i + 1 < support.size(); i += 2)
      support[i + 1].second = support[i].second;
  }

  return LatticeModel::make(d, uniform_in(rng, 0.2, 3.0),
                            uniform_in(rng, 0.2, 3.0),
                            uniform_in(rng, 0.3, 3.0),
                            JumpKernel::make(d, std::move(support)),
                            VelocityChain::make(velocities, std::move(pi)));
}

struct CriterionRunner {
  const VerifyOptions& opt;
  std::vector<CriterionResult>& results;
  int only;

  template <typename Fn>
  void run(int id, const std::string& name,
           std::optional<double> time_limit, Fn&& body) {
    if (only != 0 && only != id) return;
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.time_limit = time_limit;
    const auto start = Clock::now();
    try {
      body(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = seconds_since(start);
    if (time_limit && r.seconds >= *time_limit) {
      r.pass = false;
      r.detail += " [over time limit]";
    }
    results.push_back(std::move(r));
  }
};

}  // namespace

VerifyOptions verify_options(const RunConfig& config) {
  VerifyOptions o;
  o.tol_closed_vs_spectral =
      config.tolerance_or("closed_vs_spectral", o.tol_closed_vs_spectral);
  o.tol_spectral_vs_variational = config.tolerance_or(
      "spectral_vs_variational", o.tol_spectral_vs_variational);
  o.tol_diffusion_rel =
      config.tolerance_or("diffusion_rel", o.tol_diffusion_rel);
  o.sim_stderr_mult = config.tolerance_or("sim_stderr_mult", o.sim_stderr_mult);
  o.tol_expm = config.tolerance_or("expm", o.tol_expm);
  o.tol_dv_exact = config.tolerance_or("dv_exact", o.tol_dv_exact);
  o.tol_dv_paths = config.tolerance_or("dv_paths", o.tol_dv_paths);
  o.tol_dv_stationary =
      config.tolerance_or("dv_stationary", o.tol_dv_stationary);
  o.fk_stderr_mult = config.tolerance_or("fk_stderr_mult", o.fk_stderr_mult);
  o.order_min = config.tolerance_or("order_min", o.order_min);
  o.tol_young = config.tolerance_or("young", o.tol_young);
  o.tol_rate_origin = config.tolerance_or("rate_origin", o.tol_rate_origin);
  o.seed = config.simulation.seed;
  return o;
}

VerifyReport run_verification(const VerifyOptions& opt,
                              const RunConfig* config, int only) {
  VerifyReport report;
  CriterionRunner runner{opt, report.criteria, only};

  // 1. Closed form vs spectral eigenvalue of the tilted 2x2 matrix.
  runner.run(1, "closed form vs spectral (1D two-state)", 1.0,
             [&](CriterionResult& r) {
    Pcg64 rng(opt.seed, 101);
    const std::vector<double> grid = linspace(-3.0, 3.0, 41);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
      const LatticeModel model = build_1d_two_state(
          uniform_in(rng, 1e-12, 5.0), uniform_in(rng, 1e-12, 5.0),
          uniform_in(rng, 1e-12, 5.0));
      for (double a : grid) {
        const double closed = free_energy_lattice(model, a);
        const double spectral =
            principal_eigenvalue(tilted_matrix(model, std::span(&a, 1)))
                .value;
        worst = std::max(worst, std::abs(closed - spectral));
      }
    }
    r.discrepancy = worst;
    r.tolerance = opt.tol_closed_vs_spectral;
    r.pass = worst <= r.tolerance;
    r.detail = "max |F_closed - lambda_max| = " + fmt(worst) +
               " over 25 models x 41 tilts";
  });

  // 2. Theorem cross-check: spectral value equals the variational value.
  runner.run(2, "spectral vs variational (occupation-time formula)", 30.0,
             [&](CriterionResult& r) {
    Pcg64 rng(opt.seed, 202);
    double worst = 0.0;
    long points = 0;
    auto check = [&](const LatticeModel& model, double span) {
      for (int axis = 0; axis < model.dimension; ++axis)
        for (double s : linspace(-span, span, 9)) {
          std::vector<double> tilt(model.dimension, 0.0);
          tilt[axis] = s;
          const double spectral =
              principal_eigenvalue(tilted_matrix(model, tilt)).value;
          const double variational =
              variational_free_energy(model, tilt).value;
          worst = std::max(worst, std::abs(spectral - variational));
          ++points;
        }
    };
    check(build_1d_two_state(2.0, 1.0, 4.0), 3.0);
    for (int k = 0; k < 10; ++k) check(random_model(rng, k % 2 == 0), 1.2);
    r.discrepancy = worst;
    r.tolerance = opt.tol_spectral_vs_variational;
    r.pass = worst <= r.tolerance;
    r.detail = "max |F_spectral - F_variational| = " + fmt(worst) + " over " +
               std::to_string(points) + " tilts";
  });

  // 3. Diffusion constants: F''(0) against the closed forms.
  runner.run(3, "diffusion constants", std::nullopt,
             [&](CriterionResult& r) {
    const LatticeModel nn = build_1d_two_state(2.0, 1.0, 4.0);
    const LatticeModel general = build_1d_general(
        1.5, 1.7, 2.0,
        JumpKernel::make(
            1, {{{1}, 0.3}, {{-1}, 0.3}, {{2}, 0.2}, {{-2}, 0.2}}));
    const ContinuumModel cont = ContinuumModel::make(2.0, 1.0, 4.0);
    const double h = 1e-4;
    auto fd2 = [&](const ScalarFreeEnergy& f) {
      return (f.value(h) - 2.0 * f.value(0.0) + f.value(-h)) / (h * h);
    };
    double worst = 0.0;
    worst = std::max(worst, std::abs(fd2(lattice_free_energy(nn)) - 5.0) / 5.0);
    const double general_target = diffusion_constant(general);
    worst = std::max(worst,
                     std::abs(fd2(lattice_free_energy(general)) -
                              general_target) / general_target);
    worst = std::max(worst,
                     std::abs(fd2(continuum_free_energy(cont)) - 3.0) / 3.0);
    const bool exact =
        diffusion_constant(nn) == 5.0 && diffusion_constant(cont) == 3.0;
    r.discrepancy = worst;
    r.tolerance = opt.tol_diffusion_rel;
    r.pass = worst <= r.tolerance && exact;
    r.detail = "max relative F''(0) error = " + fmt(worst) +
               (exact ? "; worked values 5 and 3 exact"
                      : "; worked values NOT exact");
  });

  // 4. Monte Carlo variance and velocity against the analytic values.
  runner.run(4, "Monte Carlo vs analytic moments", 60.0,
             [&](CriterionResult& r) {
    double worst = 0.0;
    std::ostringstream detail;
    const LatticeModel lattice = build_1d_two_state(2.0, 1.0, 4.0);
    const auto lat = estimate_diffusion(lattice, opt.sim_t, opt.sim_n,
                                        mix64(opt.seed ^ 0x41ULL),
                                        opt.threads);
    worst = std::max(worst, std::abs(lat[0].value - 5.0) / lat[0].stderr_);
    detail << "lattice sigma2 " << fmt(lat[0].value) << "+-"
           << fmt(lat[0].stderr_);

    const ContinuumModel tele = ContinuumModel::make(2.0, 1.0, 4.0);
    const auto tel = estimate_diffusion(tele, opt.sim_t, opt.sim_n,
                                        mix64(opt.seed ^ 0x42ULL),
                                        opt.threads);
    worst = std::max(worst, std::abs(tel[0].value - 3.0) / tel[0].stderr_);
    detail << "; telegrapher sigma2 " << fmt(tel[0].value) << "+-"
           << fmt(tel[0].stderr_);

    const ContinuumModel drift = ContinuumModel::make(2.0, 1.0, 4.0, 0.5);
    const auto mom = estimate_moments(drift, opt.sim_t, opt.sim_n,
                                      mix64(opt.seed ^ 0x43ULL), opt.threads);
    worst = std::max(worst,
                     std::abs(mom.velocity[0].value - 1.0) /
                         mom.velocity[0].stderr_);
    detail << "; drift velocity " << fmt(mom.velocity[0].value) << "+-"
           << fmt(mom.velocity[0].stderr_);

    r.discrepancy = worst;
    r.tolerance = opt.sim_stderr_mult;
    r.pass = worst <= r.tolerance;
    r.detail = detail.str() + "; worst " + fmt(worst) + " stderr";
  });

  // 5. Closed-form semigroup vs scaling-and-squaring exponential.
  runner.run(5, "matrix exponential closed form", 1.0,
             [&](CriterionResult& r) {
    const std::vector<LatticeModel> models = {
        build_1d_two_state(2.0, 1.0, 4.0),
        build_1d_two_state(5.0, 0.5, 1.0),    // lambda |sin q| > gamma
        build_1d_two_state(1.5, 0.7, 1.5)};   // B = 0 at q = pi/2
    const std::vector<double> qs = {0.0, 0.5, 1.5707963267948966, 2.8};
    const std::vector<double> ts = {0.1, 1.3, 10.0};
    double worst = 0.0;
    for (const auto& model : models)
      for (double q : qs)
        for (double t : ts) {
          const Eigen::Matrix2cd closed =
              matrix_exponential_closed(model, Complex(q, 0.0), t).matrix;
          const Eigen::Matrix2cd reference = expm_scaling_squaring(
              Eigen::Matrix2cd(t * transport_matrix(model, q).matrix()));
          worst = std::max(worst,
                           (closed - reference).cwiseAbs().maxCoeff());
        }
    r.discrepancy = worst;
    r.tolerance = opt.tol_expm;
    r.pass = worst <= r.tolerance;
    r.detail = "max entrywise deviation = " + fmt(worst) +
               " over 3 models x 4 wave numbers x 3 times";
  });

  // 6. Donsker-Varadhan rate: exact values and the two code paths.
  runner.run(6, "Donsker-Varadhan occupation rate", std::nullopt,
             [&](CriterionResult& r) {
    const VelocityChain flip = VelocityChain::two_state_1d();
    const double v1 = donsker_varadhan_dirichlet(
        flip, OccupationMeasure::make(Eigen::Vector2d(1.0, 0.0)));
    const double v2 = donsker_varadhan_dirichlet(
        flip, OccupationMeasure::make(Eigen::Vector2d(0.75, 0.25)));
    const double exact1 = std::abs(v1 - 1.0);
    const double exact2 = std::abs(v2 - (1.0 - std::sqrt(3.0) / 2.0));

    Pcg64 rng(opt.seed, 606);
    double worst_pair = 0.0;
    double worst_stationary = 0.0;
    for (int k = 0; k < 20; ++k) {
      const LatticeModel model = random_model(rng, true);
      const VelocityChain& chain = model.velocities;
      Eigen::VectorXd mu(chain.size());
      for (int i = 0; i < chain.size(); ++i)
        mu[i] = uniform_in(rng, 0.05, 1.0);
      mu /= mu.sum();
      const OccupationMeasure m = OccupationMeasure::make(mu);
      worst_pair = std::max(worst_pair,
                            std::abs(donsker_varadhan_dirichlet(chain, m) -
                                     donsker_varadhan_minimize(chain, m)));
      const OccupationMeasure nu = stationary_measure(chain);
      worst_stationary =
          std::max({worst_stationary,
                    std::abs(donsker_varadhan_dirichlet(chain, nu)),
                    std::abs(donsker_varadhan_minimize(chain, nu))});
    }
    r.discrepancy = std::max({exact1, exact2, worst_pair});
    r.tolerance = opt.tol_dv_paths;
    r.pass = exact1 <= opt.tol_dv_exact && exact2 <= opt.tol_dv_exact &&
             worst_pair <= opt.tol_dv_paths &&
             worst_stationary <= opt.tol_dv_stationary;
    r.detail = "exact values off by " + fmt(std::max(exact1, exact2)) +
               "; path mismatch " + fmt(worst_pair) + "; I_A(nu) " +
               fmt(worst_stationary);
  });

  // 7. Feynman-Kac estimator against the closed form.
  runner.run(7, "Feynman-Kac estimator", 30.0, [&](CriterionResult& r) {
    const LatticeModel model = build_1d_two_state(1.0, 0.0, 1.0);
    const double alpha = std::log(2.0);
    const FeynmanKacEstimate est =
        feynman_kac_estimate(model, std::span(&alpha, 1), opt.fk_t, opt.fk_n,
                             mix64(opt.seed ^ 0x464bULL), opt.threads);
    const double pulls = std::abs(est.estimate - 0.5) / est.stderr_;
    r.discrepancy = pulls;
    r.tolerance = opt.fk_stderr_mult;
    r.pass = pulls <= r.tolerance;
    r.detail = "estimate " + fmt(est.estimate) + " +- " + fmt(est.stderr_) +
               " vs 0.5 (" + fmt(pulls) + " stderr, ess " + fmt(est.ess) +
               " of " + std::to_string(est.replicas) + ")";
  });

  // 8. Slow-fast and continuum limits, gamma monotonicity.
  runner.run(8, "limits and gamma monotonicity", std::nullopt,
             [&](CriterionResult& r) {
    const std::vector<double> gammas = {1.0, 10.0, 100.0, 1000.0};
    double worst_violation = 0.0;
    for (double a : linspace(-3.0, 3.0, 13)) {
      double prev = std::numeric_limits<double>::infinity();
      for (double g : gammas) {
        const double f =
            free_energy_lattice(build_1d_two_state(2.0, 1.0, g), a);
        worst_violation = std::max(worst_violation, f - prev);
        prev = f;
      }
    }

    const LatticeModel base = build_1d_two_state(2.0, 1.0, 4.0);
    const double a8 = 0.8;
    const LimitSeries slow =
        slow_fast_limit(base, std::span(&a8, 1), gammas);

    const LatticeModel square = LatticeModel::make(
        2, 1.0, 0.8, 2.0,
        JumpKernel::make(2, {{{1, 0}, 0.25},
                             {{-1, 0}, 0.25},
                             {{0, 1}, 0.25},
                             {{0, -1}, 0.25}}),
        VelocityChain::uniform({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
    const std::vector<double> tilt2 = {0.7, -0.3};
    const LimitSeries slow2 = slow_fast_limit(
        square, std::span(tilt2.data(), 2), gammas);

    const LimitSeries continuum =
        continuum_limit_check(base, 1.0, {0.2, 0.1, 0.05, 0.025});

    const double min_order =
        std::min({slow.fitted_order, slow2.fitted_order,
                  continuum.fitted_order});
    r.discrepancy = min_order;
    r.tolerance = opt.order_min;
    r.pass = worst_violation <= 1e-12 && min_order >= opt.order_min;
    r.detail = "monotonicity violation " + fmt(worst_violation) +
               "; fitted orders " + fmt(slow.fitted_order) + " (slow-fast), " +
               fmt(slow2.fitted_order) + " (slow-fast 2D), " +
               fmt(continuum.fitted_order) + " (continuum)";
  });

  // 9. Legendre transform and the rate function.
  runner.run(9, "Legendre transform and rate function", std::nullopt,
             [&](CriterionResult& r) {
    const ScalarFreeEnergy f =
        lattice_free_energy(build_1d_two_state(2.0, 1.0, 4.0));
    double worst_young = 0.0;
    std::vector<double> rates;
    const std::vector<double> xs = linspace(-2.0, 2.0, 17);
    for (double x : xs) {
      const LegendrePoint p = legendre_transform(f, x);
      worst_young = std::max(
          worst_young, std::abs(p.rate + f.value(p.alpha_star) -
                                p.alpha_star * x));
      worst_young =
          std::max(worst_young, std::abs(f.d(p.alpha_star) - x));
      rates.push_back(p.rate);
    }
    double convexity_violation = 0.0;
    for (std::size_t i = 1; i + 1 < rates.size(); ++i)
      convexity_violation =
          std::max(convexity_violation,
                   -(rates[i - 1] - 2.0 * rates[i] + rates[i + 1]));
    const double at_mean = legendre_transform(f, f.d(0.0)).rate;
    const ScalarFreeEnergy quad{[](double a) { return 2.5 * a * a; },
                                [](double a) { return 5.0 * a; }};
    const double quad_err =
        std::abs(legendre_transform(quad, 1.0).rate - 0.1);
    r.discrepancy = std::max({worst_young, quad_err});
    r.tolerance = opt.tol_young;
    r.pass = worst_young <= opt.tol_young &&
             convexity_violation <= 1e-9 &&
             at_mean <= opt.tol_rate_origin && quad_err <= opt.tol_young;
    r.detail = "Young residual " + fmt(worst_young) + "; I(F'(0)) = " +
               fmt(at_mean) + "; quadratic I(1) off by " + fmt(quad_err);
  });

  // 10. CLT at long times plus the short-time negative control.
  runner.run(10, "CLT and negative control", std::nullopt,
             [&](CriterionResult& r) {
    const LatticeModel model = build_1d_two_state(2.0, 1.0, 4.0);
    const CltResult main = clt_check(model, opt.clt_t, opt.clt_n,
                                     mix64(opt.seed ^ 0x4c54ULL),
                                     opt.threads);
    const CltResult control = clt_check(model, 0.1, opt.clt_n,
                                        mix64(opt.seed ^ 0x4c55ULL),
                                        opt.threads);
    r.discrepancy = main.ks;
    r.tolerance = main.critical;
    r.pass = main.pass && !control.pass;
    r.detail = "KS " + fmt(main.ks) + " vs critical " + fmt(main.critical) +
               "; negative control KS " + fmt(control.ks) +
               (control.pass ? " (unexpectedly small)" : " (exceeds, ok)");
  });

  report.pass = !report.criteria.empty();
  for (const auto& c : report.criteria) report.pass = report.pass && c.pass;

  // Per-tilt records for the configured model (defaults to the worked
  // 1D two-state example). The deterministic routes feed max_discrepancy;
  // the Feynman-Kac column is reported with its own error bar.
  if (only == 0) {
    RunConfig fallback;
    if (!config) {
      fallback.model.type = "two_state_1d";
      fallback.model.lambda = 2.0;
      fallback.model.kappa = 1.0;
      fallback.model.gamma = 4.0;
    }
    const RunConfig& cfg = config ? *config : fallback;
    const std::vector<double> grid =
        cfg.grid_or("alpha", linspace(-1.0, 1.0, 9));
    if (cfg.is_continuum()) {
      const ContinuumModel model = cfg.build_continuum();
      for (double a : grid) {
        AlphaRecord rec;
        rec.alpha = {a};
        rec.f_closed = free_energy_continuum(model, a);
        report.per_alpha.push_back(std::move(rec));
      }
    } else {
      const LatticeModel model = cfg.build_lattice();
      bool closed = true;
      try {
        as_two_state_1d(model);
      } catch (const ParameterError&) {
        closed = false;
      }
      for (int axis = 0; axis < model.dimension; ++axis)
        for (double a : grid) {
          std::vector<double> tilt(model.dimension, 0.0);
          tilt[axis] = a;
          AlphaRecord rec;
          rec.alpha = tilt;
          rec.f_spectral =
              principal_eigenvalue(tilted_matrix(model, tilt)).value;
          rec.f_variational = variational_free_energy(model, tilt).value;
          if (closed && axis == 0)
            rec.f_closed = free_energy_lattice(model, a);
          const FeynmanKacEstimate fk = feynman_kac_estimate(
              model, tilt, cfg.simulation.fk_t, cfg.simulation.fk_n,
              mix64(cfg.simulation.seed ^ 0x70664bULL), opt.threads);
          rec.f_feynman_kac = fk.estimate;
          rec.fk_stderr = fk.stderr_;
          double d = std::abs(*rec.f_spectral - *rec.f_variational);
          if (rec.f_closed)
            d = std::max(d, std::abs(*rec.f_closed - *rec.f_spectral));
          rec.max_discrepancy = d;
          report.per_alpha.push_back(std::move(rec));
        }
    }
  }

  return report;
}

}  // namespace rtp
