#include <doctest.h>

#include <array>
#include <cmath>

#include "runtumble/free_energy.hpp"
#include "runtumble/spectral.hpp"
#include "support.hpp"

using namespace rtp;

namespace {

const LatticeModel kWorked = build_1d_two_state(2.0, 1.0, 4.0);
const LatticeModel kSimple = build_1d_two_state(1.0, 0.0, 1.0);

LatticeModel square_model() {
  return LatticeModel::make(
      2, 1.0, 0.8, 2.0,
      JumpKernel::make(2, {{{1, 0}, 0.25},
                           {{-1, 0}, 0.25},
                           {{0, 1}, 0.25},
                           {{0, -1}, 0.25}}),
      VelocityChain::uniform({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
}

LatticeModel chain_model(const VelocityChain& chain, double lambda,
                         double kappa, double gamma) {
  return LatticeModel::make(1, lambda, kappa, gamma,
                            JumpKernel::nearest_neighbor_1d(), chain);
}

}  // namespace

TEST_CASE("tilted matrix at alpha = 0 is gamma A") {
  const TiltedMatrix t = tilted_matrix(kWorked, std::array{0.0});
  CHECK((t.matrix - 4.0 * kWorked.velocities.generator)
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
  CHECK(t.psi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("1D tilted matrix reproduces the explicit symmetric form") {
  Pcg64 rng(51, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = 6.0 * rng.uniform() - 3.0;
    const TiltedMatrix t = tilted_matrix(kWorked, std::array{a});
    const double diagonal_plus =
        4.0 * (std::cosh(a) - 1.0) + 2.0 * std::sinh(a) - 4.0;
    const double diagonal_minus =
        4.0 * (std::cosh(a) - 1.0) - 2.0 * std::sinh(a) - 4.0;
    CHECK(t.matrix(0, 0) == doctest::Approx(diagonal_plus).epsilon(1e-13));
    CHECK(t.matrix(1, 1) == doctest::Approx(diagonal_minus).epsilon(1e-13));
    CHECK(t.matrix(0, 1) == 4.0);
    CHECK(t.matrix(1, 0) == 4.0);
  }
}

TEST_CASE("2D tilted diagonal assembled by hand") {
  const LatticeModel m = square_model();
  const std::array alpha{1.0, 0.0};
  const TiltedMatrix t = tilted_matrix(m, alpha);
  const double gam = kernel_cumulant(m.kernel, alpha);
  CHECK(t.matrix(0, 0) ==
        doctest::Approx(0.8 * gam + 1.0 * (std::exp(1.0) - 1.0) - 2.0)
            .epsilon(1e-14));
  CHECK(t.matrix(1, 1) ==
        doctest::Approx(0.8 * gam + 1.0 * (std::exp(-1.0) - 1.0) - 2.0)
            .epsilon(1e-14));
  CHECK(t.matrix(2, 2) == doctest::Approx(0.8 * gam - 2.0).epsilon(1e-14));
  CHECK(t.matrix(3, 3) == doctest::Approx(0.8 * gam - 2.0).epsilon(1e-14));
}

TEST_CASE("tilted matrix decomposition M = gamma A^T + diag(psi)") {
  Pcg64 rng(52, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const VelocityChain chain =
        rtsupport::random_chain(rng, 2 + trial % 7, trial % 2 == 0);
    const LatticeModel model =
        chain_model(chain, 1.3, 0.7, 0.9 + rng.uniform());
    const double a = 2.0 * rng.uniform() - 1.0;
    const TiltedMatrix t = tilted_matrix(model, std::array{a});
    const Eigen::MatrixXd rebuilt =
        model.gamma * chain.generator.transpose() +
        Eigen::MatrixXd(t.psi.asDiagonal());
    CHECK((t.matrix - rebuilt).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("principal eigenvalue: trivial and worked values") {
  const Eigenpair zero =
      principal_eigenvalue(tilted_matrix(kWorked, std::array{0.0}));
  CHECK(std::abs(zero.value) <= 1e-12);
  CHECK(zero.vector[0] == doctest::Approx(0.5).epsilon(1e-10));

  const Eigenpair half = principal_eigenvalue(
      tilted_matrix(kSimple, std::array{std::log(2.0)}));
  CHECK(half.value == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("principal eigenvalue matches a dense eigendecomposition") {
  Pcg64 rng(53, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const bool symmetric = trial % 2 == 0;
    const VelocityChain chain =
        rtsupport::random_chain(rng, 2 + trial % 7, symmetric);
    const LatticeModel model =
        chain_model(chain, 0.4 + 2.0 * rng.uniform(),
                    0.4 + 2.0 * rng.uniform(), 0.4 + 2.0 * rng.uniform());
    const double a = 2.4 * rng.uniform() - 1.2;
    const TiltedMatrix t = tilted_matrix(model, std::array{a});
    const Eigenpair pe = principal_eigenvalue(t);
    CHECK(pe.value ==
          doctest::Approx(rtsupport::dense_top_eigenvalue(t.matrix))
              .epsilon(1e-10));
    CHECK(pe.vector.minCoeff() >= 0.0);
    CHECK(pe.vector.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // residual of the eigen equation
    CHECK((t.matrix * pe.vector - pe.value * pe.vector)
              .lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("symmetric matrices agree between eigensolver and power iteration") {
  Pcg64 rng(54, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const VelocityChain chain = rtsupport::random_chain(rng, 5, true);
    const LatticeModel model = chain_model(chain, 1.0, 0.5, 1.5);
    TiltedMatrix t = tilted_matrix(model, std::array{0.8});
    const double via_solver = principal_eigenvalue(t).value;
    t.symmetric = false;  // force the power-iteration path
    const double via_power = principal_eigenvalue(t).value;
    CHECK(via_solver == doctest::Approx(via_power).epsilon(1e-11));
  }
}

TEST_CASE("Donsker-Varadhan rate: exact two-state values") {
  const VelocityChain flip = VelocityChain::two_state_1d();
  CHECK(donsker_varadhan_rate(
            flip, OccupationMeasure::make(Eigen::Vector2d(1.0, 0.0))) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(donsker_varadhan_rate(
            flip, OccupationMeasure::make(Eigen::Vector2d(0.75, 0.25))) ==
        doctest::Approx(1.0 - std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK(donsker_varadhan_rate(flip, stationary_measure(flip)) <= 1e-15);
}

TEST_CASE("general minimization handles boundary measures") {
  const VelocityChain flip = VelocityChain::two_state_1d();
  CHECK(donsker_varadhan_minimize(
            flip, OccupationMeasure::make(Eigen::Vector2d(1.0, 0.0))) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Dirichlet form and convex minimization agree for symmetric chains") {
  Pcg64 rng(55, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const VelocityChain chain =
        rtsupport::random_chain(rng, 2 + trial % 7, true);
    const OccupationMeasure mu = OccupationMeasure::make(
        rtsupport::random_measure(rng, chain.size()));
    const double dirichlet = donsker_varadhan_dirichlet(chain, mu);
    const double minimized = donsker_varadhan_minimize(chain, mu);
    CHECK(dirichlet >= -1e-14);
    CHECK(std::abs(dirichlet - minimized) <= 1e-8);

    const OccupationMeasure nu = stationary_measure(chain);
    CHECK(std::abs(donsker_varadhan_rate(chain, nu)) <= 1e-10);
    CHECK(std::abs(donsker_varadhan_minimize(chain, nu)) <= 1e-10);
  }
}

TEST_CASE("rate is positive away from the stationary measure") {
  Pcg64 rng(56, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const VelocityChain chain =
        rtsupport::random_chain(rng, 3 + trial % 5, trial % 2 == 0);
    const OccupationMeasure nu = stationary_measure(chain);
    Eigen::VectorXd p = nu.p;
    p[0] += 0.2;
    p /= p.sum();
    CHECK(donsker_varadhan_rate(chain, OccupationMeasure::make(p)) > 1e-6);
  }
}

TEST_CASE("variational formula: trivial tilt recovers the stationary measure") {
  const VariationalResult v =
      variational_free_energy(kWorked, std::array{0.0});
  CHECK(std::abs(v.value) <= 1e-10);
  CHECK(v.maximizer.p[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("three-way agreement at the worked point") {
  const double alpha = std::log(2.0);
  const double closed = free_energy_lattice(kSimple, alpha);
  const double spectral =
      principal_eigenvalue(tilted_matrix(kSimple, std::array{alpha})).value;
  const VariationalResult variational =
      variational_free_energy(kSimple, std::array{alpha});
  CHECK(closed == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(spectral == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(variational.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("closed form equals spectral eigenvalue across the tilt grid") {
  Pcg64 rng(57, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const LatticeModel m = build_1d_two_state(
        0.2 + 4.0 * rng.uniform(), 0.2 + 4.0 * rng.uniform(),
        0.2 + 4.0 * rng.uniform());
    for (double a = -3.0; a <= 3.0; a += 0.5)
      CHECK(std::abs(free_energy_lattice(m, a) -
                     principal_eigenvalue(tilted_matrix(m, std::array{a}))
                         .value) <= 1e-12);
  }
}

TEST_CASE("variational value matches spectral for the 2D square model") {
  const LatticeModel m = square_model();
  const std::array alpha{0.7, -0.3};
  const double spectral =
      principal_eigenvalue(tilted_matrix(m, alpha)).value;
  const VariationalResult variational = variational_free_energy(m, alpha);
  CHECK(spectral == doctest::Approx(0.4072894512488332).epsilon(1e-10));
  CHECK(std::abs(variational.value - spectral) <= 1e-8);
  CHECK(variational.maximizer.p.minCoeff() > 0.0);
}

TEST_CASE("variational value matches spectral on random general chains") {
  Pcg64 rng(58, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const VelocityChain chain =
        rtsupport::random_chain(rng, 2 + trial % 6, false);
    const LatticeModel model =
        chain_model(chain, 0.3 + 2.0 * rng.uniform(),
                    0.3 + 2.0 * rng.uniform(), 0.3 + 2.0 * rng.uniform());
    const double a = 2.0 * rng.uniform() - 1.0;
    const double spectral =
        principal_eigenvalue(tilted_matrix(model, std::array{a})).value;
    const VariationalResult variational =
        variational_free_energy(model, std::array{a});
    CHECK(std::abs(variational.value - spectral) <= 1e-8);
    CHECK(variational.certificate_gap <= 1e-7);
  }
}

TEST_CASE("variational value is non-increasing in gamma") {
  const std::array alpha{0.9};
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {1.0, 10.0, 100.0}) {
    const double value =
        variational_free_energy(kWorked.with_gamma(gamma), alpha).value;
    CHECK(value <= prev + 1e-10);
    prev = value;
  }
}

TEST_CASE("Feynman-Kac estimate is exact at alpha = 0") {
  const FeynmanKacEstimate fk =
      feynman_kac_estimate(kWorked, std::array{0.0}, 10.0, 500, 99);
  CHECK(fk.estimate == 0.0);
  CHECK(fk.stderr_ == 0.0);
  CHECK(fk.ess == doctest::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("Feynman-Kac covers the spectral value in its working regime") {
  const std::array alpha{0.3};
  const double reference =
      principal_eigenvalue(tilted_matrix(kSimple, alpha)).value;
  const FeynmanKacEstimate fk =
      feynman_kac_estimate(kSimple, alpha, 50.0, 20000, 4242);
  CHECK(fk.ess > 100.0);
  CHECK(std::abs(fk.estimate - reference) <= 3.0 * fk.stderr_);
}

TEST_CASE("Feynman-Kac is deterministic and thread-count independent") {
  const std::array alpha{0.25};
  const FeynmanKacEstimate a =
      feynman_kac_estimate(kWorked, alpha, 20.0, 4000, 7, 1);
  const FeynmanKacEstimate b =
      feynman_kac_estimate(kWorked, alpha, 20.0, 4000, 7, 1);
  const FeynmanKacEstimate c =
      feynman_kac_estimate(kWorked, alpha, 20.0, 4000, 7, 4);
  CHECK(a.estimate == b.estimate);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.estimate == c.estimate);
  CHECK(a.stderr_ == c.stderr_);
}

TEST_CASE("slow-fast limit of the free energy") {
  const std::array alpha{0.0};
  const LimitSeries zeros =
      slow_fast_limit(kWorked, alpha, std::array{10.0, 100.0, 1000.0});
  for (double d : zeros.deviation) CHECK(d <= 1e-12);

  const std::array a8{0.8};
  const LimitSeries series =
      slow_fast_limit(kWorked, a8, std::array{10.0, 100.0, 1000.0});
  CHECK(series.target ==
        doctest::Approx((std::cosh(0.8) - 1.0) * 4.0).epsilon(1e-13));
  for (std::size_t i = 1; i < series.deviation.size(); ++i) {
    const double ratio = series.deviation[i] / series.deviation[i - 1];
    CHECK(ratio > 0.05);
    CHECK(ratio < 0.2);
  }
  CHECK(series.fitted_order >= 1.0);

  CHECK_THROWS_AS(
      slow_fast_limit(kWorked, a8, std::array{100.0, 10.0}), ParameterError);
}

TEST_CASE("spectral free energy functor feeds the Legendre transform") {
  const LatticeModel m = square_model();
  const ScalarFreeEnergy f = spectral_free_energy(m, {1.0, 0.0});
  CHECK(f.value(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  const LegendrePoint p = legendre_transform(f, 0.4);
  CHECK(std::abs(f.d(p.alpha_star) - 0.4) <= 1e-10);
  CHECK(p.rate >= 0.0);
}
