#include <doctest.h>

#include <cmath>
#include <complex>

#include "runtumble/free_energy.hpp"
#include "runtumble/linalg.hpp"
#include "runtumble/rng.hpp"
#include "runtumble/transforms.hpp"
#include "support.hpp"

using namespace rtp;

namespace {
const LatticeModel kWorked = build_1d_two_state(2.0, 1.0, 4.0);
const LatticeModel kSimple = build_1d_two_state(1.0, 0.0, 1.0);
}

TEST_CASE("closed semigroup at t = 0 is the identity") {
  const ClosedExpm e = matrix_exponential_closed(kWorked, Complex(0.9), 0.0);
  CHECK((e.matrix - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <=
        1e-15);
}

TEST_CASE("closed semigroup conserves probability at q = 0") {
  for (double t : {0.1, 1.3, 10.0}) {
    const ClosedExpm e = matrix_exponential_closed(kWorked, Complex(0.0), t);
    const Eigen::Vector2cd column_sums =
        e.matrix.transpose() * Eigen::Vector2cd(1.0, 1.0);
    CHECK(std::abs(column_sums(0) - Complex(1.0)) <= 1e-13);
    CHECK(std::abs(column_sums(1) - Complex(1.0)) <= 1e-13);
  }
}

TEST_CASE("closed semigroup frozen entries at (q,t) = (0.5, 1.3)") {
  const ClosedExpm e = matrix_exponential_closed(kWorked, Complex(0.5), 1.3);
  CHECK(e.matrix(0, 0).real() ==
        doctest::Approx(0.22734454150303648).epsilon(1e-12));
  CHECK(e.matrix(0, 0).imag() ==
        doctest::Approx(0.056129415345728469).epsilon(1e-12));
  CHECK(e.matrix(0, 1).real() ==
        doctest::Approx(0.23415279673729239).epsilon(1e-12));
  CHECK(std::abs(e.matrix(0, 1).imag()) <= 1e-15);
  CHECK(e.matrix(1, 1) == std::conj(e.matrix(0, 0)));
}

TEST_CASE("closed semigroup tracks two independent exponentials") {
  // Oscillatory (lambda |sin q| > gamma), damped, and B = 0 regimes.
  const std::vector<LatticeModel> models = {
      kWorked, build_1d_two_state(5.0, 0.5, 1.0),
      build_1d_two_state(1.5, 0.7, 1.5)};
  for (const auto& model : models)
    for (double q : {0.0, 0.5, M_PI_2, 2.8})
      for (double t : {0.1, 1.3, 10.0}) {
        const Eigen::Matrix2cd closed =
            matrix_exponential_closed(model, Complex(q), t).matrix;
        const Eigen::Matrix2cd scaled(t * transport_matrix(model, q).matrix());
        CHECK((closed - expm_scaling_squaring(scaled)).cwiseAbs().maxCoeff() <=
              1e-10);
        CHECK((closed - rtsupport::eigen_expm(scaled)).cwiseAbs().maxCoeff() <=
              1e-10);
      }
}

TEST_CASE("B = 0 point is hit exactly and handled by the sinhc limit") {
  const LatticeModel degenerate = build_1d_two_state(1.5, 0.7, 1.5);
  const ClosedExpm e =
      matrix_exponential_closed(degenerate, Complex(M_PI_2), 1.3);
  CHECK(std::abs(e.big_b) == 0.0);
  CHECK(std::isinf(e.prefactor.real()));
  const Eigen::Matrix2cd scaled(
      1.3 * transport_matrix(degenerate, M_PI_2).matrix());
  CHECK((e.matrix - expm_scaling_squaring(scaled)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("moment generating function basics") {
  for (double t : {0.0, 0.5, 3.0})
    CHECK(moment_generating(kWorked, 0.0, t) ==
          doctest::Approx(1.0).epsilon(1e-13));

  // Short-time expansion 1 + sigma^2 alpha^2 t / 2 + O(t^2)
  const double mgf = moment_generating(kWorked, 0.1, 0.01);
  CHECK(mgf == doctest::Approx(1.0 + 0.5 * 5.0 * 0.01 * 0.01).epsilon(1e-5));
  CHECK(mgf >= 1.0);

  // (1/t) log E e^{alpha X_t} approaches F(alpha) at rate 1/t
  const double target = 0.5;
  double prev_gap = 1e300;
  for (double t : {10.0, 100.0, 1000.0}) {
    const double value =
        std::log(moment_generating(kSimple, std::log(2.0), t)) / t;
    const double gap = std::abs(value - target);
    CHECK(gap < prev_gap);
    CHECK(gap * t <= 1.0);
    prev_gap = gap;
  }
}

TEST_CASE("lattice free energy closed form") {
  CHECK(free_energy_lattice(kWorked, 0.0) == 0.0);
  CHECK(free_energy_lattice(kSimple, std::log(2.0)) ==
        doctest::Approx(0.5).epsilon(1e-15));

  Pcg64 rng(41, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const double a = 6.0 * rng.uniform() - 3.0;
    CHECK(free_energy_lattice(kWorked, a) ==
          doctest::Approx(free_energy_lattice(kWorked, -a)).epsilon(1e-12));
    // largest eigenvalue of the explicit symmetric 2x2 matrix
    const double h = 4.0 * (std::cosh(a) - 1.0);
    const double p = 2.0 * std::sinh(a);
    const double top =
        h - 4.0 + std::sqrt(16.0 + p * p);
    CHECK(free_energy_lattice(kWorked, a) ==
          doctest::Approx(top).epsilon(1e-13));
    // analytic derivative vs central difference
    const double step = 1e-6;
    const double fd = (free_energy_lattice(kWorked, a + step) -
                       free_energy_lattice(kWorked, a - step)) /
                      (2.0 * step);
    CHECK(free_energy_lattice_deriv(kWorked, a) ==
          doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("general kernel free energy keeps the sqrt activity term") {
  const JumpKernel mixed = JumpKernel::make(
      1, {{{1}, 0.3}, {{-1}, 0.3}, {{2}, 0.2}, {{-2}, 0.2}});
  const LatticeModel gen = build_1d_general(1.5, 1.7, 2.0, mixed);
  for (double a : {0.2, 0.9, 1.7}) {
    const double lam = 1.5, gam = 2.0;
    const double expected =
        1.7 * (0.6 * (std::cosh(a) - 1.0) + 0.4 * (std::cosh(2 * a) - 1.0)) +
        lam * (std::cosh(a) - 1.0) +
        std::sqrt(gam * gam + lam * lam * std::sinh(a) * std::sinh(a)) - gam;
    CHECK(free_energy_lattice(gen, a) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("slow-fast expansion of the lattice free energy") {
  const double a = 1.0, lam = 2.0, kap = 1.0;
  for (double gam : {10.0, 100.0, 1000.0}) {
    const double f =
        free_energy_lattice(build_1d_two_state(lam, kap, gam), a);
    const double sh = std::sinh(a);
    const double expansion = (std::cosh(a) - 1.0) * (2.0 * kap + lam) +
                             lam * lam * sh * sh / (2.0 * gam);
    CHECK(std::abs(f - expansion) <=
          std::pow(lam * sh, 4) / (gam * gam));
  }
}

TEST_CASE("continuum free energy with drift") {
  const ContinuumModel drift = ContinuumModel::make(2.0, 1.0, 4.0, 0.5);
  CHECK(free_energy_continuum(drift, 0.0) == 0.0);

  const ContinuumModel brownian = ContinuumModel::make(0.0, 1.3, 2.0);
  for (double a : {0.5, 1.5})
    CHECK(free_energy_continuum(brownian, a) ==
          doctest::Approx(1.3 * a * a).epsilon(1e-14));

  const double h = 1e-4;
  const double d1 = (free_energy_continuum(drift, h) -
                     free_energy_continuum(drift, -h)) /
                    (2.0 * h);
  const double d2 = (free_energy_continuum(drift, h) -
                     2.0 * free_energy_continuum(drift, 0.0) +
                     free_energy_continuum(drift, -h)) /
                    (h * h);
  CHECK(d1 == doctest::Approx(1.0).epsilon(1e-6));   // 2 kappa E
  CHECK(d2 == doctest::Approx(3.0).epsilon(1e-6));   // 2 kappa + lambda^2/gamma

  Pcg64 rng(43, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = 4.0 * rng.uniform() - 2.0;
    CHECK(free_energy_continuum(drift, a) - free_energy_continuum(drift, -a) ==
          doctest::Approx(4.0 * a * 1.0 * 0.5).epsilon(1e-12));
  }
}

TEST_CASE("Legendre transform: quadratic pair and origin") {
  const ScalarFreeEnergy quad{[](double a) { return 2.5 * a * a; },
                              [](double a) { return 5.0 * a; }};
  const LegendrePoint p = legendre_transform(quad, 1.0);
  CHECK(p.rate == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(p.alpha_star == doctest::Approx(0.2).epsilon(1e-10));

  const LegendrePoint origin =
      legendre_transform(lattice_free_energy(kWorked), 0.0);
  CHECK(origin.rate <= 1e-12);
  CHECK(std::abs(origin.alpha_star) <= 1e-10);
}

TEST_CASE("Legendre transform inverts the derivative exactly at ln 2") {
  const ScalarFreeEnergy f = lattice_free_energy(kSimple);
  CHECK(f.d(std::log(2.0)) == doctest::Approx(1.5).epsilon(1e-15));
  const LegendrePoint p = legendre_transform(f, 1.5);
  CHECK(p.alpha_star == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(p.rate ==
        doctest::Approx(std::log(2.0) * 1.5 - 0.5).epsilon(1e-10));
}

TEST_CASE("rate curve: Young equality, convexity, zero at the mean") {
  const ScalarFreeEnergy f = lattice_free_energy(kWorked);
  std::vector<double> xs;
  for (int i = 0; i <= 16; ++i) xs.push_back(-2.0 + 0.25 * i);
  const RateCurve curve = evaluate_rate_curve(f, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(curve.rate[i] >= 0.0);
    CHECK(std::abs(curve.rate[i] + f.value(curve.alpha_star[i]) -
                   curve.alpha_star[i] * xs[i]) <= 1e-10);
    CHECK(std::abs(f.d(curve.alpha_star[i]) - xs[i]) <= 1e-10);
  }
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    CHECK(curve.rate[i - 1] - 2.0 * curve.rate[i] + curve.rate[i + 1] >=
          -1e-9);
  CHECK(legendre_transform(f, f.d(0.0)).rate <= 1e-12);
}

TEST_CASE("free energy curve second derivative matches sigma^2") {
  const FreeEnergyCurve curve = evaluate_free_energy_curve(
      lattice_free_energy(kWorked), {-1.0, 0.0, 1.0});
  CHECK(curve.second_deriv_origin ==
        doctest::Approx(diffusion_constant(kWorked)).epsilon(1e-6));
  const ContinuumModel cont = ContinuumModel::make(2.0, 1.0, 4.0, 0.5);
  const FreeEnergyCurve ccurve =
      evaluate_free_energy_curve(continuum_free_energy(cont), {0.0});
  CHECK(ccurve.second_deriv_origin ==
        doctest::Approx(diffusion_constant(cont)).epsilon(1e-6));
}

TEST_CASE("continuum limit of the rescaled lattice free energy") {
  const LimitSeries zero = continuum_limit_check(kWorked, 0.0, {0.1, 0.05});
  for (double d : zero.deviation) CHECK(d == 0.0);

  const LimitSeries series =
      continuum_limit_check(kWorked, 1.0, {0.2, 0.1, 0.05, 0.025});
  CHECK(series.target ==
        doctest::Approx(1.0 + std::sqrt(20.0) - 4.0).epsilon(1e-14));
  for (std::size_t i = 1; i < series.deviation.size(); ++i)
    CHECK(series.deviation[i] < series.deviation[i - 1]);
  CHECK(series.fitted_order >= 1.0);

  // lambda = 0: pure Taylor remainder of cosh, order 2
  const LimitSeries walk = continuum_limit_check(
      build_1d_two_state(0.0, 1.0, 4.0), 1.0, {0.2, 0.1, 0.05, 0.025});
  CHECK(walk.fitted_order == doctest::Approx(2.0).epsilon(0.05));
}
