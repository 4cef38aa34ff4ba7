#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "runtumble/rng.hpp"
#include "runtumble/transforms.hpp"
#include "support.hpp"

using namespace rtp;

namespace {
const LatticeModel kWorked = build_1d_two_state(2.0, 1.0, 4.0);
}

TEST_CASE("transport matrix at q = 0 is the flip generator") {
  const TransportMatrix1D m = transport_matrix(kWorked, 0.0);
  CHECK(m.a == Complex(-4.0, 0.0));
  CHECK(m.b == 4.0);
}

TEST_CASE("transport matrix worked value at q = pi/2") {
  const TransportMatrix1D m = transport_matrix(kWorked, M_PI_2);
  CHECK(m.a.real() == doctest::Approx(-8.0).epsilon(1e-14));
  CHECK(m.a.imag() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.b == 4.0);
}

TEST_CASE("general kernel changes only the cosine part of the diagonal") {
  const JumpKernel two = JumpKernel::make(1, {{{2}, 0.5}, {{-2}, 0.5}});
  const LatticeModel m = build_1d_general(2.0, 1.0, 4.0, two);
  for (double q : {0.3, 1.1, 2.0}) {
    const TransportMatrix1D t = transport_matrix(m, q);
    const double expected =
        1.0 * (std::cos(2.0 * q) - 1.0) + 2.0 * (std::cos(q) - 1.0) - 4.0;
    CHECK(t.a.real() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(t.a.imag() == doctest::Approx(2.0 * std::sin(q)).epsilon(1e-14));
  }
}

TEST_CASE("M(-q) is the conjugate of M(q)") {
  Pcg64 rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double q = 6.0 * rng.uniform() - 3.0;
    const TransportMatrix1D plus = transport_matrix(kWorked, q);
    const TransportMatrix1D minus = transport_matrix(kWorked, -q);
    CHECK(minus.a == std::conj(plus.a));
    CHECK(minus.b == plus.b);
  }
}

TEST_CASE("transport matrix generates the Fourier-transformed master equation") {
  // Independent oracle: apply the master equation right-hand side to a test
  // distribution on a window of Z x {+1,-1}, then Fourier transform; this
  // must equal M(q) applied to the transformed distribution.
  const double lam = 2.0, kap = 1.0, gam = 4.0;
  const int w = 6;  // window [-w, w]; test mass lives well inside
  std::vector<std::vector<double>> mu(2, std::vector<double>(2 * w + 1, 0.0));
  Pcg64 rng(33, 0);
  for (int v = 0; v < 2; ++v)
    for (int x = -2; x <= 2; ++x) mu[v][w + x] = rng.uniform();

  auto at = [&](int v, int x) {
    return (x < -w || x > w) ? 0.0 : mu[v][w + x];
  };
  // d/dt mu(x,v) = lam mu(x-v,v) + kap (mu(x-1,v) + mu(x+1,v))
  //              + gam mu(x,-v) - (2 kap + lam + gam) mu(x,v)
  std::vector<std::vector<double>> rhs(2, std::vector<double>(2 * w + 1, 0.0));
  for (int vi = 0; vi < 2; ++vi) {
    const int v = vi == 0 ? 1 : -1;
    for (int x = -w; x <= w; ++x)
      rhs[vi][w + x] = lam * at(vi, x - v) +
                       kap * (at(vi, x - 1) + at(vi, x + 1)) +
                       gam * at(1 - vi, x) -
                       (2.0 * kap + lam + gam) * at(vi, x);
  }

  for (double q : {0.0, 0.4, 1.3, 2.9}) {
    Eigen::Vector2cd mu_hat = Eigen::Vector2cd::Zero();
    Eigen::Vector2cd rhs_hat = Eigen::Vector2cd::Zero();
    for (int vi = 0; vi < 2; ++vi)
      for (int x = -w; x <= w; ++x) {
        const Complex phase = std::exp(Complex(0.0, q * x));
        mu_hat(vi) += phase * mu[vi][w + x];
        rhs_hat(vi) += phase * rhs[vi][w + x];
      }
    const Eigen::Vector2cd lhs =
        transport_matrix(kWorked, q).matrix() * mu_hat;
    CHECK((lhs - rhs_hat).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("S(0,z) = 1/z and the biased term vanishes at alpha0 = 1/2") {
  for (double z : {0.1, 1.0, 10.0}) {
    const FourierLaplaceValue s =
        fourier_laplace_lattice(kWorked, 0.0, Complex(z, 0.0));
    CHECK(s.value.real() == doctest::Approx(1.0 / z).epsilon(1e-14));
    CHECK(std::abs(s.value.imag()) <= 1e-15);
  }
  const FourierLaplaceValue half =
      fourier_laplace_lattice(kWorked, 0.7, Complex(0.3, 0.0), 0.5);
  const double c = (2.0 + 2.0) * (std::cos(0.7) - 1.0);
  const Complex num = 2.0 * 4.0 + 0.3 - c;
  const Complex den = std::pow(4.0 + 0.3 - c, 2) - 16.0 +
                      4.0 * std::sin(0.7) * std::sin(0.7);
  CHECK(std::abs(half.value - num / den) <= 1e-15);
}

TEST_CASE("frozen lattice transform value") {
  const FourierLaplaceValue s =
      fourier_laplace_lattice(kWorked, 0.7, Complex(0.3, 0.0));
  CHECK(s.value.real() == doctest::Approx(0.7040866324885416).epsilon(1e-13));
  CHECK(std::abs(s.value.imag()) <= 1e-14);
  CHECK(s.residual <= 1e-12);
}

TEST_CASE("closed form and resolvent agree on the verification grid") {
  Pcg64 rng(37, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const LatticeModel m = build_1d_two_state(
        0.2 + 4.8 * rng.uniform(), 0.2 + 4.8 * rng.uniform(),
        0.2 + 4.8 * rng.uniform());
    for (double q : {0.0, 0.3, -0.3, 1.1, -1.1, 2.8, -2.8})
      for (double z : {0.1, 1.0, 10.0}) {
        const double a0 = rng.uniform();
        const FourierLaplaceValue s =
            fourier_laplace_lattice(m, q, Complex(z, 0.0), a0);
        CHECK(s.residual <= 1e-12);
      }
  }
}

TEST_CASE("transform rejects the closed right half-plane boundary") {
  CHECK_THROWS_AS(fourier_laplace_lattice(kWorked, 0.5, Complex(0.0, 1.0)),
                  DomainError);
  CHECK_THROWS_AS(fourier_laplace_lattice(kWorked, 0.5, Complex(-0.1, 0.0)),
                  DomainError);
  CHECK_THROWS_AS(
      fourier_laplace_continuum(ContinuumModel::make(2, 1, 4), 0.5,
                                Complex(-1.0, 0.0)),
      DomainError);
}

TEST_CASE("continuum transform: normalization, frozen value, slow-fast") {
  const ContinuumModel m = ContinuumModel::make(2.0, 1.0, 4.0);
  for (double z : {0.1, 1.0, 10.0})
    CHECK(fourier_laplace_continuum(m, 0.0, Complex(z, 0.0)).value.real() ==
          doctest::Approx(1.0 / z).epsilon(1e-14));

  const FourierLaplaceValue s =
      fourier_laplace_continuum(m, 1.0, Complex(1.0, 0.0));
  CHECK(s.value.real() == doctest::Approx(5.0 / 12.0).epsilon(1e-14));
  CHECK(s.residual <= 1e-12);

  // gamma -> infinity approaches the Brownian resolvent at rate O(1/gamma)
  const double target = 1.0 / (1.0 * 1.0 + 1.0);
  double prev = 1e300;
  for (double gamma : {1e2, 1e3, 1e4}) {
    const ContinuumModel fast = ContinuumModel::make(2.0, 1.0, gamma);
    const double dev = std::abs(
        fourier_laplace_continuum(fast, 1.0, Complex(1.0, 0.0)).value -
        Complex(target));
    CHECK(dev < prev);
    CHECK(dev <= 10.0 / gamma);
    prev = dev;
  }
}

TEST_CASE("diffusion constants") {
  CHECK(diffusion_constant(kWorked) == 5.0);
  CHECK(diffusion_constant(build_1d_two_state(0.0, 1.0, 1.0)) == 2.0);
  CHECK(diffusion_constant(ContinuumModel::make(2.0, 1.0, 4.0)) == 3.0);
  const JumpKernel mixed = JumpKernel::make(
      1, {{{1}, 0.3}, {{-1}, 0.3}, {{2}, 0.2}, {{-2}, 0.2}});
  const LatticeModel gen = build_1d_general(1.5, 1.7, 2.0, mixed);
  CHECK(diffusion_constant(gen) ==
        doctest::Approx(1.7 * 2.2 + 1.5 + 1.125).epsilon(1e-15));
}

TEST_CASE("scaling diagnostic: monotone decrease and order") {
  const ScalingDiagnostic d =
      scaling_diagnostic(kWorked, 1.0, 0.7, {0.1, 0.05, 0.025});
  for (std::size_t i = 1; i < d.points.size(); ++i)
    CHECK(d.points[i].deviation < d.points[i - 1].deviation);
  CHECK(d.fitted_order >= 1.0);

  // lambda = 0 is a pure walk; cos-expansion leaves an O(eps^2) remainder
  const ScalingDiagnostic walk = scaling_diagnostic(
      build_1d_two_state(0.0, 1.0, 1.0), 1.0, 0.7, {0.1, 0.05, 0.025});
  CHECK(walk.fitted_order == doctest::Approx(2.0).epsilon(0.1));

  // biased initial velocities share the symmetric limit
  const ScalingDiagnostic biased =
      scaling_diagnostic(kWorked, 1.0, 0.7, {0.1, 0.05, 0.025}, 0.9);
  for (std::size_t i = 1; i < biased.points.size(); ++i)
    CHECK(biased.points[i].deviation < biased.points[i - 1].deviation);
  CHECK(biased.points.back().deviation <= 2.0 * 0.025 + 1e-9);

  const ScalingDiagnostic cont = scaling_diagnostic(
      ContinuumModel::make(2.0, 1.0, 4.0), 1.0, 0.7, {0.1, 0.05, 0.025});
  for (std::size_t i = 1; i < cont.points.size(); ++i)
    CHECK(cont.points[i].deviation < cont.points[i - 1].deviation);

  CHECK_THROWS_AS(
      scaling_diagnostic(kWorked, 0.0, 0.7, {0.1, 0.05}), ParameterError);
  CHECK_THROWS_AS(
      scaling_diagnostic(kWorked, 1.0, 0.7, {0.05, 0.1}), ParameterError);
}
