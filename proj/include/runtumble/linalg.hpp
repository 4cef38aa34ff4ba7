#ifndef RUNTUMBLE_LINALG_HPP
#define RUNTUMBLE_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace rtp {

/// Matrix exponential by scaling and squaring with a Taylor core; the
/// numerical counterpart to the closed-form semigroup assemblies.
template <typename Derived>
typename Derived::PlainObject expm_scaling_squaring(
    const Eigen::MatrixBase<Derived>& m) {
  using Mat = typename Derived::PlainObject;
  const double norm = m.cwiseAbs().sum();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Mat a = m * scale;
  Mat result = Mat::Identity(m.rows(), m.cols());
  Mat term = result;
  for (int k = 1; k <= 24; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// sinh(x)/x with the analytic value 1 at x = 0 (series below 1e-4).
inline std::complex<double> sinhc(std::complex<double> x) {
  if (std::abs(x) < 1e-4) {
    const std::complex<double> x2 = x * x;
    return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
  }
  return std::sinh(x) / x;
}

}  // namespace rtp

#endif
