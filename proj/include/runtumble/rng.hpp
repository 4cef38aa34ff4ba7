#ifndef RUNTUMBLE_RNG_HPP
#define RUNTUMBLE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace rtp {

/// SplitMix64 finalizer; used to decorrelate user seeds and stream ids.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// PCG64 (XSL-RR variant). Each (seed, stream) pair selects a distinct
/// sequence: the stream id picks the (odd) LCG increment, so per-replica
/// generators are independent sequences rather than offsets of one orbit,
/// and replica results do not depend on how work is split over threads.
class Pcg64 {
 public:
  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    const u128 inc_seed =
        (u128(mix64(stream ^ 0xda3e39cb94b95bdbULL)) << 64) | mix64(stream);
    inc_ = (inc_seed << 1) | 1;
    state_ = 0;
    step();
    state_ += (u128(mix64(seed)) << 64) | mix64(seed ^ 0x5851f42d4c957f2dULL);
    step();
  }

  std::uint64_t next() {
    const u128 old = state_;
    step();
    const std::uint64_t xored =
        static_cast<std::uint64_t>(old >> 64) ^ static_cast<std::uint64_t>(old);
    const unsigned rot = static_cast<unsigned>(old >> 122);
    return (xored >> rot) | (xored << ((-rot) & 63u));
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal via Box-Muller (second value cached).
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

 private:
  using u128 = unsigned __int128;
  static constexpr u128 mult() {
    return (u128(2549297995355413924ULL) << 64) | 4865540595714422341ULL;
  }
  void step() { state_ = state_ * mult() + inc_; }

  u128 state_ = 0;
  u128 inc_ = 1;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace rtp

#endif
