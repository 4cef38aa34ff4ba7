#ifndef RUNTUMBLE_SIMULATE_HPP
#define RUNTUMBLE_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "runtumble/model.hpp"
#include "runtumble/stats.hpp"

namespace rtp {

struct LatticeEndpoint {
  std::vector<long long> x;
  int velocity = 0;  // index into the model's velocity set
};

struct ContinuumEndpoint {
  double x = 0;
  int velocity = 0;  // +1 / -1
};

/// One exact Gillespie path of the lattice model up to time t, sampled with
/// a single exponential clock of total rate lambda + kappa + gamma*(rate
/// out of v) and a categorical event choice. Endpoint only.
LatticeEndpoint simulate_lattice(const LatticeModel& model, double t,
                                 std::uint64_t seed);

/// Full event record of one lattice path (debugging aid; the statistics
/// only ever need endpoints).
struct PathEvent {
  double time;
  std::vector<long long> x;
  int velocity;
};
std::vector<PathEvent> simulate_lattice_path(const LatticeModel& model,
                                             double t, std::uint64_t seed);

/// Exact-in-distribution telegrapher sample: flip times are a rate-gamma
/// Poisson stream and between flips separated by dt the position advances
/// lambda*v*dt + 2*kappa*E*dt + sqrt(2*kappa*dt)*G. No discretization
/// error.
ContinuumEndpoint simulate_telegrapher(const ContinuumModel& model, double t,
                                       std::uint64_t seed);

struct EstimateWithError {
  double value = 0;
  double stderr_ = 0;
};

/// Per-coordinate endpoint moments from N replicas: mean(X_t)/t and
/// Var(X_t)/t with batch-means standard errors. `initial` optionally
/// replaces the uniform initial velocity distribution.
struct MomentSummary {
  long replicas = 0;
  double horizon = 0;
  std::vector<EstimateWithError> velocity;   // mean / t
  std::vector<EstimateWithError> diffusion;  // variance / t
};

MomentSummary estimate_moments(const LatticeModel& model, double t, long n,
                               std::uint64_t seed, int threads = 1,
                               const std::vector<double>* initial = nullptr);
MomentSummary estimate_moments(const ContinuumModel& model, double t, long n,
                               std::uint64_t seed, int threads = 1);

/// Var(X_t)/t per coordinate (batch-means errors); flags n < 100.
std::vector<EstimateWithError> estimate_diffusion(const LatticeModel& model,
                                                  double t, long n,
                                                  std::uint64_t seed,
                                                  int threads = 1);
std::vector<EstimateWithError> estimate_diffusion(const ContinuumModel& model,
                                                  double t, long n,
                                                  std::uint64_t seed,
                                                  int threads = 1);

/// Empirical SCGF point: estimate (1/t) log mean e^{<alpha,X_t>} at the
/// requested horizon plus the same at horizon 2t; the bias bound is the
/// Richardson-style 2|est(2t) - est(t)|. `reliable` is false when the
/// effective sample size of the exponential weights drops below 100.
struct ScgfPoint {
  std::vector<double> alpha;
  double estimate = 0;     // at horizon t
  double stderr_ = 0;
  double estimate_long = 0;  // at horizon 2t
  double stderr_long = 0;
  double bias_bound = 0;
  double ess = 0;
  bool reliable = true;
};

std::vector<ScgfPoint> estimate_scgf(const LatticeModel& model,
                                     const std::vector<std::vector<double>>& alphas,
                                     double t, long n, std::uint64_t seed,
                                     int threads = 1);

/// Kolmogorov-Smirnov check of X_t/sqrt(sigma^2 t) against the standard
/// normal, per coordinate (sigma^2 from the closed form in 1D, from the
/// spectral F''(0) otherwise); passes iff every coordinate stays below the
/// 1% critical value.
struct CltResult {
  double ks = 0;
  double critical = 0;
  bool pass = false;
};

CltResult clt_check(const LatticeModel& model, double t, long n,
                    std::uint64_t seed, int threads = 1);
CltResult clt_check(const ContinuumModel& model, double t, long n,
                    std::uint64_t seed, int threads = 1);

/// Raw endpoints for CSV dumps: one row per replica.
std::vector<LatticeEndpoint> sample_endpoints(const LatticeModel& model,
                                              double t, long n,
                                              std::uint64_t seed);
std::vector<ContinuumEndpoint> sample_endpoints(const ContinuumModel& model,
                                                double t, long n,
                                                std::uint64_t seed);

}  // namespace rtp

#endif
