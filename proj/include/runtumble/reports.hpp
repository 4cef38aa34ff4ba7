#ifndef RUNTUMBLE_REPORTS_HPP
#define RUNTUMBLE_REPORTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "runtumble/config.hpp"
#include "runtumble/simulate.hpp"
#include "runtumble/transforms.hpp"

namespace rtp {

/// Every number written by the CLI is produced here; the CLI only formats.

struct AnalyzeReport {
  std::vector<FourierLaplaceValue> transform_rows;  // q-grid x z-grid
  double sigma2 = 0;
  ScalingDiagnostic scaling;
  double scaling_q = 0;
  double scaling_z = 0;
};

AnalyzeReport run_analyze(const RunConfig& config);

struct FreeEnergyRow {
  int axis = 0;  // coordinate direction of the tilt
  double alpha = 0;
  std::optional<double> closed;
  std::optional<double> spectral;
  std::optional<double> variational;
};

struct RateRow {
  int axis = 0;
  double x = 0;
  double rate = 0;
  double alpha_star = 0;
};

struct LdpReport {
  std::vector<FreeEnergyRow> free_energy;
  std::vector<RateRow> rate;
  double max_closed_vs_spectral = 0;
  double max_spectral_vs_variational = 0;
  double second_deriv_origin = 0;       // F''(0), central difference
  std::optional<double> sigma2_closed;  // where the closed form applies
  std::optional<double> asymptotic_velocity;  // continuum F'(0)
};

LdpReport run_ldp(const RunConfig& config);

struct SimReport {
  double horizon = 0;
  long replicas = 0;
  std::uint64_t seed = 0;
  std::vector<EstimateWithError> sigma2;
  std::vector<EstimateWithError> velocity;
  std::vector<std::optional<double>> sigma2_analytic;
  CltResult clt;
  std::vector<ScgfPoint> scgf;
  std::vector<std::optional<double>> scgf_analytic;
  std::vector<LatticeEndpoint> lattice_endpoints;      // when requested
  std::vector<ContinuumEndpoint> continuum_endpoints;  // when requested
};

SimReport run_simulate(const RunConfig& config, int threads);

}  // namespace rtp

#endif
