#ifndef RUNTUMBLE_VERIFY_HPP
#define RUNTUMBLE_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "runtumble/config.hpp"

namespace rtp {

/// Tolerances and budgets of the cross-verification matrix. Defaults are
/// the shipped acceptance values; configs may override tolerances.
struct VerifyOptions {
  double tol_closed_vs_spectral = 1e-12;
  double tol_spectral_vs_variational = 1e-8;
  double tol_diffusion_rel = 1e-6;
  double sim_stderr_mult = 4.0;
  double tol_expm = 1e-10;
  double tol_dv_exact = 1e-12;
  double tol_dv_paths = 1e-8;
  double tol_dv_stationary = 1e-10;
  double fk_stderr_mult = 3.0;
  double order_min = 1.0;
  double tol_young = 1e-10;
  double tol_rate_origin = 1e-12;

  double sim_t = 100.0;
  long sim_n = 100000;
  double fk_t = 200.0;
  long fk_n = 100000;
  double clt_t = 1000.0;
  long clt_n = 10000;

  std::uint64_t seed = 12345;
  int threads = 1;
};

VerifyOptions verify_options(const RunConfig& config);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double discrepancy = 0;  // worst observed value against the tolerance
  double tolerance = 0;
  double seconds = 0;
  std::optional<double> time_limit;
  std::string detail;
};

struct AlphaRecord {
  std::vector<double> alpha;
  std::optional<double> f_closed;
  std::optional<double> f_spectral;
  std::optional<double> f_variational;
  std::optional<double> f_feynman_kac;
  std::optional<double> fk_stderr;
  double max_discrepancy = 0;  // over the deterministic routes
};

struct VerifyReport {
  std::vector<CriterionResult> criteria;
  std::vector<AlphaRecord> per_alpha;
  bool pass = false;
};

/// Runs the whole matrix: closed form vs spectral vs variational vs
/// Feynman-Kac vs simulation, plus the limit, Legendre and CLT checks.
/// `config` (optional) supplies the model for the per-alpha records and
/// tolerance overrides; criteria run on their own pinned models/budgets.
/// `only` restricts to a single criterion id (0 = all).
VerifyReport run_verification(const VerifyOptions& options,
                              const RunConfig* config = nullptr,
                              int only = 0);

}  // namespace rtp

#endif
