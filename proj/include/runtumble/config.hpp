#ifndef RUNTUMBLE_CONFIG_HPP
#define RUNTUMBLE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "runtumble/model.hpp"

namespace rtp {

/// Config-file problem, anchored to a 1-based line number (0 = whole file).
struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& what_)
      : std::runtime_error("config line " + std::to_string(line_) + ": " +
                           what_),
        line(line_) {}
};

/// Velocity section as written: explicit rate entries or the uniform chain.
struct VelocitySpec {
  std::vector<IntVec> velocities;
  bool uniform = false;
  std::vector<std::tuple<int, int, double>> rates;  // 1-based indices

  bool operator==(const VelocitySpec&) const = default;
};

struct ModelSection {
  std::string type;  // two_state_1d | lattice | continuum
  int dimension = 1;
  double lambda = 0;
  double kappa = 0;
  double gamma = 1;
  double field = 0;
  double alpha0 = 0.5;  // initial +1-velocity weight (1D two-state only)
  std::optional<std::vector<std::pair<IntVec, double>>> kernel;
  std::optional<VelocitySpec> velocities;

  bool operator==(const ModelSection&) const = default;
};

struct SimulationSection {
  double t = 100.0;
  long n = 100000;
  std::uint64_t seed = 12345;
  bool endpoints = false;
  double fk_t = 50.0;  // per-alpha Feynman-Kac report budget
  long fk_n = 10000;

  bool operator==(const SimulationSection&) const = default;
};

/// One parsed run configuration. Grids and tolerances keep only the keys
/// that appeared in the file; accessors fall back to the documented
/// defaults.
struct RunConfig {
  ModelSection model;
  std::map<std::string, std::vector<double>> grids;
  SimulationSection simulation;
  std::string out_dir = "out";
  std::map<std::string, double> tolerances;

  bool operator==(const RunConfig&) const = default;

  std::vector<double> grid_or(const std::string& name,
                              std::vector<double> fallback) const;
  double tolerance_or(const std::string& name, double fallback) const;

  bool is_continuum() const { return model.type == "continuum"; }
  LatticeModel build_lattice() const;
  ContinuumModel build_continuum() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Expands "a:b:n" (n evenly spaced points from a to b) or a comma list.
std::vector<double> parse_grid(const std::string& text, int line);

}  // namespace rtp

#endif
