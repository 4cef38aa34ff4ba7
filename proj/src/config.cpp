#include "runtumble/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rtp {

namespace {

const std::set<std::string> kSections = {"model", "kernel", "velocities",
                                         "grids", "simulation", "output",
                                         "tolerances"};
const std::set<std::string> kModelKeys = {
    "type", "dimension", "lambda", "kappa", "gamma", "field", "alpha0"};
const std::set<std::string> kGridKeys = {"alpha", "q",          "z",
                                         "x",     "epsilon",    "gamma_grid",
                                         "scgf_alpha"};
const std::set<std::string> kSimKeys = {"t",    "n",    "seed",
                                        "endpoints", "fk_t", "fk_n"};
const std::set<std::string> kToleranceKeys = {
    "closed_vs_spectral", "spectral_vs_variational", "diffusion_rel",
    "sim_stderr_mult",    "expm",                    "dv_exact",
    "dv_paths",           "dv_stationary",           "fk_stderr_mult",
    "order_min",          "young",                   "rate_origin"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + s + "'");
  }
}

long parse_long(const std::string& s, int line) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(line, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, int line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(line, "expected an unsigned integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, int line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(line, "expected true or false, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

IntVec parse_int_vector(const std::string& s, int line) {
  IntVec out;
  for (const std::string& part : split(s, ','))
    out.push_back(static_cast<int>(parse_long(part, line)));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

/// Indexed keys like z3 / p3 / v2; returns the index or -1.
int indexed_key(const std::string& key, const std::string& prefix) {
  if (key.size() <= prefix.size() || key.rfind(prefix, 0) != 0) return -1;
  long idx = 0;
  const char* b = key.data() + prefix.size();
  const auto [p, ec] = std::from_chars(b, key.data() + key.size(), idx);
  if (ec != std::errc() || p != key.data() + key.size() || idx < 1) return -1;
  return static_cast<int>(idx);
}

struct RawEntry {
  std::string value;
  int line;
};
using Section = std::map<std::string, RawEntry>;

}  // namespace

std::vector<double> parse_grid(const std::string& text, int line) {
  const auto parts = split(text, ':');
  if (parts.size() == 3) {
    const double a = parse_double(parts[0], line);
    const double b = parse_double(parts[1], line);
    const long n = parse_long(parts[2], line);
    if (n < 2) throw ConfigError(line, "grid needs at least 2 points");
    std::vector<double> out;
    for (long i = 0; i < n; ++i)
      out.push_back(a + (b - a) * static_cast<double>(i) /
                            static_cast<double>(n - 1));
    return out;
  }
  std::vector<double> out;
  for (const std::string& part : split(text, ','))
    out.push_back(parse_double(part, line));
  if (out.empty()) throw ConfigError(line, "empty grid");
  return out;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  {
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = raw;
      const auto hash = s.find('#');
      if (hash != std::string::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(line, "unterminated section");
        current = trim(s.substr(1, s.size() - 2));
        if (!kSections.count(current))
          throw ConfigError(line, "unknown section [" + current + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(line, "expected key = value");
      if (current.empty())
        throw ConfigError(line, "key outside of any section");
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError(line, "empty key or value");
      if (sections[current].count(key))
        throw ConfigError(line, "duplicate key '" + key + "'");
      sections[current][key] = {value, line};
    }
  }

  RunConfig cfg;

  // [model]
  if (!sections.count("model")) throw ConfigError(0, "missing [model] section");
  for (const auto& [key, entry] : sections["model"]) {
    if (!kModelKeys.count(key))
      throw ConfigError(entry.line, "unknown key '" + key + "' in [model]");
  }
  auto& model_section = sections["model"];
  auto model_value = [&](const char* key) -> const RawEntry* {
    const auto it = model_section.find(key);
    return it == model_section.end() ? nullptr : &it->second;
  };
  if (const auto* e = model_value("type"))
    cfg.model.type = e->value;
  else
    throw ConfigError(0, "[model] type is required");
  if (cfg.model.type != "two_state_1d" && cfg.model.type != "lattice" &&
      cfg.model.type != "continuum")
    throw ConfigError(model_value("type")->line,
                      "type must be two_state_1d, lattice or continuum");
  if (const auto* e = model_value("dimension")) {
    if (cfg.model.type == "continuum")
      throw ConfigError(e->line, "dimension applies to lattice models only");
    cfg.model.dimension = static_cast<int>(parse_long(e->value, e->line));
  }
  if (const auto* e = model_value("lambda"))
    cfg.model.lambda = parse_double(e->value, e->line);
  if (const auto* e = model_value("kappa"))
    cfg.model.kappa = parse_double(e->value, e->line);
  if (const auto* e = model_value("gamma"))
    cfg.model.gamma = parse_double(e->value, e->line);
  if (const auto* e = model_value("field")) {
    if (cfg.model.type != "continuum")
      throw ConfigError(e->line, "field applies to continuum models only");
    cfg.model.field = parse_double(e->value, e->line);
  }
  if (const auto* e = model_value("alpha0")) {
    cfg.model.alpha0 = parse_double(e->value, e->line);
    if (!(cfg.model.alpha0 >= 0.0 && cfg.model.alpha0 <= 1.0))
      throw ConfigError(e->line, "alpha0 must lie in [0,1]");
  }

  // [kernel]
  if (sections.count("kernel")) {
    if (cfg.model.type != "lattice")
      throw ConfigError(sections["kernel"].begin()->second.line,
                        "[kernel] applies to type = lattice only");
    auto& sec = sections["kernel"];
    const auto count_it = sec.find("count");
    if (count_it == sec.end())
      throw ConfigError(0, "[kernel] needs a count key");
    const int count = static_cast<int>(
        parse_long(count_it->second.value, count_it->second.line));
    std::vector<std::pair<IntVec, double>> entries(count);
    std::vector<bool> have_z(count, false), have_p(count, false);
    for (const auto& [key, entry] : sec) {
      if (key == "count") continue;
      int idx = indexed_key(key, "z");
      if (idx >= 1 && idx <= count) {
        entries[idx - 1].first = parse_int_vector(entry.value, entry.line);
        have_z[idx - 1] = true;
        continue;
      }
      idx = indexed_key(key, "p");
      if (idx >= 1 && idx <= count) {
        entries[idx - 1].second = parse_double(entry.value, entry.line);
        have_p[idx - 1] = true;
        continue;
      }
      throw ConfigError(entry.line, "unknown key '" + key + "' in [kernel]");
    }
    for (int i = 0; i < count; ++i)
      if (!have_z[i] || !have_p[i])
        throw ConfigError(0, "kernel entry " + std::to_string(i + 1) +
                                 " needs both z and p");
    cfg.model.kernel = std::move(entries);
  }

  // [velocities]
  if (sections.count("velocities")) {
    if (cfg.model.type != "lattice")
      throw ConfigError(sections["velocities"].begin()->second.line,
                        "[velocities] applies to type = lattice only");
    auto& sec = sections["velocities"];
    const auto count_it = sec.find("count");
    if (count_it == sec.end())
      throw ConfigError(0, "[velocities] needs a count key");
    const int count = static_cast<int>(
        parse_long(count_it->second.value, count_it->second.line));
    VelocitySpec spec;
    spec.velocities.resize(count);
    std::vector<bool> have_v(count, false);
    for (const auto& [key, entry] : sec) {
      if (key == "count") continue;
      if (key == "uniform") {
        spec.uniform = parse_bool(entry.value, entry.line);
        continue;
      }
      const int idx = indexed_key(key, "v");
      if (idx >= 1 && idx <= count) {
        spec.velocities[idx - 1] = parse_int_vector(entry.value, entry.line);
        have_v[idx - 1] = true;
        continue;
      }
      // rate_i_j
      if (key.rfind("rate_", 0) == 0) {
        const auto parts = split(key.substr(5), '_');
        if (parts.size() == 2) {
          const long i = parse_long(parts[0], entry.line);
          const long j = parse_long(parts[1], entry.line);
          if (i >= 1 && i <= count && j >= 1 && j <= count && i != j) {
            spec.rates.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                    parse_double(entry.value, entry.line));
            continue;
          }
        }
      }
      throw ConfigError(entry.line,
                        "unknown key '" + key + "' in [velocities]");
    }
    for (int i = 0; i < count; ++i)
      if (!have_v[i])
        throw ConfigError(0, "velocity " + std::to_string(i + 1) + " missing");
    if (spec.uniform && !spec.rates.empty())
      throw ConfigError(0, "uniform = true excludes explicit rate_ keys");
    if (!spec.uniform && spec.rates.empty())
      throw ConfigError(0, "[velocities] needs uniform = true or rate_ keys");
    std::sort(spec.rates.begin(), spec.rates.end());
    cfg.model.velocities = std::move(spec);
  }

  // [grids]
  if (sections.count("grids")) {
    for (const auto& [key, entry] : sections["grids"]) {
      if (!kGridKeys.count(key))
        throw ConfigError(entry.line, "unknown key '" + key + "' in [grids]");
      cfg.grids[key] = parse_grid(entry.value, entry.line);
    }
  }

  // [simulation]
  if (sections.count("simulation")) {
    for (const auto& [key, entry] : sections["simulation"]) {
      if (!kSimKeys.count(key))
        throw ConfigError(entry.line,
                          "unknown key '" + key + "' in [simulation]");
      if (key == "t") cfg.simulation.t = parse_double(entry.value, entry.line);
      if (key == "n") cfg.simulation.n = parse_long(entry.value, entry.line);
      if (key == "seed")
        cfg.simulation.seed = parse_u64(entry.value, entry.line);
      if (key == "endpoints")
        cfg.simulation.endpoints = parse_bool(entry.value, entry.line);
      if (key == "fk_t")
        cfg.simulation.fk_t = parse_double(entry.value, entry.line);
      if (key == "fk_n")
        cfg.simulation.fk_n = parse_long(entry.value, entry.line);
    }
  }

  // [output]
  if (sections.count("output")) {
    for (const auto& [key, entry] : sections["output"]) {
      if (key != "dir")
        throw ConfigError(entry.line, "unknown key '" + key + "' in [output]");
      cfg.out_dir = entry.value;
    }
  }

  // [tolerances]
  if (sections.count("tolerances")) {
    for (const auto& [key, entry] : sections["tolerances"]) {
      if (!kToleranceKeys.count(key))
        throw ConfigError(entry.line,
                          "unknown key '" + key + "' in [tolerances]");
      cfg.tolerances[key] = parse_double(entry.value, entry.line);
    }
  }

  // Cross-field validation: building the models performs the full checks.
  if (cfg.is_continuum())
    cfg.build_continuum();
  else
    cfg.build_lattice();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<double> RunConfig::grid_or(const std::string& name,
                                       std::vector<double> fallback) const {
  const auto it = grids.find(name);
  return it == grids.end() ? fallback : it->second;
}

double RunConfig::tolerance_or(const std::string& name,
                               double fallback) const {
  const auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

LatticeModel RunConfig::build_lattice() const {
  if (model.type == "continuum")
    throw ConfigError(0, "model is continuum, lattice requested");
  try {
    if (model.type == "two_state_1d") {
      if (model.dimension != 1)
        throw ParameterError("two_state_1d is one-dimensional");
      if (model.kernel || model.velocities)
        throw ParameterError(
            "two_state_1d fixes its kernel and velocities; use type=lattice");
      return build_1d_two_state(model.lambda, model.kappa, model.gamma);
    }
    JumpKernel kernel =
        model.kernel ? JumpKernel::make(model.dimension, *model.kernel)
        : model.dimension == 1
            ? JumpKernel::nearest_neighbor_1d()
            : throw ParameterError("[kernel] required for dimension > 1");
    VelocityChain chain = [&] {
      if (!model.velocities) {
        if (model.dimension != 1)
          throw ParameterError("[velocities] required for dimension > 1");
        return VelocityChain::two_state_1d();
      }
      const VelocitySpec& spec = *model.velocities;
      if (spec.uniform) return VelocityChain::uniform(spec.velocities);
      const int n = static_cast<int>(spec.velocities.size());
      Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
      for (const auto& [i, j, r] : spec.rates) pi(i - 1, j - 1) = r;
      return VelocityChain::make(spec.velocities, std::move(pi));
    }();
    return LatticeModel::make(model.dimension, model.lambda, model.kappa,
                              model.gamma, std::move(kernel),
                              std::move(chain));
  } catch (const ParameterError& e) {
    throw ConfigError(0, e.what());
  }
}

ContinuumModel RunConfig::build_continuum() const {
  if (!is_continuum())
    throw ConfigError(0, "model is not continuum");
  try {
    return ContinuumModel::make(model.lambda, model.kappa, model.gamma,
                                model.field);
  } catch (const ParameterError& e) {
    throw ConfigError(0, e.what());
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[model]\n";
  out << "type = " << cfg.model.type << "\n";
  if (cfg.model.type == "lattice")
    out << "dimension = " << cfg.model.dimension << "\n";
  out << "lambda = " << format_double(cfg.model.lambda) << "\n";
  out << "kappa = " << format_double(cfg.model.kappa) << "\n";
  out << "gamma = " << format_double(cfg.model.gamma) << "\n";
  if (cfg.model.type == "continuum")
    out << "field = " << format_double(cfg.model.field) << "\n";
  if (cfg.model.alpha0 != 0.5)
    out << "alpha0 = " << format_double(cfg.model.alpha0) << "\n";

  if (cfg.model.kernel) {
    out << "\n[kernel]\n";
    out << "count = " << cfg.model.kernel->size() << "\n";
    for (std::size_t i = 0; i < cfg.model.kernel->size(); ++i) {
      const auto& [z, p] = (*cfg.model.kernel)[i];
      out << "z" << (i + 1) << " = ";
      for (std::size_t k = 0; k < z.size(); ++k)
        out << (k ? "," : "") << z[k];
      out << "\np" << (i + 1) << " = " << format_double(p) << "\n";
    }
  }
  if (cfg.model.velocities) {
    const auto& spec = *cfg.model.velocities;
    out << "\n[velocities]\n";
    out << "count = " << spec.velocities.size() << "\n";
    for (std::size_t i = 0; i < spec.velocities.size(); ++i) {
      out << "v" << (i + 1) << " = ";
      for (std::size_t k = 0; k < spec.velocities[i].size(); ++k)
        out << (k ? "," : "") << spec.velocities[i][k];
      out << "\n";
    }
    if (spec.uniform) out << "uniform = true\n";
    for (const auto& [i, j, r] : spec.rates)
      out << "rate_" << i << "_" << j << " = " << format_double(r) << "\n";
  }

  if (!cfg.grids.empty()) {
    out << "\n[grids]\n";
    for (const auto& [key, values] : cfg.grids) {
      out << key << " = ";
      for (std::size_t i = 0; i < values.size(); ++i)
        out << (i ? "," : "") << format_double(values[i]);
      out << "\n";
    }
  }

  out << "\n[simulation]\n";
  out << "t = " << format_double(cfg.simulation.t) << "\n";
  out << "n = " << cfg.simulation.n << "\n";
  out << "seed = " << cfg.simulation.seed << "\n";
  out << "endpoints = " << (cfg.simulation.endpoints ? "true" : "false")
      << "\n";
  out << "fk_t = " << format_double(cfg.simulation.fk_t) << "\n";
  out << "fk_n = " << cfg.simulation.fk_n << "\n";

  out << "\n[output]\n";
  out << "dir = " << cfg.out_dir << "\n";

  if (!cfg.tolerances.empty()) {
    out << "\n[tolerances]\n";
    for (const auto& [key, value] : cfg.tolerances)
      out << key << " = " << format_double(value) << "\n";
  }
  return out.str();
}

}  // namespace rtp
