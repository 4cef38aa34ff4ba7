// runtumble command line: analyze / ldp / simulate / verify on a model
// config, emitting CSV and JSON artifacts into a single output directory.

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "runtumble/config.hpp"
#include "runtumble/errors.hpp"
#include "runtumble/reports.hpp"
#include "runtumble/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

struct CliOptions {
  std::string config_path;
  std::string out_dir;  // overrides [output] dir when set
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

rtp::RunConfig load(const CliOptions& cli) {
  rtp::RunConfig cfg = rtp::load_config(cli.config_path);
  if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
  if (cli.seed) cfg.simulation.seed = *cli.seed;
  return cfg;
}

fs::path prepare_out_dir(const rtp::RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_file(path, j.dump(2) + "\n");
}

int cmd_analyze(const CliOptions& cli) {
  const rtp::RunConfig cfg = load(cli);
  const fs::path dir = prepare_out_dir(cfg);
  const rtp::AnalyzeReport report = rtp::run_analyze(cfg);

  std::string csv = "q,z_re,z_im,S_re,S_im,closed_form_residual\n";
  for (const auto& row : report.transform_rows)
    csv += fmt(row.q) + "," + fmt(row.z.real()) + "," + fmt(row.z.imag()) +
           "," + fmt(row.value.real()) + "," + fmt(row.value.imag()) + "," +
           fmt(row.residual) + "\n";
  write_file(dir / "fourier_laplace.csv", csv);

  std::string scal = "epsilon,deviation\n";
  for (const auto& p : report.scaling.points)
    scal += fmt(p.epsilon) + "," + fmt(p.deviation) + "\n";
  write_file(dir / "scaling_diagnostic.csv", scal);

  ordered_json j;
  j["sigma2"] = report.sigma2;
  j["scaling_q"] = report.scaling_q;
  j["scaling_z"] = report.scaling_z;
  j["scaling_fitted_order"] = report.scaling.fitted_order;
  write_json(dir / "diffusion.json", j);

  std::cout << "analyze: sigma2 = " << fmt(report.sigma2)
            << ", scaling order = " << fmt(report.scaling.fitted_order)
            << ", wrote " << dir.string() << "\n";
  return 0;
}

int cmd_ldp(const CliOptions& cli) {
  const rtp::RunConfig cfg = load(cli);
  const fs::path dir = prepare_out_dir(cfg);
  const rtp::LdpReport report = rtp::run_ldp(cfg);
  const bool multi_axis = !report.free_energy.empty() &&
                          report.free_energy.back().axis > 0;

  std::string fe = multi_axis ? "axis,alpha,F_closed,F_spectral,F_variational\n"
                              : "alpha,F_closed,F_spectral,F_variational\n";
  auto opt_fmt = [](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
  };
  for (const auto& row : report.free_energy) {
    if (multi_axis) fe += std::to_string(row.axis) + ",";
    fe += fmt(row.alpha) + "," + opt_fmt(row.closed) + "," +
          opt_fmt(row.spectral) + "," + opt_fmt(row.variational) + "\n";
  }
  write_file(dir / "free_energy.csv", fe);

  std::string rate = multi_axis ? "axis,x,I,alpha_star\n" : "x,I,alpha_star\n";
  for (const auto& row : report.rate) {
    if (multi_axis) rate += std::to_string(row.axis) + ",";
    rate += fmt(row.x) + "," + fmt(row.rate) + "," + fmt(row.alpha_star) +
            "\n";
  }
  write_file(dir / "rate_function.csv", rate);

  ordered_json j;
  j["max_closed_vs_spectral"] = report.max_closed_vs_spectral;
  j["max_spectral_vs_variational"] = report.max_spectral_vs_variational;
  j["second_deriv_origin"] = report.second_deriv_origin;
  if (report.sigma2_closed) j["sigma2"] = *report.sigma2_closed;
  if (report.asymptotic_velocity)
    j["asymptotic_velocity"] = *report.asymptotic_velocity;
  write_json(dir / "verify.json", j);

  std::cout << "ldp: max |F_closed - F_spectral| = "
            << fmt(report.max_closed_vs_spectral)
            << ", max |F_spectral - F_variational| = "
            << fmt(report.max_spectral_vs_variational) << ", wrote "
            << dir.string() << "\n";
  return 0;
}

int cmd_simulate(const CliOptions& cli) {
  const rtp::RunConfig cfg = load(cli);
  const fs::path dir = prepare_out_dir(cfg);
  const rtp::SimReport report = rtp::run_simulate(cfg, cli.threads);

  ordered_json j;
  j["horizon"] = report.horizon;
  j["replicas"] = report.replicas;
  j["seed"] = report.seed;
  j["sigma2"] = ordered_json::array();
  for (std::size_t k = 0; k < report.sigma2.size(); ++k) {
    ordered_json e;
    e["value"] = report.sigma2[k].value;
    e["stderr"] = report.sigma2[k].stderr_;
    if (report.sigma2_analytic[k]) e["analytic"] = *report.sigma2_analytic[k];
    j["sigma2"].push_back(e);
  }
  j["velocity"] = ordered_json::array();
  for (const auto& v : report.velocity)
    j["velocity"].push_back({{"value", v.value}, {"stderr", v.stderr_}});
  j["clt"] = {{"ks", report.clt.ks},
              {"critical", report.clt.critical},
              {"pass", report.clt.pass}};
  j["scgf"] = ordered_json::array();
  for (std::size_t i = 0; i < report.scgf.size(); ++i) {
    const auto& p = report.scgf[i];
    ordered_json e;
    e["alpha"] = p.alpha;
    e["estimate"] = p.estimate;
    e["stderr"] = p.stderr_;
    e["estimate_long"] = p.estimate_long;
    e["stderr_long"] = p.stderr_long;
    e["bias_bound"] = p.bias_bound;
    e["ess"] = p.ess;
    e["reliable"] = p.reliable;
    if (i < report.scgf_analytic.size() && report.scgf_analytic[i])
      e["analytic"] = *report.scgf_analytic[i];
    j["scgf"].push_back(e);
  }
  write_json(dir / "sim_stats.json", j);

  if (!report.lattice_endpoints.empty()) {
    const std::size_t d = report.lattice_endpoints.front().x.size();
    std::string csv = "replica";
    for (std::size_t k = 1; k <= d; ++k)
      csv += ",x_" + std::to_string(k);
    csv += ",v_index\n";
    for (std::size_t i = 0; i < report.lattice_endpoints.size(); ++i) {
      csv += std::to_string(i);
      for (long long x : report.lattice_endpoints[i].x)
        csv += "," + std::to_string(x);
      csv += "," + std::to_string(report.lattice_endpoints[i].velocity) + "\n";
    }
    write_file(dir / "endpoints.csv", csv);
  } else if (!report.continuum_endpoints.empty()) {
    std::string csv = "replica,x_1,v_index\n";
    for (std::size_t i = 0; i < report.continuum_endpoints.size(); ++i)
      csv += std::to_string(i) + "," +
             fmt(report.continuum_endpoints[i].x) + "," +
             std::to_string(report.continuum_endpoints[i].velocity) + "\n";
    write_file(dir / "endpoints.csv", csv);
  }

  std::cout << "simulate: sigma2_hat = " << fmt(report.sigma2[0].value)
            << " +- " << fmt(report.sigma2[0].stderr_) << ", CLT "
            << (report.clt.pass ? "pass" : "fail") << ", wrote "
            << dir.string() << "\n";
  return 0;
}

int cmd_verify(const CliOptions& cli) {
  const rtp::RunConfig cfg = load(cli);
  const fs::path dir = prepare_out_dir(cfg);
  rtp::VerifyOptions options = rtp::verify_options(cfg);
  options.threads = cli.threads;
  const rtp::VerifyReport report = rtp::run_verification(options, &cfg);

  ordered_json j;
  j["pass"] = report.pass;
  j["criteria"] = ordered_json::array();
  for (const auto& c : report.criteria) {
    ordered_json e;
    e["id"] = c.id;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["discrepancy"] = c.discrepancy;
    e["tolerance"] = c.tolerance;
    e["seconds"] = c.seconds;
    if (c.time_limit) e["time_limit"] = *c.time_limit;
    e["detail"] = c.detail;
    j["criteria"].push_back(e);
  }
  j["per_alpha"] = ordered_json::array();
  for (const auto& rec : report.per_alpha) {
    ordered_json e;
    e["alpha"] = rec.alpha;
    if (rec.f_closed) e["f_closed"] = *rec.f_closed;
    if (rec.f_spectral) e["f_spectral"] = *rec.f_spectral;
    if (rec.f_variational) e["f_variational"] = *rec.f_variational;
    if (rec.f_feynman_kac) e["f_feynman_kac"] = *rec.f_feynman_kac;
    if (rec.fk_stderr) e["stderr"] = *rec.fk_stderr;
    e["max_discrepancy"] = rec.max_discrepancy;
    j["per_alpha"].push_back(e);
  }
  write_json(dir / "report.json", j);

  for (const auto& c : report.criteria)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name
              << ": " << c.detail << " (" << fmt(c.seconds) << " s)\n";
  std::cout << (report.pass ? "verify: all criteria passed"
                            : "verify: FAILURES above")
            << ", wrote " << (dir / "report.json").string() << "\n";
  return report.pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact transport and large-deviation toolkit for "
               "run-and-tumble particles"};
  app.require_subcommand(1);

  CliOptions cli;
  app.add_option("--config", cli.config_path, "model/run config file")
      ->required();
  app.add_option("--out", cli.out_dir, "output directory (overrides config)");
  app.add_option("--seed", cli.seed, "seed override");
  app.add_option("--threads", cli.threads, "worker threads for simulations")
      ->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand(
      "analyze", "Fourier-Laplace transforms and diffusion constants");
  auto* ldp = app.add_subcommand(
      "ldp", "free energies and rate functions (closed/spectral/variational)");
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo moments, CLT check and empirical SCGF");
  auto* verify = app.add_subcommand(
      "verify", "full cross-verification matrix; exit 0 iff all pass");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(cli);
    if (ldp->parsed()) return cmd_ldp(cli);
    if (simulate->parsed()) return cmd_simulate(cli);
    if (verify->parsed()) return cmd_verify(cli);
  } catch (const rtp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rtp::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rtp::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rtp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
