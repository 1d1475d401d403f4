// Command-line front end: config validation, PSD tables, analytic
// thresholds/BEPs, Monte Carlo runs, and parameter sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biofet/biofet.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

biofet::LoadedConfig load(const std::string& config_path) {
  if (config_path.empty()) return biofet::LoadedConfig{};
  return biofet::load_config(read_file(config_path));
}

// Writes to the --out path when given, otherwise to stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"bioFET molecular-communication receiver simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  unsigned threads = 0;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--threads", threads, "worker threads, 0 = auto");

  auto* validate = app.add_subcommand(
      "validate", "parse the config and print all derived parameters");
  validate->add_option("config_file", config_path,
                       "configuration file (same as --config)");

  auto* psd = app.add_subcommand("psd", "tabulate the model PSD");
  double psd_cm = 0.0, psd_ci = 0.0;
  double psd_fmin = 1e-2, psd_fmax = 100.0;
  int psd_points = 200;
  psd->add_option("--cm", psd_cm, "information concentration, molecules/m^3")
      ->required();
  psd->add_option("--ci", psd_ci, "interferer concentration, molecules/m^3")
      ->required();
  psd->add_option("--fmin", psd_fmin, "lowest frequency, Hz");
  psd->add_option("--fmax", psd_fmax, "highest frequency, Hz");
  psd->add_option("--points", psd_points, "number of log-spaced points");

  auto* analytic = app.add_subcommand(
      "analytic", "print thresholds and closed-form bit error probabilities");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo BEP run");
  std::uint64_t sim_trials = 1000;
  std::uint64_t sim_seed = 1;
  simulate->add_option("--trials", sim_trials, "number of trials");
  simulate->add_option("--seed", sim_seed, "master seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo parameter sweep");
  std::string sweep_param;
  std::string sweep_values;
  std::uint64_t sweep_trials = 1000;
  std::uint64_t sweep_seed = 1;
  sweep_cmd
      ->add_option("--param", sweep_param,
                   "one of: gamma, eta, N, s1hz, bit_ratio")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required();
  sweep_cmd->add_option("--trials", sweep_trials, "trials per sweep point");
  sweep_cmd->add_option("--seed", sweep_seed, "master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    const biofet::LoadedConfig loaded = load(config_path);
    for (const auto& w : loaded.warnings)
      std::cerr << "warning: " << w << "\n";
    const biofet::SystemConfig& cfg = loaded.config;
    OutputTarget out(out_path);

    if (validate->parsed()) {
      const auto derived = biofet::derive_all(cfg);
      out.stream() << "# biofetsim " << biofet::version_string()
                   << " derived_params\n";
      out.stream() << "# config_fingerprint = "
                   << biofet::detail::hex64(biofet::config_fingerprint(cfg))
                   << "\n";
      for (const auto& [key, value] : biofet::derived_key_values(derived))
        out.stream() << key << " = " << fmt(value) << "\n";
    } else if (psd->parsed()) {
      const auto derived = biofet::derive_all(cfg);
      const auto ctx = biofet::PsdContext::from(cfg, derived);
      out.stream() << "# biofetsim " << biofet::version_string()
                   << " psd_table\n";
      out.stream() << "# c_m = " << fmt(psd_cm) << ", c_i = " << fmt(psd_ci)
                   << "\n";
      out.stream() << "f,S_b,S_f,S_total\n";
      const auto occ =
          biofet::make_occupancy(psd_cm, psd_ci, ctx.kinetics);
      for (int i = 0; i < psd_points; ++i) {
        const double t =
            psd_points == 1 ? 0.0
                            : static_cast<double>(i) / (psd_points - 1);
        const double f = psd_fmin * std::pow(psd_fmax / psd_fmin, t);
        const double sb = biofet::binding_noise_psd(f, occ, ctx);
        const double sf =
            biofet::one_over_f_psd(f, ctx.flicker_1hz, ctx.noise_exponent);
        out.stream() << fmt(f) << ',' << fmt(sb) << ',' << fmt(sf) << ','
                     << fmt(sb + sf) << "\n";
      }
    } else if (analytic->parsed()) {
      const auto derived = biofet::derive_all(cfg);
      const auto gamma_td = biofet::tdd_threshold(cfg, derived);
      const auto gamma_fd = biofet::fdd_threshold(cfg, derived);
      out.stream() << "gamma_td = " << fmt(gamma_td.value) << "\n";
      out.stream() << "gamma_fd = " << fmt(gamma_fd.value) << "\n";
      out.stream() << "tdd_bep = " << fmt(biofet::tdd_bep(cfg, derived))
                   << "\n";
      out.stream() << "fdd_bep = " << fmt(biofet::fdd_bep(cfg, derived))
                   << "\n";
    } else if (simulate->parsed()) {
      const auto report =
          biofet::monte_carlo_bep(cfg, sim_trials, sim_seed, threads);
      biofet::write_report(out.stream(), report);
    } else if (sweep_cmd->parsed()) {
      std::vector<double> values;
      std::stringstream ss(sweep_values);
      std::string item;
      while (std::getline(ss, item, ','))
        values.push_back(std::stod(item));
      const auto result =
          biofet::sweep(biofet::sweep_param_from_name(sweep_param), values,
                        cfg, sweep_trials, sweep_seed, threads);
      biofet::write_report(out.stream(), result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
