#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "biofet/channel.hpp"
#include "biofet/detection.hpp"
#include "biofet/estimation.hpp"
#include "biofet/kinetics.hpp"
#include "biofet/params.hpp"
#include "biofet/rng.hpp"
#include "biofet/spectral.hpp"
#include "biofet/version.hpp"

namespace biofet {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% score interval by default (z = 1.96).
inline WilsonInterval wilson_interval(std::uint64_t errors,
                                      std::uint64_t trials,
                                      double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double radius =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Containment of the point estimate is exact mathematically; enforce it
  // against floating-point residue at the boundaries.
  return {std::min(std::max(0.0, center - radius), p),
          std::max(std::min(1.0, center + radius), p)};
}

// Thresholds are fixed once per configuration, before any trial runs.
struct DetectionPlan {
  Threshold tdd{};
  Threshold fdd{};

  static DetectionPlan from(const SystemConfig& cfg, const DerivedParams& d) {
    return {tdd_threshold(cfg, d), fdd_threshold(cfg, d)};
  }
};

struct TrialRecord {
  int bit = 0;
  double c_i = 0.0;            // sampled interferer concentration
  double tdd_sample = 0.0;     // mid-window electrical output, A
  int tdd_bit = 0;
  double c_m_hat = 0.0;        // Whittle MLE of the information concentration
  double c_i_hat = 0.0;
  bool fdd_converged = false;
  int fdd_bit = 0;
  std::uint64_t seed = 0;
};

// One transmitted symbol, end to end: equilibrium receptor kinetics at the
// trial's concentrations, 1/f noise, transduction, then both detectors.
// The single TDD sample is the mid-window value; the FDD path removes the
// window mean to isolate the noise, low-pass filters it, and fits the
// Whittle likelihood to the periodogram.
inline TrialRecord run_trial(int bit, const SystemConfig& cfg,
                             const DerivedParams& d,
                             const DetectionPlan& plan, std::mt19937_64& rng,
                             std::uint64_t seed_used = 0) {
  const LigandKinetics kin = LigandKinetics::from_config(cfg);
  const PsdContext ctx = PsdContext::from(cfg, d);
  const int n = cfg.sample_count;
  const double dt = cfg.sampling_period;

  TrialRecord rec;
  rec.bit = bit;
  rec.seed = seed_used;

  const double c_m = bit ? d.peak_conc_bit1 : d.peak_conc_bit0;
  const auto dist =
      InterfererDistribution::from_moments(d.interferer_mean, d.interferer_std);
  rec.c_i = sample_interferer(dist, rng);

  const double burn_in =
      cfg.burn_in_factor * characteristic_times(c_m, rec.c_i, kin).tau_slow;
  const BoundCountSeries series = simulate_bound_counts(
      static_cast<int>(cfg.receptor_count), c_m, rec.c_i, kin, burn_in, n, dt,
      rng);
  const std::vector<double> flicker =
      synthesize_one_over_f(n, dt, cfg.flicker_power_1hz, cfg.noise_exponent,
                            rng);

  std::vector<double> output(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    output[static_cast<std::size_t>(k)] =
        flicker[static_cast<std::size_t>(k)] +
        d.gain_per_receptor * series.counts[static_cast<std::size_t>(k)];

  rec.tdd_sample = output[static_cast<std::size_t>(n / 2)];
  rec.tdd_bit = tdd_decide(rec.tdd_sample, plan.tdd);

  double mean = 0.0;
  for (double v : output) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> noise(output.size());
  for (std::size_t k = 0; k < output.size(); ++k) noise[k] = output[k] - mean;

  const std::vector<double> filtered = lowpass_filter(noise, cfg.lowpass_cutoff);
  const Periodogram p = periodogram(filtered, dt);

  const WhittleObjective nll = WhittleObjective::from_periodogram(p, ctx);
  const auto initial = coarse_grid_init(nll);
  const Estimate est = mle_estimate(nll, initial);
  rec.c_m_hat = est.c_m;
  rec.c_i_hat = est.c_i;
  rec.fdd_converged = est.converged;
  rec.fdd_bit = fdd_decide(est.c_m, plan.fdd);
  return rec;
}

struct BepReport {
  std::uint64_t trials = 0;
  std::uint64_t tdd_errors = 0;
  std::uint64_t fdd_errors = 0;
  std::uint64_t fdd_nonconverged = 0;
  double tdd_bep = 0.0;
  double fdd_bep = 0.0;
  WilsonInterval tdd_interval{};
  WilsonInterval fdd_interval{};
  double analytic_tdd_bep = 0.0;
  double analytic_fdd_bep = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t config_fp = 0;
};

// Monte Carlo BEP estimation with equiprobable bits. Per-trial seeds are
// derived from (master_seed, trial index), so the aggregate is independent
// of the number of worker threads and of execution order.
inline BepReport monte_carlo_bep(const SystemConfig& cfg, std::uint64_t trials,
                                 std::uint64_t master_seed,
                                 unsigned n_threads = 0) {
  const DerivedParams d = derive_all(cfg);
  const DetectionPlan plan = DetectionPlan::from(cfg, d);

  BepReport report;
  report.trials = trials;
  report.master_seed = master_seed;
  report.config_fp = config_fingerprint(cfg);
  report.analytic_tdd_bep = tdd_bep(cfg, d);
  report.analytic_fdd_bep = fdd_bep(cfg, d);

  if (n_threads == 0) {
    n_threads = std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
  }
  n_threads = std::min<unsigned>(
      n_threads, static_cast<unsigned>(std::max<std::uint64_t>(trials, 1)));

  struct Tally {
    std::uint64_t tdd_errors = 0;
    std::uint64_t fdd_errors = 0;
    std::uint64_t nonconverged = 0;
  };
  std::vector<Tally> tallies(n_threads);

  auto worker = [&](unsigned tid) {
    Tally& tally = tallies[tid];
    for (std::uint64_t i = tid; i < trials; i += n_threads) {
      const std::uint64_t seed = derive_seed(master_seed, i);
      std::mt19937_64 rng(seed);
      const int bit = static_cast<int>(rng() & 1u);
      const TrialRecord rec = run_trial(bit, cfg, d, plan, rng, seed);
      if (rec.tdd_bit != bit) ++tally.tdd_errors;
      if (rec.fdd_bit != bit) ++tally.fdd_errors;
      if (!rec.fdd_converged) ++tally.nonconverged;
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  for (const auto& t : tallies) {
    report.tdd_errors += t.tdd_errors;
    report.fdd_errors += t.fdd_errors;
    report.fdd_nonconverged += t.nonconverged;
  }
  report.tdd_bep =
      static_cast<double>(report.tdd_errors) / static_cast<double>(trials);
  report.fdd_bep =
      static_cast<double>(report.fdd_errors) / static_cast<double>(trials);
  report.tdd_interval = wilson_interval(report.tdd_errors, trials);
  report.fdd_interval = wilson_interval(report.fdd_errors, trials);
  return report;
}

enum class SweepParam { gamma, eta, n_samples, s1hz, bit_ratio };

inline const char* sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::gamma: return "gamma";
    case SweepParam::eta: return "eta";
    case SweepParam::n_samples: return "N";
    case SweepParam::s1hz: return "S_f_1Hz";
    case SweepParam::bit_ratio: return "bit_ratio";
  }
  return "?";
}

inline SweepParam sweep_param_from_name(const std::string& name) {
  if (name == "gamma") return SweepParam::gamma;
  if (name == "eta") return SweepParam::eta;
  if (name == "N") return SweepParam::n_samples;
  if (name == "s1hz" || name == "S_f_1Hz") return SweepParam::s1hz;
  if (name == "bit_ratio") return SweepParam::bit_ratio;
  throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

// Applies one sweep value to a copy of the base configuration.
//
// The similarity sweep (eta = K_Di / K_Dm) moves K_Di through the unbinding
// rate and scales the base mean interferer concentration by eta, so the
// interferer's relative occupancy c_i / K_Di — and with it every bound-state
// probability — is the same at every sweep point.
inline SystemConfig apply_sweep_value(const SystemConfig& base, SweepParam p,
                                      double value) {
  SystemConfig cfg = base;
  switch (p) {
    case SweepParam::gamma:
      cfg.interference_ratio = value;
      break;
    case SweepParam::eta: {
      const double kdm = base.k_off_m / base.k_on_m;
      cfg.k_off_i = value * kdm * base.k_on_i;
      cfg.interference_ratio = base.interference_ratio * value;
      break;
    }
    case SweepParam::n_samples: {
      const int n = static_cast<int>(value);
      if (static_cast<double>(n) != value)
        throw std::invalid_argument("sweep: N values must be integers");
      cfg.sample_count = n;
      break;
    }
    case SweepParam::s1hz:
      cfg.flicker_power_1hz = value;
      break;
    case SweepParam::bit_ratio:
      cfg.molecules_bit0 = value * base.molecules_bit1;
      break;
  }
  std::vector<std::string> warnings;
  validate_config(cfg, warnings);
  return cfg;
}

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  BepReport report{};
};

struct SweepResult {
  SweepParam param = SweepParam::gamma;
  std::vector<SweepPoint> points;
  std::uint64_t master_seed = 0;
  std::uint64_t base_config_fp = 0;
};

// Per-point failures (for example a singular Fisher matrix at eta = 1) are
// recorded and the sweep continues.
inline SweepResult sweep(SweepParam param, const std::vector<double>& values,
                         const SystemConfig& base, std::uint64_t trials,
                         std::uint64_t master_seed, unsigned n_threads = 0) {
  if (values.empty())
    throw std::invalid_argument("sweep: value list must be nonempty");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1]) && !(values[i] < values[i - 1]))
      throw std::invalid_argument("sweep: values must be strictly monotone");
  for (std::size_t i = 2; i < values.size(); ++i)
    if ((values[1] > values[0]) != (values[i] > values[i - 1]))
      throw std::invalid_argument("sweep: values must be strictly monotone");

  SweepResult result;
  result.param = param;
  result.master_seed = master_seed;
  result.base_config_fp = config_fingerprint(base);
  for (double v : values) {
    SweepPoint point;
    point.value = v;
    try {
      const SystemConfig cfg = apply_sweep_value(base, param, v);
      point.report = monte_carlo_bep(cfg, trials, master_seed, n_threads);
      point.ok = true;
    } catch (const std::exception& e) {
      point.ok = false;
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

// --- Report output ----------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

inline const char* bep_columns() {
  return "trials,tdd_errors,tdd_bep,tdd_lo,tdd_hi,fdd_errors,fdd_bep,"
         "fdd_lo,fdd_hi,analytic_tdd_bep,analytic_fdd_bep,fdd_nonconverged";
}

inline void write_bep_row(std::ostream& out, const BepReport& r) {
  out << r.trials << ',' << r.tdd_errors << ',' << fmt(r.tdd_bep) << ','
      << fmt(r.tdd_interval.lo) << ',' << fmt(r.tdd_interval.hi) << ','
      << r.fdd_errors << ',' << fmt(r.fdd_bep) << ',' << fmt(r.fdd_interval.lo)
      << ',' << fmt(r.fdd_interval.hi) << ',' << fmt(r.analytic_tdd_bep) << ','
      << fmt(r.analytic_fdd_bep) << ',' << r.fdd_nonconverged;
}

} // namespace detail

inline void write_report(std::ostream& out, const BepReport& r) {
  out << "# biofetsim " << version_string() << " bep_report\n";
  out << "# config_fingerprint = " << detail::hex64(r.config_fp) << "\n";
  out << "# master_seed = " << r.master_seed << "\n";
  out << detail::bep_columns() << "\n";
  detail::write_bep_row(out, r);
  out << "\n";
}

inline void write_report(std::ostream& out, const SweepResult& s) {
  out << "# biofetsim " << version_string() << " sweep\n";
  out << "# config_fingerprint = " << detail::hex64(s.base_config_fp) << "\n";
  out << "# master_seed = " << s.master_seed << "\n";
  out << "# param = " << sweep_param_name(s.param) << "\n";
  out << "value,status," << detail::bep_columns() << "\n";
  for (const auto& p : s.points) {
    out << detail::fmt(p.value) << ',' << (p.ok ? "ok" : "failed") << ',';
    if (p.ok) {
      detail::write_bep_row(out, p.report);
    } else {
      out << ",,,,,,,,,,,";
    }
    out << "\n";
  }
}

template <typename Report>
void write_report(const Report& r, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_report: cannot open '" + path + "'");
  write_report(out, r);
  if (!out.good())
    throw std::runtime_error("write_report: write failed for '" + path + "'");
}

// Minimal reader for the formats above; primarily for round-trip checks.
struct ReportTable {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline ReportTable read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_report: cannot open '" + path + "'");
  ReportTable table;
  std::string line;
  bool header_seen = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        auto value = line.substr(eq + 1);
        const auto trim = [](std::string s) {
          const auto b = s.find_first_not_of(" \t");
          const auto e = s.find_last_not_of(" \t");
          return b == std::string::npos ? std::string{}
                                        : s.substr(b, e - b + 1);
        };
        table.metadata[trim(key)] = trim(value);
      }
      continue;
    }
    if (!header_seen) {
      table.columns = split(line);
      header_seen = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

} // namespace biofet
