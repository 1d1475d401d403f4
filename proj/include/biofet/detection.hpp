#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "biofet/channel.hpp"
#include "biofet/estimation.hpp"
#include "biofet/params.hpp"
#include "biofet/quadrature.hpp"

namespace biofet {

struct SignalStats {
  double mean = 0.0;      // A (TDD) or molecules/m^3 (FDD)
  double variance = 0.0;
};

// Log-density of N(x; mu, sigma^2); thresholds are verified through the
// density-equality property in log form.
inline double gaussian_log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         0.5 * d * d / variance;
}

enum class ThresholdMode { two_gaussian, equal_variance_midpoint };

struct Threshold {
  double value = 0.0;
  ThresholdMode mode = ThresholdMode::two_gaussian;
};

namespace detail {

// ML crossing point of two Gaussian densities with mu1 > mu0: the interior
// root of the log-likelihood-ratio quadratic. Near-equal variances fall
// back to the midpoint (the closed form divides by var1 - var0);
// fallback_tol must sit above the noise floor of the variance inputs.
inline Threshold two_gaussian_threshold(double mu0, double var0, double mu1,
                                        double var1,
                                        double fallback_tol = 1e-12) {
  if (!(mu1 > mu0))
    throw std::invalid_argument("threshold: requires mu1 > mu0");
  if (!(var0 > 0.0) || !(var1 > 0.0))
    throw std::invalid_argument("threshold: variances must be positive");

  if (std::abs(var1 - var0) < fallback_tol * std::max(var0, var1))
    return {0.5 * (mu0 + mu1), ThresholdMode::equal_variance_midpoint};

  const double sd0 = std::sqrt(var0);
  const double sd1 = std::sqrt(var1);
  const double diff = mu1 - mu0;
  const double disc = diff * diff + (var1 - var0) * std::log(var1 / var0);
  if (!(disc >= 0.0))
    throw std::runtime_error("threshold: negative discriminant");
  const double root = sd0 * sd1 * std::sqrt(disc);
  const double base = var1 * mu0 - var0 * mu1;
  const double denom = var1 - var0;

  const double plus = (base + root) / denom;
  const double minus = (base - root) / denom;
  double gamma;
  if (plus > mu0 && plus < mu1)
    gamma = plus;
  else if (minus > mu0 && minus < mu1)
    gamma = minus;
  else
    throw std::runtime_error(
        "threshold: no root between the means; symbols not separable");

  const double l0 = gaussian_log_density(gamma, mu0, var0);
  const double l1 = gaussian_log_density(gamma, mu1, var1);
  if (std::abs(l0 - l1) > 1e-9 * std::max(1.0, std::abs(l0)))
    throw std::runtime_error("threshold: density equality check failed");
  return {gamma, ThresholdMode::two_gaussian};
}

} // namespace detail

// --- Time-domain detection -------------------------------------------------

struct TddSignalStats {
  SignalStats marginal;         // interferer marginalized out (truth model)
  SignalStats interference_free; // what the receiver assumes for thresholds
};

// Output-current statistics for transmitted bit s. The marginal stats
// integrate the bound-state probability over the log-normal interferer
// density (law of total expectation/variance), by adaptive quadrature in
// log-space truncated at +-8 log-std. Both variances include the 1/f term.
inline TddSignalStats tdd_signal_stats(int bit, const SystemConfig& cfg,
                                       const DerivedParams& d) {
  const double c_m = bit ? d.peak_conc_bit1 : d.peak_conc_bit0;
  const double zeta = d.gain_per_receptor;
  const double n_r = cfg.receptor_count;
  const double xm = c_m / d.k_d_m;

  TddSignalStats out;
  const double p_free = xm / (1.0 + xm);
  out.interference_free.mean = zeta * n_r * p_free;
  out.interference_free.variance =
      zeta * zeta * n_r * p_free * (1.0 - p_free) + d.flicker_variance;

  auto p_bound = [&](double c_i) {
    const double xi = c_i / d.k_d_i;
    return (xm + xi) / (1.0 + xm + xi);
  };

  double e_p, e_p1p, e_p2;
  if (d.interferer_mean <= 0.0 || d.interferer_std <= 0.0) {
    const double p = p_bound(std::max(d.interferer_mean, 0.0));
    e_p = p;
    e_p1p = p * (1.0 - p);
    e_p2 = p * p;
  } else {
    const auto dist = InterfererDistribution::from_moments(
        d.interferer_mean, d.interferer_std);
    const double a = dist.log_mu;
    const double b = dist.log_sigma;
    const double norm = 1.0 / (b * std::sqrt(2.0 * std::numbers::pi));
    auto weighted = [&](auto&& g) {
      return integrate(
          [&](double y) {
            const double z = (y - a) / b;
            return g(p_bound(std::exp(y))) * norm * std::exp(-0.5 * z * z);
          },
          a - 8.0 * b, a + 8.0 * b, 1e-10);
    };
    e_p = weighted([](double p) { return p; });
    e_p1p = weighted([](double p) { return p * (1.0 - p); });
    e_p2 = weighted([](double p) { return p * p; });
  }

  out.marginal.mean = zeta * n_r * e_p;
  out.marginal.variance = zeta * zeta * (n_r * e_p1p + n_r * n_r * e_p2) -
                          out.marginal.mean * out.marginal.mean +
                          d.flicker_variance;
  return out;
}

inline Threshold tdd_threshold(double mu0, double var0, double mu1,
                               double var1) {
  return detail::two_gaussian_threshold(mu0, var0, mu1, var1);
}

inline Threshold tdd_threshold(const SystemConfig& cfg,
                               const DerivedParams& d) {
  const auto s0 = tdd_signal_stats(0, cfg, d).interference_free;
  const auto s1 = tdd_signal_stats(1, cfg, d).interference_free;
  return tdd_threshold(s0.mean, s0.variance, s1.mean, s1.variance);
}

inline int tdd_decide(double sample, const Threshold& t) {
  return sample > t.value ? 1 : 0;
}

// Analytic TDD bit error probability: the threshold comes from the
// interference-free statistics while the error integrals use the
// marginalized ones; the mismatch between the two is the detector's
// actual handicap under interference.
inline double tdd_bep(const SystemConfig& cfg, const DerivedParams& d) {
  const auto stats0 = tdd_signal_stats(0, cfg, d);
  const auto stats1 = tdd_signal_stats(1, cfg, d);
  const Threshold t = tdd_threshold(
      stats0.interference_free.mean, stats0.interference_free.variance,
      stats1.interference_free.mean, stats1.interference_free.variance);
  const double term0 =
      0.25 * std::erfc((t.value - stats0.marginal.mean) /
                       std::sqrt(2.0 * stats0.marginal.variance));
  const double term1 =
      0.25 * std::erfc((stats1.marginal.mean - t.value) /
                       std::sqrt(2.0 * stats1.marginal.variance));
  return term0 + term1;
}

// --- Frequency-domain detection ---------------------------------------------

// Decision threshold on the estimated information concentration. The
// receiver assumes no interference, so the variances come from the
// single-ligand Fisher information at the two peak concentrations.
inline Threshold fdd_threshold(const SystemConfig& cfg,
                               const DerivedParams& d) {
  const auto [var0, var1] =
      estimator_variances(cfg, d, FisherMode::single_ligand);
  // The variances carry adaptive-quadrature noise of ~1e-10 relative, so
  // the equal-variance fallback fires below 1e-9 instead of 1e-12.
  return detail::two_gaussian_threshold(d.peak_conc_bit0, var0,
                                        d.peak_conc_bit1, var1, 1e-9);
}

inline int fdd_decide(double c_m_estimate, const Threshold& t) {
  return c_m_estimate > t.value ? 1 : 0;
}

// Asymptotic FDD bit error probability: gamma_fd from the single-ligand
// (receiver-side) variances, error integrals from the full two-ligand
// Fisher information evaluated at (c_m|s, mu_ci).
inline double fdd_bep(const SystemConfig& cfg, const DerivedParams& d) {
  const Threshold t = fdd_threshold(cfg, d);
  const auto [var0, var1] = estimator_variances(cfg, d, FisherMode::full);
  const double term0 = 0.25 * std::erfc((t.value - d.peak_conc_bit0) /
                                        std::sqrt(2.0 * var0));
  const double term1 = 0.25 * std::erfc((d.peak_conc_bit1 - t.value) /
                                        std::sqrt(2.0 * var1));
  return term0 + term1;
}

} // namespace biofet
