#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace biofet {

// Advected Gaussian pulse from an instantaneous release of molecule_count
// molecules spread uniformly over the channel cross-section.
struct ConcentrationProfile {
  double molecule_count;  // N_m
  double cross_section;   // A_ch, m^2
  double diffusion;       // effective D, m^2/s
  double flow;            // u, m/s
};

// c(x, t) = N_m / (A_ch sqrt(4 pi D t)) * exp(-(x - u t)^2 / (4 D t)).
inline double concentration_at(const ConcentrationProfile& p, double x,
                               double t) {
  if (!(t > 0.0))
    throw std::domain_error("concentration_at: t must be positive");
  const double spread = 4.0 * p.diffusion * t;
  const double dx = x - p.flow * t;
  return p.molecule_count /
         (p.cross_section * std::sqrt(std::numbers::pi * spread)) *
         std::exp(-dx * dx / spread);
}

// Pulse amplitude at its center x = u t_d; what the receiver sees at the
// transit time.
inline double peak_concentration(double molecule_count, double cross_section,
                                 double diffusion, double transit_time) {
  return molecule_count /
         (cross_section *
          std::sqrt(4.0 * std::numbers::pi * diffusion * transit_time));
}

// Log-normal interferer concentration, parameterized by the mean and
// standard deviation of the concentration itself. log_mu/log_sigma are the
// Gaussian parameters of ln c_i.
struct InterfererDistribution {
  double mean = 0.0;       // mu_ci
  double stddev = 0.0;     // sigma_ci
  double log_mu = 0.0;     // a
  double log_sigma = 0.0;  // b

  static InterfererDistribution from_moments(double mean, double stddev) {
    if (!(mean > 0.0) || stddev < 0.0)
      throw std::domain_error(
          "InterfererDistribution: mean must be positive, stddev >= 0");
    InterfererDistribution d;
    d.mean = mean;
    d.stddev = stddev;
    const double ratio2 = (stddev * stddev) / (mean * mean);
    d.log_sigma = std::sqrt(std::log1p(ratio2));
    d.log_mu = std::log(mean) - 0.5 * std::log1p(ratio2);
    return d;
  }
};

template <typename Rng>
double sample_interferer(const InterfererDistribution& d, Rng& rng) {
  if (d.log_sigma == 0.0) return d.mean;
  std::normal_distribution<double> gauss(d.log_mu, d.log_sigma);
  return std::exp(gauss(rng));
}

} // namespace biofet
