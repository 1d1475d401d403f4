#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "biofet/config.hpp"

namespace biofet {

// Rate constants of the two competing reversible reactions
//   R + M <-> RM   (information ligand)
//   R + I <-> RI   (interferer ligand)
struct LigandKinetics {
  double k_on_m;   // m^3/s
  double k_off_m;  // 1/s
  double k_on_i;   // m^3/s
  double k_off_i;  // 1/s

  static LigandKinetics from_config(const SystemConfig& c) {
    return {c.k_on_m, c.k_off_m, c.k_on_i, c.k_off_i};
  }
  double k_d_m() const { return k_off_m / k_on_m; }
  double k_d_i() const { return k_off_i / k_on_i; }
};

// Probability that one receptor is bound (either ligand) at equilibrium.
inline double bound_probability(double c_m, double c_i, double k_d_m,
                                double k_d_i) {
  const double xm = c_m / k_d_m;
  const double xi = c_i / k_d_i;
  return (xm + xi) / (1.0 + xm + xi);
}

struct EquilibriumProbs {
  double p_rm;  // bound with information ligand
  double p_ri;  // bound with interferer
  double p_r;   // unbound; computed as 1 - (p_rm + p_ri)

  double bound() const { return p_rm + p_ri; }
};

inline EquilibriumProbs equilibrium_probabilities(double c_m, double c_i,
                                                  const LigandKinetics& k) {
  const double xm = c_m / k.k_d_m();
  const double xi = c_i / k.k_d_i();
  const double denom = 1.0 + xm + xi;
  EquilibriumProbs p;
  p.p_rm = xm / denom;
  p.p_ri = xi / denom;
  p.p_r = 1.0 - (p.p_rm + p.p_ri);
  return p;
}

// Linearized fluctuation dynamics of the reduced state vector
// [dp_RM, dp_RI] around equilibrium, d(dp')/dt = Omega dp'. The full state
// is recovered through the reduction matrix R (p_R = 1 - p_RM - p_RI).
struct OccupancyModel {
  double c_m = 0.0;
  double c_i = 0.0;
  EquilibriumProbs probs{};
  std::array<std::array<double, 2>, 2> omega{};      // 1/s
  std::array<std::array<double, 2>, 2> covariance{}; // Gamma, dimensionless

  // p = R p' + const; charge vector is z = N_e * [1, 1, 0].
  static constexpr std::array<std::array<int, 2>, 3> reduction{
      {{1, 0}, {0, 1}, {-1, -1}}};
};

inline std::array<std::array<double, 2>, 2>
omega_matrix(double c_m, double c_i, const LigandKinetics& k) {
  return {{{-k.k_on_m * c_m - k.k_off_m, -k.k_on_m * c_m},
           {-k.k_on_i * c_i, -k.k_on_i * c_i - k.k_off_i}}};
}

inline OccupancyModel make_occupancy(double c_m, double c_i,
                                     const LigandKinetics& k) {
  if (c_m < 0.0 || c_i < 0.0)
    throw std::domain_error("make_occupancy: concentrations must be >= 0");
  OccupancyModel m;
  m.c_m = c_m;
  m.c_i = c_i;
  m.probs = equilibrium_probabilities(c_m, c_i, k);
  m.omega = omega_matrix(c_m, c_i, k);
  const double prm = m.probs.p_rm;
  const double pri = m.probs.p_ri;
  m.covariance = {{{prm * (1.0 - prm), -prm * pri},
                   {-prm * pri, pri * (1.0 - pri)}}};
  return m;
}

struct CharacteristicTimes {
  double tau_slow;  // tau_c1 >= tau_c2
  double tau_fast;

  double f_slow() const { return 1.0 / (2.0 * std::numbers::pi * tau_slow); }
  double f_fast() const { return 1.0 / (2.0 * std::numbers::pi * tau_fast); }
};

// Relaxation times tau_c = -1/lambda from the closed-form eigenvalues of
// Omega, written in terms of the per-reaction rates
// 1/tau_m = c_m k+_m + k-_m and 1/tau_i = c_i k+_i + k-_i. The slow rate is
// recovered from the eigenvalue product (a cancellation-free sum of
// positive terms) rather than from the difference of near-equal roots.
inline CharacteristicTimes characteristic_times(double c_m, double c_i,
                                                const LigandKinetics& k) {
  const double rate_m = c_m * k.k_on_m + k.k_off_m;
  const double rate_i = c_i * k.k_on_i + k.k_off_i;
  const double cross = 4.0 * (k.k_on_m * c_m) * (k.k_on_i * c_i);
  const double root =
      std::sqrt((rate_m - rate_i) * (rate_m - rate_i) + cross);
  const double rate_fast = 0.5 * (rate_m + rate_i + root);
  const double product = (k.k_on_m * c_m) * k.k_off_i +
                         k.k_off_m * (k.k_on_i * c_i) +
                         k.k_off_m * k.k_off_i;  // rate_slow * rate_fast
  return {rate_fast / product, 1.0 / rate_fast};
}

inline std::pair<double, double> bound_count_stats(double p_b,
                                                   double n_receptors) {
  return {n_receptors * p_b, n_receptors * p_b * (1.0 - p_b)};
}

// Bound-receptor count sampled on a uniform grid after burn-in.
struct BoundCountSeries {
  std::vector<int> counts;
  double dt = 0.0;
  double burn_in = 0.0;
};

inline void write_series(std::ostream& out, const BoundCountSeries& s) {
  out.precision(17);
  for (std::size_t i = 0; i < s.counts.size(); ++i)
    out << s.burn_in + (static_cast<double>(i) + 1.0) * s.dt << '\t'
        << s.counts[i] << '\n';
}

// Exact event-driven simulation of n_receptors independent three-state
// receptors, tracked as aggregate counts (n_RM, n_RI). The initial state is
// a draw from the equilibrium distribution, so burn-in only has to wash out
// sampling transients. Records floor-sampled counts every dt after burn_in.
template <typename Rng>
BoundCountSeries simulate_bound_counts(int n_receptors, double c_m,
                                       double c_i, const LigandKinetics& kin,
                                       double burn_in, int n_samples,
                                       double dt, Rng& rng) {
  if (burn_in < 0.0) throw std::domain_error("simulate_bound_counts: burn_in < 0");
  if (n_samples <= 0 || n_samples % 2 != 0)
    throw std::domain_error("simulate_bound_counts: N must be positive and even");
  if (!(dt > 0.0)) throw std::domain_error("simulate_bound_counts: dt <= 0");

  const EquilibriumProbs eq = equilibrium_probabilities(c_m, c_i, kin);

  std::binomial_distribution<int> bin_m(n_receptors, eq.p_rm);
  int n_rm = bin_m(rng);
  int n_ri = 0;
  if (n_receptors > n_rm && eq.p_rm < 1.0) {
    std::binomial_distribution<int> bin_i(n_receptors - n_rm,
                                          eq.p_ri / (1.0 - eq.p_rm));
    n_ri = bin_i(rng);
  }

  const double bind_m = kin.k_on_m * c_m;
  const double bind_i = kin.k_on_i * c_i;

  BoundCountSeries series;
  series.dt = dt;
  series.burn_in = burn_in;
  series.counts.reserve(static_cast<std::size_t>(n_samples));

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  double t = 0.0;
  double next_sample = burn_in + dt;
  int recorded = 0;
  while (recorded < n_samples) {
    const int n_r = n_receptors - n_rm - n_ri;
    const double r1 = bind_m * n_r;
    const double r2 = kin.k_off_m * n_rm;
    const double r3 = bind_i * n_r;
    const double r4 = kin.k_off_i * n_ri;
    const double total = r1 + r2 + r3 + r4;

    double t_event = total > 0.0 ? t + expo(rng) / total
                                 : std::numeric_limits<double>::infinity();
    while (recorded < n_samples && next_sample <= t_event) {
      series.counts.push_back(n_rm + n_ri);
      ++recorded;
      next_sample += dt;
    }
    if (recorded >= n_samples) break;

    const double pick = uni(rng) * total;
    if (pick < r1)
      ++n_rm;
    else if (pick < r1 + r2)
      --n_rm;
    else if (pick < r1 + r2 + r3)
      ++n_ri;
    else
      --n_ri;
    t = t_event;
  }
  return series;
}

} // namespace biofet
