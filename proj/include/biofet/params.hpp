#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biofet/channel.hpp"
#include "biofet/config.hpp"
#include "biofet/constants.hpp"

namespace biofet {

// Everything computable from a SystemConfig before any trial runs.
struct DerivedParams {
  double k_d_m = 0.0;               // dissociation constant, 1/m^3
  double k_d_i = 0.0;
  double debye_len = 0.0;           // m
  double effective_charge = 0.0;    // C, per electron after screening
  double c_graphene = 0.0;          // double-layer capacitance, F
  double c_quantum = 0.0;           // F
  double c_gate = 0.0;              // series combination, F
  double gain_per_receptor = 0.0;   // zeta, A per bound receptor
  double diffusion = 0.0;           // Taylor-corrected D, m^2/s
  double channel_cross_section = 0.0; // m^2
  double transit_time = 0.0;        // t_D = x_R / u, s
  double peak_conc_bit0 = 0.0;      // molecules/m^3
  double peak_conc_bit1 = 0.0;
  double interferer_mean = 0.0;     // mu_ci, molecules/m^3
  double interferer_std = 0.0;      // sigma_ci
  double flicker_variance = 0.0;    // sigma_f^2, A^2
  double graphene_area_used = 0.0;  // m^2 (records the A_Gr assumption)
  double dispersion_length_used = 0.0; // m (records the l_ch assumption)
};

// lambda_D = sqrt(eps kappa_B T / (2 N_A q^2 c_ion)), c_ion in mol/m^3.
inline double debye_length(double relative_permittivity, double temperature,
                           double ionic_concentration) {
  namespace k = constants;
  const double eps = relative_permittivity * k::vacuum_permittivity;
  return std::sqrt(eps * k::boltzmann * temperature /
                   (2.0 * k::avogadro * k::elementary_charge *
                    k::elementary_charge * ionic_concentration));
}

// Screened charge of one electron in a ligand bound at distance r from the
// transducer surface.
inline double effective_charge(double receptor_length, double debye_len) {
  return constants::elementary_charge *
         std::exp(-receptor_length / debye_len);
}

// Taylor-dispersion-corrected diffusion coefficient for a rectangular
// channel. Reduces to d0 at zero flow.
inline double effective_diffusion(double d0, double flow, double height,
                                  double length) {
  const double h2 = height * height;
  const double l2 = length * length;
  const double corr = 8.5 * flow * flow * h2 * l2 /
                      (210.0 * d0 * d0 * (h2 + 2.4 * height * length + l2));
  return (1.0 + corr) * d0;
}

inline double series_capacitance(double c1, double c2) {
  return 1.0 / (1.0 / c1 + 1.0 / c2);
}

// zeta: output-current change per bound receptor.
inline double transduction_gain(double effective_charge_, double electrons,
                                double transconductance, double c_graphene,
                                double c_quantum) {
  const double c_gate = series_capacitance(c_graphene, c_quantum);
  return effective_charge_ * electrons * transconductance / c_gate;
}

// Variance of 1/f noise over [f_L, f_H], with the band below f_L counted at
// the constant level S_f(f_L). The beta = 1 logarithmic case is exact.
inline double one_over_f_variance(double s_1hz, double beta, double f_low,
                                  double f_high) {
  if (!(f_low > 0.0) || !(f_high >= f_low))
    throw std::domain_error("one_over_f_variance: need 0 < f_L <= f_H");
  const double floor_part = s_1hz * std::pow(f_low, 1.0 - beta);
  double band_part = 0.0;
  if (beta == 1.0) {
    band_part = s_1hz * std::log(f_high / f_low);
  } else {
    band_part = s_1hz *
                (std::pow(f_high, 1.0 - beta) - std::pow(f_low, 1.0 - beta)) /
                (1.0 - beta);
  }
  return floor_part + band_part;
}

inline DerivedParams derive_all(const SystemConfig& c) {
  DerivedParams d;
  d.k_d_m = c.k_off_m / c.k_on_m;
  d.k_d_i = c.k_off_i / c.k_on_i;

  d.debye_len = debye_length(c.relative_permittivity, c.temperature,
                             c.ionic_concentration);
  d.effective_charge = effective_charge(c.receptor_length, d.debye_len);

  d.graphene_area_used =
      c.graphene_area > 0.0 ? c.graphene_area
                            : c.graphene_width * c.graphene_width;
  const double eps = c.relative_permittivity * constants::vacuum_permittivity;
  d.c_graphene = d.graphene_area_used * eps / d.debye_len;
  d.c_quantum = c.quantum_capacitance_per_area * d.graphene_area_used;
  d.c_gate = series_capacitance(d.c_graphene, d.c_quantum);
  d.gain_per_receptor =
      transduction_gain(d.effective_charge, c.electrons_per_ligand,
                        c.transconductance, d.c_graphene, d.c_quantum);

  d.dispersion_length_used =
      c.dispersion_length > 0.0 ? c.dispersion_length : c.channel_width;
  d.diffusion = effective_diffusion(c.intrinsic_diffusion, c.flow_velocity,
                                    c.channel_height,
                                    d.dispersion_length_used);
  d.channel_cross_section = c.channel_height * c.channel_width;
  d.transit_time = c.receiver_position / c.flow_velocity;
  d.peak_conc_bit0 = peak_concentration(c.molecules_bit0,
                                        d.channel_cross_section, d.diffusion,
                                        d.transit_time);
  d.peak_conc_bit1 = peak_concentration(c.molecules_bit1,
                                        d.channel_cross_section, d.diffusion,
                                        d.transit_time);

  d.interferer_mean = c.interference_ratio * d.peak_conc_bit1;
  d.interferer_std = d.interferer_mean / c.interferer_mean_std_ratio;

  d.flicker_variance = one_over_f_variance(c.flicker_power_1hz,
                                           c.noise_exponent, c.flicker_f_low,
                                           c.flicker_f_high);
  return d;
}

// Flat key-value view for audit output and logs.
inline std::vector<std::pair<std::string, double>>
derived_key_values(const DerivedParams& d) {
  return {
      {"K_Dm", d.k_d_m},
      {"K_Di", d.k_d_i},
      {"lambda_D", d.debye_len},
      {"q_eff", d.effective_charge},
      {"C_Gr", d.c_graphene},
      {"C_Q", d.c_quantum},
      {"C_G", d.c_gate},
      {"zeta", d.gain_per_receptor},
      {"D", d.diffusion},
      {"A_ch", d.channel_cross_section},
      {"t_D", d.transit_time},
      {"c_m_0", d.peak_conc_bit0},
      {"c_m_1", d.peak_conc_bit1},
      {"mu_ci", d.interferer_mean},
      {"sigma_ci", d.interferer_std},
      {"sigma_f_sq", d.flicker_variance},
      {"A_Gr_used", d.graphene_area_used},
      {"l_ch_used", d.dispersion_length_used},
  };
}

} // namespace biofet
