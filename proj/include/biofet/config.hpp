#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace biofet {

// All tunable system parameters. Defaults reproduce the reference
// microfluidic graphene-bioFET receiver operating point.
//
// Units: SI throughout; concentrations are molecules/m^3 except
// ionic_concentration which is mol/m^3 (converted where needed).
struct SystemConfig {
  double temperature = 300.0;                   // T, K
  double channel_height = 5e-6;                 // h_ch, m
  double channel_width = 1e-5;                  // w_ch, m
  double flow_velocity = 1e-5;                  // u, m/s
  double receiver_position = 1e-3;              // x_R, m
  double ionic_concentration = 30.0;            // c_ion, mol/m^3
  double relative_permittivity = 80.0;          // eps_r
  double intrinsic_diffusion = 2e-11;           // D_0, m^2/s
  double k_on_m = 4e-17;                        // binding rate, m^3/s
  double k_on_i = 4e-17;                        // binding rate, m^3/s
  double k_off_m = 2.0;                         // unbinding rate, 1/s
  double k_off_i = 8.0;                         // unbinding rate, 1/s
  double electrons_per_ligand = 3.0;            // N_e
  double receptor_count = 120.0;                // N_r
  double receptor_length = 2e-9;                // r, m
  double transconductance = 1.9044e-4;          // g, A/V
  double graphene_width = 1e-5;                 // l_gr, m
  double quantum_capacitance_per_area = 2e-2;   // c_q, F/m^2
  double molecules_bit0 = 1000.0;               // N_m|0
  double molecules_bit1 = 5000.0;               // N_m|1
  int sample_count = 700;                       // N, even
  double sampling_period = 5e-3;                // dt, s
  double interference_ratio = 0.7;              // gamma = mu_ci / c_m|1
  double interferer_mean_std_ratio = 10.0;      // mu_ci / sigma_ci
  double flicker_power_1hz = 1e-23;             // S_f,1Hz, A^2/Hz
  double noise_exponent = 1.0;                  // beta
  double flicker_f_low = 1e-8;                  // f_L, Hz
  double flicker_f_high = 1e7;                  // f_H, Hz

  // Under-specified geometry, exposed for sensitivity studies. Negative
  // means "use the documented assumption": l_ch = w_ch, A_Gr = l_gr^2.
  double dispersion_length = -1.0;              // l_ch, m
  double graphene_area = -1.0;                  // A_Gr, m^2

  // Simulation knobs.
  double burn_in_factor = 10.0;                 // burn-in = factor * tau_c1
  double lowpass_cutoff = 0.8;                  // fraction of Nyquist
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  SystemConfig config;
  std::vector<std::string> warnings;
};

namespace detail {

struct FieldBinding {
  const char* key;
  double SystemConfig::* member;
};

// Keys mirror the parameter table; see README for the documented list.
inline const std::vector<FieldBinding>& field_bindings() {
  static const std::vector<FieldBinding> bindings = {
      {"T", &SystemConfig::temperature},
      {"h_ch", &SystemConfig::channel_height},
      {"w_ch", &SystemConfig::channel_width},
      {"u", &SystemConfig::flow_velocity},
      {"x_R", &SystemConfig::receiver_position},
      {"c_ion", &SystemConfig::ionic_concentration},
      {"eps_r", &SystemConfig::relative_permittivity},
      {"D_0", &SystemConfig::intrinsic_diffusion},
      {"k_plus_m", &SystemConfig::k_on_m},
      {"k_plus_i", &SystemConfig::k_on_i},
      {"k_minus_m", &SystemConfig::k_off_m},
      {"k_minus_i", &SystemConfig::k_off_i},
      {"N_e", &SystemConfig::electrons_per_ligand},
      {"N_r", &SystemConfig::receptor_count},
      {"r", &SystemConfig::receptor_length},
      {"g", &SystemConfig::transconductance},
      {"l_gr", &SystemConfig::graphene_width},
      {"c_q", &SystemConfig::quantum_capacitance_per_area},
      {"N_m_0", &SystemConfig::molecules_bit0},
      {"N_m_1", &SystemConfig::molecules_bit1},
      {"delta_t", &SystemConfig::sampling_period},
      {"gamma", &SystemConfig::interference_ratio},
      {"mu_sigma_ratio", &SystemConfig::interferer_mean_std_ratio},
      {"S_f_1Hz", &SystemConfig::flicker_power_1hz},
      {"beta", &SystemConfig::noise_exponent},
      {"f_L", &SystemConfig::flicker_f_low},
      {"f_H", &SystemConfig::flicker_f_high},
      {"l_ch", &SystemConfig::dispersion_length},
      {"A_Gr", &SystemConfig::graphene_area},
      {"burn_in_factor", &SystemConfig::burn_in_factor},
      {"lowpass_cutoff", &SystemConfig::lowpass_cutoff},
  };
  return bindings;
}

inline double parse_number(const std::string& text, int line_no) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": cannot parse value '" + text + "'");
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
    ++pos;
  if (pos != text.size())
    throw ConfigError("line " + std::to_string(line_no) +
                      ": trailing garbage after value '" + text + "'");
  return value;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace detail

// Field-level validation. Violations of hard invariants throw; soft
// diagnostics (empirical-range checks) are appended to `warnings`.
inline void validate_config(const SystemConfig& c,
                            std::vector<std::string>& warnings) {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("validation: ") + name +
                        " must be strictly positive");
  };
  require_positive(c.temperature, "T");
  require_positive(c.channel_height, "h_ch");
  require_positive(c.channel_width, "w_ch");
  require_positive(c.flow_velocity, "u");
  require_positive(c.receiver_position, "x_R");
  require_positive(c.ionic_concentration, "c_ion");
  require_positive(c.relative_permittivity, "eps_r");
  require_positive(c.intrinsic_diffusion, "D_0");
  require_positive(c.k_on_m, "k_plus_m");
  require_positive(c.k_on_i, "k_plus_i");
  require_positive(c.k_off_m, "k_minus_m");
  require_positive(c.k_off_i, "k_minus_i");
  require_positive(c.electrons_per_ligand, "N_e");
  require_positive(c.receptor_count, "N_r");
  require_positive(c.receptor_length, "r");
  require_positive(c.transconductance, "g");
  require_positive(c.graphene_width, "l_gr");
  require_positive(c.quantum_capacitance_per_area, "c_q");
  require_positive(c.molecules_bit0, "N_m_0");
  require_positive(c.molecules_bit1, "N_m_1");
  require_positive(c.sampling_period, "delta_t");
  require_positive(c.interference_ratio, "gamma");
  require_positive(c.interferer_mean_std_ratio, "mu_sigma_ratio");
  require_positive(c.flicker_power_1hz, "S_f_1Hz");
  require_positive(c.noise_exponent, "beta");
  require_positive(c.flicker_f_low, "f_L");
  require_positive(c.flicker_f_high, "f_H");
  require_positive(c.burn_in_factor, "burn_in_factor");

  if (c.sample_count <= 0 || c.sample_count % 2 != 0)
    throw ConfigError("validation: N must be a positive even integer, got " +
                      std::to_string(c.sample_count));
  if (!(c.molecules_bit0 < c.molecules_bit1))
    throw ConfigError("validation: N_m_0 must be smaller than N_m_1");
  if (!(c.flicker_f_low < c.flicker_f_high))
    throw ConfigError("validation: f_L must be smaller than f_H");
  if (!(c.lowpass_cutoff > 0.0 && c.lowpass_cutoff < 1.0))
    throw ConfigError("validation: lowpass_cutoff must lie in (0, 1)");
  if (c.noise_exponent < 0.8 || c.noise_exponent > 1.2)
    warnings.push_back("beta = " + std::to_string(c.noise_exponent) +
                       " is outside the typical range [0.8, 1.2]");
}

// Parses a `key = value` document ('#' starts a comment). Missing keys keep
// their defaults; unknown keys are an error. N is the only integer key.
inline LoadedConfig load_config(const std::string& text) {
  LoadedConfig out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line_no) +
                        ": empty key or value");
    if (key == "N") {
      const double v = detail::parse_number(value, line_no);
      if (v != std::floor(v))
        throw ConfigError("line " + std::to_string(line_no) +
                          ": N must be an integer");
      out.config.sample_count = static_cast<int>(v);
      continue;
    }
    bool matched = false;
    for (const auto& b : detail::field_bindings()) {
      if (key == b.key) {
        out.config.*(b.member) = detail::parse_number(value, line_no);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
  }
  validate_config(out.config, out.warnings);
  return out;
}

// Canonical serialization; also the basis of the config fingerprint.
inline std::string serialize_config(const SystemConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << std::scientific;
  for (const auto& b : detail::field_bindings())
    out << b.key << " = " << c.*(b.member) << "\n";
  out << "N = " << c.sample_count << "\n";
  return out.str();
}

inline std::uint64_t config_fingerprint(const SystemConfig& c) {
  const std::string s = serialize_config(c);
  std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

} // namespace biofet
