#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "biofet/config.hpp"
#include "biofet/fft.hpp"
#include "biofet/kinetics.hpp"
#include "biofet/params.hpp"

namespace biofet {

// Everything the PSD model needs besides the concentration pair.
struct PsdContext {
  LigandKinetics kinetics{};
  double zeta = 0.0;          // A per bound receptor
  double n_receptors = 0.0;
  double flicker_1hz = 0.0;   // S_f,1Hz
  double noise_exponent = 1.0;

  static PsdContext from(const SystemConfig& c, const DerivedParams& d) {
    return {LigandKinetics::from_config(c), d.gain_per_receptor,
            c.receptor_count, c.flicker_power_1hz, c.noise_exponent};
  }
};

// Single-sided binding-noise PSD,
//   S_b(f) = 4 N_r zeta^2 z'^T Gamma (Re{(j 2 pi f I - Omega)^-1})^T z',
// where z' = z^T R / N_e = [1, 1] after folding the per-electron charge into
// zeta. The 2x2 complex inverse is evaluated in closed form.
inline double binding_noise_psd(double f, const OccupancyModel& occ,
                                const PsdContext& ctx) {
  if (!(f > 0.0))
    throw std::domain_error("binding_noise_psd: f must be positive");
  using cplx = std::complex<double>;
  const double w = 2.0 * std::numbers::pi * f;
  const cplx jw(0.0, w);

  // A = jw I - Omega; inverse via adjugate / determinant.
  const cplx a11 = jw - occ.omega[0][0];
  const cplx a12 = -occ.omega[0][1];
  const cplx a21 = -occ.omega[1][0];
  const cplx a22 = jw - occ.omega[1][1];
  const cplx det = a11 * a22 - a12 * a21;
  const double m11 = std::real(a22 / det);
  const double m12 = std::real(-a12 / det);
  const double m21 = std::real(-a21 / det);
  const double m22 = std::real(a11 / det);

  // q = Gamma^T z' (Gamma symmetric), then z'^T (Re A^-1 q).
  const double q1 = occ.covariance[0][0] + occ.covariance[0][1];
  const double q2 = occ.covariance[1][0] + occ.covariance[1][1];
  const double quad = (m11 * q1 + m12 * q2) + (m21 * q1 + m22 * q2);

  return 4.0 * ctx.n_receptors * ctx.zeta * ctx.zeta * quad;
}

inline double binding_noise_psd(double f, double c_m, double c_i,
                                const PsdContext& ctx) {
  return binding_noise_psd(f, make_occupancy(c_m, c_i, ctx.kinetics), ctx);
}

inline double one_over_f_psd(double f, double s_1hz, double beta) {
  return s_1hz / std::pow(f, beta);
}

inline double total_psd(double f, const OccupancyModel& occ,
                        const PsdContext& ctx) {
  return binding_noise_psd(f, occ, ctx) +
         one_over_f_psd(f, ctx.flicker_1hz, ctx.noise_exponent);
}

inline double total_psd(double f, double c_m, double c_i,
                        const PsdContext& ctx) {
  return total_psd(f, make_occupancy(c_m, c_i, ctx.kinetics), ctx);
}

// Interference-free model the receiver uses for thresholding. Defined as
// the c_i = 0 limit of the full model so both stay consistent.
inline double single_ligand_psd(double f, double c_m, const PsdContext& ctx) {
  return total_psd(f, c_m, 0.0, ctx);
}

// Raw (unwindowed, mean-removed) single-sided periodogram.
// values[j] = Y_k with k = j + 1; DC and Nyquist bins are excluded.
struct Periodogram {
  std::vector<double> values;  // A^2/Hz
  int n = 0;
  double dt = 0.0;

  double frequency(std::size_t j) const {
    return static_cast<double>(j + 1) / (static_cast<double>(n) * dt);
  }
  std::vector<double> frequencies() const {
    std::vector<double> f(values.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = frequency(j);
    return f;
  }
};

inline Periodogram periodogram(const std::vector<double>& samples,
                               double dt) {
  const std::size_t n = samples.size();
  if (n < 8 || n % 2 != 0)
    throw std::domain_error("periodogram: need even N >= 8");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = samples[i] - mean;

  const auto spec = real_fft(centered);
  Periodogram p;
  p.n = static_cast<int>(n);
  p.dt = dt;
  p.values.resize(n / 2 - 1);
  const double scale = 2.0 * dt / static_cast<double>(n);
  for (std::size_t j = 0; j < p.values.size(); ++j)
    p.values[j] = scale * std::norm(spec[j + 1]);
  return p;
}

// Colored-noise synthesis by frequency-domain shaping: independent complex
// Gaussians per bin scaled so the periodogram expectation equals
// S(f) = s_1hz / f^beta on the grid, then one inverse transform.
template <typename Rng>
std::vector<double> synthesize_one_over_f(int n, double dt, double s_1hz,
                                          double beta, Rng& rng) {
  if (n < 8 || n % 2 != 0)
    throw std::domain_error("synthesize_one_over_f: need even N >= 8");
  const std::size_t nu = static_cast<std::size_t>(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> spec(nu / 2 + 1);
  spec[0] = 0.0;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k < nu / 2; ++k) {
    const double f = static_cast<double>(k) / (nd * dt);
    const double amp = std::sqrt(nd * one_over_f_psd(f, s_1hz, beta) /
                                 (4.0 * dt));
    spec[k] = {amp * gauss(rng), amp * gauss(rng)};
  }
  const double f_nyq = 0.5 / dt;
  spec[nu / 2] = {std::sqrt(nd * one_over_f_psd(f_nyq, s_1hz, beta) /
                            (2.0 * dt)) *
                      gauss(rng),
                  0.0};
  return real_ifft(spec, nu);
}

namespace detail {

// Odd-length windowed-sinc lowpass, unity DC gain. The design cutoff sits
// above the requested passband edge so the Hamming transition band stays
// between `cutoff` and Nyquist.
inline std::vector<double> lowpass_taps(double cutoff_fraction, int taps) {
  const double design = cutoff_fraction + 0.35 * (1.0 - cutoff_fraction);
  const int half = taps / 2;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int m = i - half;
    const double x = std::numbers::pi * design * m; // design in Nyquist units
    const double sinc = m == 0 ? design : std::sin(x) / (std::numbers::pi * m);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (taps - 1));
    h[i] = sinc * window;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

// Same-length convolution with mirror padding at both ends.
inline std::vector<double> convolve_mirrored(const std::vector<double>& x,
                                             const std::vector<double>& h) {
  const int n = static_cast<int>(x.size());
  const int half = static_cast<int>(h.size()) / 2;
  auto at = [&](int i) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return x[static_cast<std::size_t>(std::clamp(i, 0, n - 1))];
  };
  std::vector<double> y(x.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < static_cast<int>(h.size()); ++j)
      acc += h[static_cast<std::size_t>(j)] * at(i + j - half);
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

} // namespace detail

// Zero-phase FIR smoothing: 129-tap windowed-sinc applied forward and
// backward, so the effective magnitude response is |H|^2. cutoff_fraction
// is the passband edge as a fraction of Nyquist.
inline std::vector<double> lowpass_filter(const std::vector<double>& samples,
                                          double cutoff_fraction) {
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0))
    throw std::domain_error("lowpass_filter: cutoff must lie in (0, 1)");
  if (samples.empty()) return {};
  const auto taps = detail::lowpass_taps(cutoff_fraction, 129);
  std::vector<double> pass = detail::convolve_mirrored(samples, taps);
  std::reverse(pass.begin(), pass.end());
  pass = detail::convolve_mirrored(pass, taps);
  std::reverse(pass.begin(), pass.end());
  return pass;
}

// Log-binned average of pre-averaged periodogram values; diagnostic only.
struct LogBinnedSpectrum {
  std::vector<double> freq;   // geometric bin centers
  std::vector<double> value;  // mean over grid bins in each log bin
};

inline LogBinnedSpectrum log_binned_average(const std::vector<double>& freqs,
                                            const std::vector<double>& mean_psd,
                                            double f_lo, double f_hi,
                                            int bins_per_decade) {
  if (freqs.size() != mean_psd.size())
    throw std::invalid_argument("log_binned_average: size mismatch");
  LogBinnedSpectrum out;
  const double step = std::pow(10.0, 1.0 / bins_per_decade);
  double lo = f_lo;
  while (lo < f_hi) {
    const double hi = std::min(lo * step, f_hi);
    double acc = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      if (freqs[j] >= lo && freqs[j] < hi) {
        acc += mean_psd[j];
        ++count;
      }
    }
    if (count > 0) {
      out.freq.push_back(std::sqrt(lo * hi));
      out.value.push_back(acc / count);
    }
    lo = hi;
  }
  return out;
}

} // namespace biofet
