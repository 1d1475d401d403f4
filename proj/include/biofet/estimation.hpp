#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biofet/quadrature.hpp"
#include "biofet/spectral.hpp"

namespace biofet {

struct NonIdentifiableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Negative Whittle quasi-log-likelihood of a periodogram under the total
// PSD model, l(lambda) = sum_k [ Y_k / S(f_k) + ln S(f_k) ]. The flicker
// part of the model does not depend on lambda and is cached per bin.
class WhittleObjective {
 public:
  WhittleObjective(std::vector<double> periodogram_values,
                   std::vector<double> frequencies, const PsdContext& ctx)
      : y_(std::move(periodogram_values)),
        fk_(std::move(frequencies)),
        ctx_(ctx) {
    if (y_.size() != fk_.size() || y_.empty())
      throw std::invalid_argument(
          "WhittleObjective: periodogram/frequency grids must match");
    flicker_.resize(fk_.size());
    for (std::size_t k = 0; k < fk_.size(); ++k) {
      if (!(fk_[k] > 0.0))
        throw std::invalid_argument("WhittleObjective: frequencies must be > 0");
      flicker_[k] = one_over_f_psd(fk_[k], ctx_.flicker_1hz,
                                   ctx_.noise_exponent);
    }
  }

  static WhittleObjective from_periodogram(const Periodogram& p,
                                           const PsdContext& ctx) {
    return WhittleObjective(p.values, p.frequencies(), ctx);
  }

  double operator()(double c_m, double c_i) const {
    const OccupancyModel occ = make_occupancy(c_m, c_i, ctx_.kinetics);
    double acc = 0.0;
    for (std::size_t k = 0; k < fk_.size(); ++k) {
      const double s = binding_noise_psd(fk_[k], occ, ctx_) + flicker_[k];
      if (!(s > 0.0))
        throw std::logic_error("WhittleObjective: model PSD not positive");
      acc += y_[k] / s + std::log(s);
    }
    return acc;
  }

  std::size_t bins() const { return y_.size(); }
  const PsdContext& context() const { return ctx_; }

 private:
  std::vector<double> y_;
  std::vector<double> fk_;
  std::vector<double> flicker_;
  PsdContext ctx_;
};

inline double whittle_nll(const std::vector<double>& periodogram_values,
                          const std::vector<double>& frequencies, double c_m,
                          double c_i, const PsdContext& ctx) {
  return WhittleObjective(periodogram_values, frequencies, ctx)(c_m, c_i);
}

struct GridOptions {
  int points_per_axis = 12;
  double lo_factor = 1e-2;  // grid spans [lo, hi] * K_D per axis
  double hi_factor = 1e2;
};

// Coarse initial guess: exhaustive minimum of the objective over a
// logarithmic concentration grid tied to the dissociation constants.
inline std::pair<double, double> coarse_grid_init(const WhittleObjective& nll,
                                                  GridOptions opt = {}) {
  const double kdm = nll.context().kinetics.k_d_m();
  const double kdi = nll.context().kinetics.k_d_i();
  const int n = opt.points_per_axis;
  auto grid_value = [&](double kd, int idx) {
    if (n == 1) return kd * opt.lo_factor;
    const double t = static_cast<double>(idx) / (n - 1);
    return kd * opt.lo_factor *
           std::pow(opt.hi_factor / opt.lo_factor, t);
  };
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{kdm, kdi};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double cm = grid_value(kdm, i);
      const double ci = grid_value(kdi, j);
      const double v = nll(cm, ci);
      if (v < best) {
        best = v;
        arg = {cm, ci};
      }
    }
  }
  return arg;
}

inline std::pair<double, double>
coarse_grid_init(const std::vector<double>& periodogram_values,
                 const std::vector<double>& frequencies,
                 const PsdContext& ctx, GridOptions opt = {}) {
  return coarse_grid_init(WhittleObjective(periodogram_values, frequencies, ctx),
                          opt);
}

struct Estimate {
  double c_m = 0.0;
  double c_i = 0.0;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::optional<std::array<double, 2>> std_errors;
};

inline std::vector<std::pair<std::string, double>>
estimate_key_values(const Estimate& e) {
  return {{"c_m_hat", e.c_m},
          {"c_i_hat", e.c_i},
          {"converged", e.converged ? 1.0 : 0.0},
          {"iterations", static_cast<double>(e.iterations)},
          {"objective", e.objective}};
}

struct MleOptions {
  int max_iterations = 50;
  double grad_tol_rel = 1e-8;   // on the gradient infinity norm
  bool log_coordinates = true;  // optimize in ln-concentration space
};

namespace detail {

struct Stencil {
  double value;
  std::array<double, 2> grad;
  std::array<std::array<double, 2>, 2> hess;
};

// Gradient and Hessian by central differences on a 9-point stencil.
template <typename F>
Stencil fd_stencil(const F& f, const std::array<double, 2>& x,
                   const std::array<double, 2>& h) {
  Stencil s;
  s.value = f(x);
  const auto at = [&](double d0, double d1) {
    return f({x[0] + d0, x[1] + d1});
  };
  const double fpp = at(h[0], h[1]), fpm = at(h[0], -h[1]);
  const double fmp = at(-h[0], h[1]), fmm = at(-h[0], -h[1]);
  const double fp0 = at(h[0], 0.0), fm0 = at(-h[0], 0.0);
  const double f0p = at(0.0, h[1]), f0m = at(0.0, -h[1]);
  s.grad = {(fp0 - fm0) / (2.0 * h[0]), (f0p - f0m) / (2.0 * h[1])};
  s.hess[0][0] = (fp0 - 2.0 * s.value + fm0) / (h[0] * h[0]);
  s.hess[1][1] = (f0p - 2.0 * s.value + f0m) / (h[1] * h[1]);
  s.hess[0][1] = s.hess[1][0] =
      (fpp - fpm - fmp + fmm) / (4.0 * h[0] * h[1]);
  return s;
}

} // namespace detail

// Damped Newton minimization of the Whittle objective, by default in
// log-concentration coordinates (which keeps the estimate positive without
// a constrained solver). Non-positive-definite Hessians are shifted to the
// nearest positive-definite matrix before solving; failure to meet the
// gradient tolerance within the iteration budget is reported, not hidden.
inline Estimate mle_estimate(const WhittleObjective& nll,
                             std::pair<double, double> initial,
                             MleOptions opt = {}) {
  const double kdm = nll.context().kinetics.k_d_m();
  const double kdi = nll.context().kinetics.k_d_i();
  const bool logc = opt.log_coordinates;

  const std::array<double, 2> lo = {
      logc ? std::log(kdm * 1e-8) : kdm * 1e-8,
      logc ? std::log(kdi * 1e-8) : kdi * 1e-8};
  const std::array<double, 2> hi = {
      logc ? std::log(kdm * 1e8) : kdm * 1e8,
      logc ? std::log(kdi * 1e8) : kdi * 1e8};
  auto clamp_point = [&](std::array<double, 2> p) {
    p[0] = std::clamp(p[0], lo[0], hi[0]);
    p[1] = std::clamp(p[1], lo[1], hi[1]);
    return p;
  };
  auto eval = [&](const std::array<double, 2>& p) {
    if (logc) return nll(std::exp(p[0]), std::exp(p[1]));
    return nll(p[0], p[1]);
  };

  std::array<double, 2> x = clamp_point(
      {logc ? std::log(initial.first) : initial.first,
       logc ? std::log(initial.second) : initial.second});
  const std::array<double, 2> h = {
      logc ? 1e-4 : 1e-4 * std::max(std::abs(x[0]), kdm * 1e-8),
      logc ? 1e-4 : 1e-4 * std::max(std::abs(x[1]), kdi * 1e-8)};

  // Convergence is judged on the gradient per *relative* parameter change,
  // so raw and log coordinates use the same effective criterion.
  auto scaled_grad_norm = [&](const std::array<double, 2>& g,
                              const std::array<double, 2>& p) {
    if (logc) return std::max(std::abs(g[0]), std::abs(g[1]));
    return std::max(std::abs(g[0] * p[0]), std::abs(g[1] * p[1]));
  };

  Estimate est;
  double value = eval(x);
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const auto st = detail::fd_stencil(eval, x, h);
    value = st.value;
    const double gnorm = scaled_grad_norm(st.grad, x);
    if (gnorm <= opt.grad_tol_rel * std::max(1.0, std::abs(st.value))) {
      est.converged = true;
      break;
    }

    // Shift the Hessian PD if needed (eigenvalue floor on the 2x2).
    auto hess = st.hess;
    const double tr = hess[0][0] + hess[1][1];
    const double det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    const double eig_min = 0.5 * tr - disc;
    if (!(eig_min > 0.0)) {
      const double shift = -eig_min + std::max(1e-8, 1e-6 * std::abs(tr));
      hess[0][0] += shift;
      hess[1][1] += shift;
    }
    const double hdet = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    std::array<double, 2> step = {
        -(hess[1][1] * st.grad[0] - hess[0][1] * st.grad[1]) / hdet,
        -(hess[0][0] * st.grad[1] - hess[1][0] * st.grad[0]) / hdet};

    const double slope = st.grad[0] * step[0] + st.grad[1] * step[1];
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const auto cand = clamp_point(
          {x[0] + alpha * step[0], x[1] + alpha * step[1]});
      const double cand_value = eval(cand);
      if (cand_value <= st.value + 1e-4 * alpha * slope) {
        x = cand;
        value = cand_value;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;  // stalled; report non-convergence at last iterate
  }
  est.iterations = iter;
  est.objective = value;
  est.c_m = logc ? std::exp(x[0]) : x[0];
  est.c_i = logc ? std::exp(x[1]) : x[1];
  return est;
}

inline Estimate mle_estimate(const std::vector<double>& periodogram_values,
                             const std::vector<double>& frequencies,
                             std::pair<double, double> initial,
                             const PsdContext& ctx, MleOptions opt = {}) {
  return mle_estimate(WhittleObjective(periodogram_values, frequencies, ctx),
                      initial, opt);
}

enum class FisherMode { full, single_ligand };

struct FisherMatrix {
  std::array<std::array<double, 2>, 2> m{};  // 1/concentration^2
  FisherMode mode = FisherMode::full;
  double c_m = 0.0;
  double c_i = 0.0;
  double n = 0.0;
  double dt = 0.0;

  double f11() const { return m[0][0]; }
};

// Fisher information of the Whittle fit,
//   F_ij = N dt * int_0^{1/(2 dt)} S^-2 (dS/dl_i)(dS/dl_j) df,
// the integral form of the per-bin sum over k = 1..N/2-1: the grid packs
// N dt bins per hertz, which fixes the prefactor. Partial derivatives are
// central differences (relative step 1e-6); quadrature is adaptive to 1e-6
// relative. single_ligand mode fixes c_i = 0 and returns the 1x1
// information for c_m alone.
inline FisherMatrix fisher_matrix(double c_m, double c_i, double n, double dt,
                                  const PsdContext& ctx,
                                  FisherMode mode = FisherMode::full) {
  if (!(c_m > 0.0))
    throw std::domain_error("fisher_matrix: c_m must be positive");
  if (mode == FisherMode::full && !(c_i > 0.0))
    throw std::domain_error("fisher_matrix: c_i must be positive in full mode");

  const double rel_step = 1e-6;
  const double hm = rel_step * c_m;
  const double hi = rel_step * c_i;
  const double ci_eff = mode == FisherMode::single_ligand ? 0.0 : c_i;

  const OccupancyModel base = make_occupancy(c_m, ci_eff, ctx.kinetics);
  const OccupancyModel mp = make_occupancy(c_m + hm, ci_eff, ctx.kinetics);
  const OccupancyModel mm = make_occupancy(c_m - hm, ci_eff, ctx.kinetics);

  FisherMatrix out;
  out.mode = mode;
  out.c_m = c_m;
  out.c_i = ci_eff;
  out.n = n;
  out.dt = dt;

  const double f_max = 1.0 / (2.0 * dt);
  const double prefactor = n * dt;

  auto model = [&](double f, const OccupancyModel& occ) {
    return total_psd(f, occ, ctx);
  };

  if (mode == FisherMode::single_ligand) {
    auto integrand = [&](double f) {
      const double s = model(f, base);
      const double dm = (model(f, mp) - model(f, mm)) / (2.0 * hm);
      return dm * dm / (s * s);
    };
    out.m[0][0] = prefactor * integrate(integrand, 0.0, f_max, 1e-6);
    return out;
  }

  const OccupancyModel ip = make_occupancy(c_m, c_i + hi, ctx.kinetics);
  const OccupancyModel im = make_occupancy(c_m, c_i - hi, ctx.kinetics);

  auto integrand = [&](double f, int a, int b) {
    const double s = model(f, base);
    const double dm = (model(f, mp) - model(f, mm)) / (2.0 * hm);
    const double di = (model(f, ip) - model(f, im)) / (2.0 * hi);
    const double d1 = a == 0 ? dm : di;
    const double d2 = b == 0 ? dm : di;
    return d1 * d2 / (s * s);
  };
  out.m[0][0] = prefactor *
                integrate([&](double f) { return integrand(f, 0, 0); }, 0.0,
                          f_max, 1e-6);
  out.m[1][1] = prefactor *
                integrate([&](double f) { return integrand(f, 1, 1); }, 0.0,
                          f_max, 1e-6);
  out.m[0][1] = out.m[1][0] =
      prefactor *
      integrate([&](double f) { return integrand(f, 0, 1); }, 0.0, f_max,
                1e-6);
  return out;
}

// (F^-1)_11 for the full 2x2, or 1/F_11 in single-ligand mode. Throws
// NonIdentifiableError when the full matrix is numerically singular (the
// two ligands become spectrally indistinguishable).
inline double estimator_variance(const FisherMatrix& f) {
  if (f.mode == FisherMode::single_ligand) return 1.0 / f.m[0][0];
  const double det = f.m[0][0] * f.m[1][1] - f.m[0][1] * f.m[1][0];
  if (!(det > 1e-12 * f.m[0][0] * f.m[1][1]))
    throw NonIdentifiableError(
        "fisher matrix is singular: ligands not separable from the PSD");
  return f.m[1][1] / det;
}

// Asymptotic variances of the estimated information concentration for both
// transmitted symbols. full mode evaluates the two-ligand model at
// (c_m|s, mu_ci); single_ligand mode is the receiver-side interference-free
// model used for thresholding.
inline std::pair<double, double>
estimator_variances(const SystemConfig& cfg, const DerivedParams& d,
                    FisherMode mode) {
  const PsdContext ctx = PsdContext::from(cfg, d);
  const double n = static_cast<double>(cfg.sample_count);
  auto variance_for = [&](double c_m) {
    const FisherMatrix f =
        fisher_matrix(c_m, mode == FisherMode::full ? d.interferer_mean : 0.0,
                      n, cfg.sampling_period, ctx, mode);
    return estimator_variance(f);
  };
  return {variance_for(d.peak_conc_bit0), variance_for(d.peak_conc_bit1)};
}

} // namespace biofet
