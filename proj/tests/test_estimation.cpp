#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "biofet/estimation.hpp"
#include "biofet/params.hpp"
#include "biofet/quadrature.hpp"
#include "biofet/rng.hpp"
#include "biofet/spectral.hpp"

using namespace biofet;

namespace {

constexpr double kCm1 = 6.00540086587998e17;
constexpr double kMuCi = 4.20378060611598e17;

struct Setup {
  SystemConfig cfg{};
  DerivedParams derived;
  PsdContext ctx;
  std::vector<double> freqs;

  Setup() : derived(derive_all(cfg)), ctx(PsdContext::from(cfg, derived)) {
    const int n = cfg.sample_count;
    freqs.resize(static_cast<std::size_t>(n / 2 - 1));
    for (std::size_t j = 0; j < freqs.size(); ++j)
      freqs[j] = (j + 1) / (n * cfg.sampling_period);
  }

  std::vector<double> model_values(double cm, double ci) const {
    const auto occ = make_occupancy(cm, ci, ctx.kinetics);
    std::vector<double> s(freqs.size());
    for (std::size_t j = 0; j < s.size(); ++j)
      s[j] = total_psd(freqs[j], occ, ctx);
    return s;
  }

  // Periodogram realization under the asymptotic model: independent
  // exponential bins with mean S(f_k).
  std::vector<double> exponential_window(double cm, double ci,
                                         std::mt19937_64& rng) const {
    auto s = model_values(cm, ci);
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : s) v *= expo(rng);
    return s;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

} // namespace

TEST(WhittleNll, FlatUnitSpectrumGivesBinCount) {
  // With zeta = 0 and a flat unit flicker level the model is S = 1 for any
  // parameter value, so l = sum(1/1 + ln 1) = K.
  PsdContext ctx = setup().ctx;
  ctx.zeta = 0.0;
  ctx.flicker_1hz = 1.0;
  ctx.noise_exponent = 0.0;
  const std::vector<double> y(setup().freqs.size(), 1.0);
  const double l = whittle_nll(y, setup().freqs, 1e17, 1e17, ctx);
  EXPECT_DOUBLE_EQ(l, static_cast<double>(setup().freqs.size()));
}

TEST(WhittleNll, ScoreVanishesAtGeneratingParameters) {
  const auto& s = setup();
  const auto y = s.model_values(kCm1, kMuCi);
  const WhittleObjective nll(y, s.freqs, s.ctx);
  const double l0 = nll(kCm1, kMuCi);
  const double h = 1e-4;
  for (int axis = 0; axis < 2; ++axis) {
    const double up = axis == 0 ? nll(kCm1 * std::exp(h), kMuCi)
                                : nll(kCm1, kMuCi * std::exp(h));
    const double dn = axis == 0 ? nll(kCm1 * std::exp(-h), kMuCi)
                                : nll(kCm1, kMuCi * std::exp(-h));
    const double grad = (up - dn) / (2.0 * h);
    EXPECT_LE(std::abs(grad), 1e-8 * std::max(1.0, std::abs(l0)))
        << "axis " << axis;
  }
}

TEST(WhittleNll, TrueParametersBeatPerturbedOnesOnSimulatedData) {
  const auto& s = setup();
  int wins = 0;
  for (int r = 0; r < 100; ++r) {
    std::mt19937_64 rng(derive_seed(9100, r));
    const auto y = s.exponential_window(kCm1, kMuCi, rng);
    const WhittleObjective nll(y, s.freqs, s.ctx);
    if (nll(kCm1, kMuCi) < nll(2.0 * kCm1, kMuCi)) ++wins;
  }
  EXPECT_GE(wins, 95);
}

TEST(CoarseGridInit, ExactHitReturnsGridPoint) {
  const auto& s = setup();
  const double kdm = s.ctx.kinetics.k_d_m();
  const double kdi = s.ctx.kinetics.k_d_i();
  // Replicate the grid layout: index 7 and 4 of 12 points over 1e-2..1e2.
  const double cm = kdm * 1e-2 * std::pow(1e4, 7.0 / 11.0);
  const double ci = kdi * 1e-2 * std::pow(1e4, 4.0 / 11.0);
  const auto y = s.model_values(cm, ci);
  const auto init = coarse_grid_init(y, s.freqs, s.ctx);
  EXPECT_NEAR(init.first / cm, 1.0, 1e-12);
  EXPECT_NEAR(init.second / ci, 1.0, 1e-12);
}

TEST(CoarseGridInit, DegenerateSinglePointGrid) {
  const auto& s = setup();
  const auto y = s.model_values(kCm1, kMuCi);
  GridOptions opt;
  opt.points_per_axis = 1;
  const auto init = coarse_grid_init(WhittleObjective(y, s.freqs, s.ctx), opt);
  EXPECT_DOUBLE_EQ(init.first, s.ctx.kinetics.k_d_m() * 1e-2);
  EXPECT_DOUBLE_EQ(init.second, s.ctx.kinetics.k_d_i() * 1e-2);
}

TEST(CoarseGridInit, CoversTrueParametersWithinOneCell) {
  const auto& s = setup();
  // One grid cell in log10 units: 4 / 11 per axis.
  const double cell = std::log(std::pow(1e4, 1.0 / 11.0));
  int covered = 0;
  for (int r = 0; r < 100; ++r) {
    std::mt19937_64 rng(derive_seed(9300, r));
    const auto y = s.exponential_window(kCm1, kMuCi, rng);
    const auto init = coarse_grid_init(y, s.freqs, s.ctx);
    const bool ok_m = std::abs(std::log(init.first / kCm1)) <= cell * 1.001;
    const bool ok_i = std::abs(std::log(init.second / kMuCi)) <= cell * 1.001;
    if (ok_m && ok_i) ++covered;
  }
  EXPECT_GE(covered, 90);
}

TEST(MleEstimate, RecoversParametersFromNoiselessSpectrum) {
  const auto& s = setup();
  const auto y = s.model_values(kCm1, kMuCi);
  const WhittleObjective nll(y, s.freqs, s.ctx);
  const auto init = coarse_grid_init(nll);
  const auto est = mle_estimate(nll, init);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.c_m / kCm1, 1.0, 1e-6);
  EXPECT_NEAR(est.c_i / kMuCi, 1.0, 1e-6);
}

TEST(MleEstimate, LogAndRawCoordinatesAgree) {
  const auto& s = setup();
  std::mt19937_64 rng(derive_seed(9400, 3));
  const auto y = s.exponential_window(kCm1, kMuCi, rng);
  const WhittleObjective nll(y, s.freqs, s.ctx);
  const auto init = coarse_grid_init(nll);
  MleOptions log_opt;
  const auto log_est = mle_estimate(nll, init, log_opt);
  MleOptions raw_opt;
  raw_opt.log_coordinates = false;
  const auto raw_est = mle_estimate(nll, init, raw_opt);
  ASSERT_TRUE(log_est.converged);
  ASSERT_TRUE(raw_est.converged);
  EXPECT_NEAR(raw_est.c_m / log_est.c_m, 1.0, 1e-4);
}

TEST(MleEstimate, AsymptoticallyUnbiasedWithCramerRaoSpread) {
  const auto& s = setup();
  const double sigma_fim = std::sqrt(estimator_variance(
      fisher_matrix(kCm1, kMuCi, s.cfg.sample_count, s.cfg.sampling_period,
                    s.ctx, FisherMode::full)));
  std::vector<double> estimates;
  int nonconverged = 0;
  for (int r = 0; r < 100; ++r) {
    std::mt19937_64 rng(derive_seed(9500, r));
    const auto y = s.exponential_window(kCm1, kMuCi, rng);
    const WhittleObjective nll(y, s.freqs, s.ctx);
    const auto est = mle_estimate(nll, coarse_grid_init(nll));
    if (!est.converged) ++nonconverged;
    estimates.push_back(est.c_m);
  }
  EXPECT_LE(nonconverged, 5);
  double mean = 0.0;
  for (double v : estimates) mean += v;
  mean /= estimates.size();
  double var = 0.0;
  for (double v : estimates) var += (v - mean) * (v - mean);
  var /= (estimates.size() - 1.0);
  const double spread = std::sqrt(var);

  EXPECT_LT(std::abs(mean - kCm1), 3.0 * sigma_fim / std::sqrt(100.0));
  EXPECT_GT(spread / sigma_fim, 2.0 / 3.0);
  EXPECT_LT(spread / sigma_fim, 1.5);
}

TEST(EstimateRecord, FlatKeyValueView) {
  Estimate e;
  e.c_m = 3.5e17;
  e.c_i = 1.25e17;
  e.converged = true;
  e.iterations = 9;
  e.objective = -123.5;
  const auto kv = estimate_key_values(e);
  ASSERT_EQ(kv.size(), 5u);
  EXPECT_EQ(kv[0].first, "c_m_hat");
  EXPECT_DOUBLE_EQ(kv[0].second, 3.5e17);
  EXPECT_EQ(kv[2].first, "converged");
  EXPECT_DOUBLE_EQ(kv[2].second, 1.0);
  EXPECT_DOUBLE_EQ(kv[3].second, 9.0);
}

TEST(FisherMatrix, SymmetricByConstruction) {
  const auto& s = setup();
  const auto f = fisher_matrix(kCm1, kMuCi, 700, 0.005, s.ctx,
                               FisherMode::full);
  EXPECT_EQ(f.m[0][1], f.m[1][0]);
  EXPECT_GT(f.m[0][0], 0.0);
  EXPECT_GT(f.m[1][1], 0.0);
}

TEST(FisherMatrix, DoublingSamplesDoublesInformation) {
  const auto& s = setup();
  const auto f1 = fisher_matrix(kCm1, kMuCi, 700, 0.005, s.ctx,
                                FisherMode::full);
  const auto f2 = fisher_matrix(kCm1, kMuCi, 1400, 0.005, s.ctx,
                                FisherMode::full);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_DOUBLE_EQ(f2.m[i][j], 2.0 * f1.m[i][j]);
}

TEST(FisherMatrix, SingleLigandAgainstDenseTrapezoidOracle) {
  const auto& s = setup();
  const auto f = fisher_matrix(kCm1, 0.0, 700, 0.005, s.ctx,
                               FisherMode::single_ligand);
  const double sigma = std::sqrt(estimator_variance(f));
  EXPECT_TRUE(std::isfinite(sigma));
  EXPECT_GT(sigma, 0.0);

  // Dumb second route with analytic Lorentzian derivative.
  const auto& k = s.ctx.kinetics;
  const double kd = k.k_d_m();
  auto model = [&](double f_hz) {
    return single_ligand_psd(f_hz, kCm1, s.ctx);
  };
  auto dmodel = [&](double f_hz) {
    const double p = kCm1 / (kd + kCm1);
    const double dp = kd / ((kd + kCm1) * (kd + kCm1));
    const double tau = 1.0 / (kCm1 * k.k_on_m + k.k_off_m);
    const double dtau = -k.k_on_m * tau * tau;
    const double w = 2.0 * std::numbers::pi * f_hz;
    const double lor = tau / (1.0 + w * w * tau * tau);
    const double dlor_dtau = (1.0 - w * w * tau * tau) /
                             ((1.0 + w * w * tau * tau) *
                              (1.0 + w * w * tau * tau));
    const double amp = 4.0 * s.ctx.n_receptors * s.ctx.zeta * s.ctx.zeta;
    return amp * ((1.0 - 2.0 * p) * dp * lor +
                  p * (1.0 - p) * dlor_dtau * dtau);
  };
  const std::size_t n_steps = 400000;
  const double f_max = 100.0;
  const double h = f_max / n_steps;
  double acc = 0.0;
  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double f_hz = std::max(i * h, 1e-9);
    const double d = dmodel(f_hz);
    const double sdm = model(f_hz);
    const double v = d * d / (sdm * sdm);
    acc += (i == 0 || i == n_steps) ? 0.5 * v : v;
  }
  // N dt bins per hertz times the per-bin information density.
  const double oracle = 700.0 * 0.005 * acc * h;
  EXPECT_NEAR(f.m[0][0] / oracle, 1.0, 1e-3);
}

TEST(FisherMatrix, NumericDerivativeMatchesAnalyticOnLorentzian) {
  const auto& s = setup();
  const auto& k = s.ctx.kinetics;
  const double kd = k.k_d_m();
  const double h = 1e-6 * kCm1;
  for (double f_hz : {0.5, 4.0, 30.0, 90.0}) {
    const double numeric = (single_ligand_psd(f_hz, kCm1 + h, s.ctx) -
                            single_ligand_psd(f_hz, kCm1 - h, s.ctx)) /
                           (2.0 * h);
    const double p = kCm1 / (kd + kCm1);
    const double dp = kd / ((kd + kCm1) * (kd + kCm1));
    const double tau = 1.0 / (kCm1 * k.k_on_m + k.k_off_m);
    const double dtau = -k.k_on_m * tau * tau;
    const double w = 2.0 * std::numbers::pi * f_hz;
    const double lor = tau / (1.0 + w * w * tau * tau);
    const double dlor_dtau = (1.0 - w * w * tau * tau) /
                             std::pow(1.0 + w * w * tau * tau, 2.0);
    const double amp = 4.0 * s.ctx.n_receptors * s.ctx.zeta * s.ctx.zeta;
    const double analytic =
        amp * ((1.0 - 2.0 * p) * dp * lor + p * (1.0 - p) * dlor_dtau * dtau);
    EXPECT_NEAR(numeric / analytic, 1.0, 1e-5) << "f = " << f_hz;
  }
}

TEST(FisherMatrix, InverseDiagonalDominatesReciprocal) {
  const auto& s = setup();
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> logc(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double cm = kCm1 * std::pow(10.0, logc(rng));
    const double ci = kMuCi * std::pow(10.0, logc(rng));
    const auto f = fisher_matrix(cm, ci, 700, 0.005, s.ctx, FisherMode::full);
    const double inv11 = estimator_variance(f);
    EXPECT_GE(inv11 * f.m[0][0], 1.0 - 1e-12);
  }
}

TEST(EstimatorVariances, FullModeAtLeastSingleParameterBound) {
  const auto& s = setup();
  const auto full = estimator_variances(s.cfg, s.derived, FisherMode::full);
  const auto f0 = fisher_matrix(s.derived.peak_conc_bit0, s.derived.interferer_mean,
                                700, 0.005, s.ctx, FisherMode::full);
  const auto f1 = fisher_matrix(s.derived.peak_conc_bit1, s.derived.interferer_mean,
                                700, 0.005, s.ctx, FisherMode::full);
  EXPECT_GE(full.first, 1.0 / f0.m[0][0]);
  EXPECT_GE(full.second, 1.0 / f1.m[0][0]);
}

TEST(EstimatorVariances, InverseInSampleCount) {
  SystemConfig cfg{};
  const auto d = derive_all(cfg);
  std::vector<double> scaled;
  for (int n : {350, 700, 1400}) {
    cfg.sample_count = n;
    const auto v = estimator_variances(cfg, d, FisherMode::single_ligand);
    scaled.push_back(v.second * n);
  }
  EXPECT_NEAR(scaled[1] / scaled[0], 1.0, 1e-9);
  EXPECT_NEAR(scaled[2] / scaled[0], 1.0, 1e-9);
}

TEST(EstimatorVariances, IdenticalLigandsAreNonIdentifiable) {
  SystemConfig cfg{};
  cfg.k_off_i = cfg.k_off_m;  // eta = 1 with equal binding rates
  const auto d = derive_all(cfg);
  EXPECT_THROW(estimator_variances(cfg, d, FisherMode::full),
               NonIdentifiableError);
  // The single-ligand route stays well-defined.
  const auto single = estimator_variances(cfg, d, FisherMode::single_ligand);
  EXPECT_GT(single.first, 0.0);
  EXPECT_GT(single.second, 0.0);
}
