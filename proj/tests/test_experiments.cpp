#include "poissonht/experiments.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "poissonht/errors.hpp"
#include "poissonht/moments.hpp"
#include "support/oracles.hpp"

namespace poissonht {
namespace {

IntensityModel amplitude_model(double n) {
  return IntensityModel::amplitude(1.0, n, 0.5,
                                   BaseSignal::offset_cosine(2.0, 1.0, 1.0));
}

TEST(EstimateSize, MatchesExactLatticeSize) {
  // Homogeneous statistics live on the 0.1-lattice, so the rejection
  // probability at any threshold is an exact Poisson tail.
  const auto m = IntensityModel::homogeneous(1.0, 100.0);
  const double alpha = 0.5;
  const PowerEstimate est =
      estimate_size(m, alpha, ThresholdKind::third_order, 20000, SeedSpec{11, 0});
  const CoreQuantities q = core_quantities(m);
  const double thr = score_threshold_third(alpha, q);
  // Delta = 0.1 (N - 100) > thr  <=>  N > 100 + 10 thr.
  const long long cut =
      static_cast<long long>(std::floor(100.0 + 10.0 * thr));
  const double exact = 1.0 - testing::poisson_cdf(100.0, cut);
  EXPECT_NEAR(est.beta_hat, exact, 4.0 * est.std_error);
  EXPECT_EQ(est.reps, 20000);
  EXPECT_EQ(est.test_name, "score3");
  EXPECT_NEAR(est.std_error,
              std::sqrt(est.beta_hat * (1.0 - est.beta_hat) / 20000.0), 1e-12);
}

TEST(EstimateSize, SecondOrderThresholdLabelsRows) {
  const auto m = amplitude_model(50.0);
  const PowerEstimate est =
      estimate_size(m, 0.05, ThresholdKind::second_order, 10000, SeedSpec{3, 0});
  EXPECT_EQ(est.test_name, "score2");
  EXPECT_GT(est.beta_hat, 0.01);
  EXPECT_LT(est.beta_hat, 0.12);
}

TEST(EstimateSize, EnforcesMinimumReplications) {
  const auto m = amplitude_model(50.0);
  EXPECT_THROW(estimate_size(m, 0.05, ThresholdKind::third_order, 5000,
                             SeedSpec{1, 0}),
               config_error);
}

TEST(EstimatePower, NullAlternativeReducesToSize) {
  const auto m = amplitude_model(50.0);
  const PowerEstimate size =
      estimate_size(m, 0.05, ThresholdKind::third_order, 10000, SeedSpec{9, 0});
  const PowerEstimate power = estimate_power(m, 0.0, 0.05, TestKind::score3,
                                             10000, SeedSpec{9, 0});
  EXPECT_EQ(size.rejections, power.rejections);
  EXPECT_DOUBLE_EQ(size.beta_hat, power.beta_hat);
  EXPECT_THROW(
      estimate_power(m, 0.0, 0.05, TestKind::np_mc, 10000, SeedSpec{9, 0}),
      config_error);
}

TEST(EstimatePower, AlternativeBeatsSizeAndTracksPrediction) {
  const auto m = amplitude_model(100.0);
  const PowerEstimate est = estimate_power(m, 1.0, 0.05, TestKind::score3,
                                           50000, SeedSpec{21, 0});
  EXPECT_GT(est.beta_hat, 0.15);
  const double pred = power_representation_third(m, 1.0, 0.05);
  EXPECT_NEAR(est.beta_hat, pred, 4.0 * est.std_error + 10.0 / 100.0);
}

TEST(EstimatePower, BenchmarkKindsUseTheirThresholds) {
  const auto m = amplitude_model(100.0);
  const PowerEstimate analytic = estimate_power(
      m, 1.0, 0.05, TestKind::np_analytic, 20000, SeedSpec{31, 0});
  const PowerEstimate mc =
      estimate_power(m, 1.0, 0.05, TestKind::np_mc, 20000, SeedSpec{31, 0});
  EXPECT_EQ(analytic.test_name, "np_analytic");
  EXPECT_EQ(mc.test_name, "np_mc");
  // Same realizations, nearly identical thresholds: powers within MC noise.
  EXPECT_NEAR(analytic.beta_hat, mc.beta_hat,
              4.0 * (analytic.std_error + mc.std_error));
}

TEST(PairedLoss, HomogeneousIndicatorIdentityIsExact) {
  const auto m = IntensityModel::homogeneous(1.0, 100.0);
  const auto rows =
      paired_power_loss(m, 1.0, 0.05, {100.0}, 100000, SeedSpec{41, 0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].np_only, 0);
  EXPECT_EQ(rows[0].score_only, 0);
  EXPECT_EQ(rows[0].cal_disagree, 0);
  EXPECT_DOUBLE_EQ(rows[0].loss_hat, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].std_error, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].r_analytic, 0.0);
}

TEST(PairedLoss, BenchmarkDominatesWithinNoise) {
  const auto m = amplitude_model(100.0);
  const auto rows =
      paired_power_loss(m, 1.0, 0.05, {100.0}, 100000, SeedSpec{43, 0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].loss_hat, -3.0 * rows[0].std_error);
  EXPECT_NEAR(rows[0].r_analytic, power_loss_limit(m, 1.0, 0.05), 1e-12);
  EXPECT_EQ(rows[0].u, 1.0);
  EXPECT_EQ(rows[0].n, 100.0);

  // std_error covers the threshold-calibration noise on top of the
  // evaluation indicators, so it strictly exceeds the indicator-only term.
  const double r = 100000.0;
  const double mean =
      static_cast<double>(rows[0].np_only - rows[0].score_only) / r;
  const double sumsq =
      static_cast<double>(rows[0].np_only + rows[0].score_only);
  const double eval_se = 100.0 * std::sqrt((sumsq - r * mean * mean) /
                                           (r - 1.0) / r);
  EXPECT_GT(rows[0].cal_disagree, 0);
  EXPECT_GT(rows[0].std_error, eval_se);
}

TEST(PairedLoss, ValidatesArguments) {
  const auto m = amplitude_model(100.0);
  EXPECT_THROW(paired_power_loss(m, 0.0, 0.05, {100.0}, 100000, SeedSpec{1, 0}),
               config_error);
  EXPECT_THROW(paired_power_loss(m, 1.0, 0.05, {}, 100000, SeedSpec{1, 0}),
               config_error);
  EXPECT_THROW(
      paired_power_loss(m, 1.0, 0.05, {100.0, 50.0}, 100000, SeedSpec{1, 0}),
      config_error);
  EXPECT_THROW(paired_power_loss(m, 1.0, 0.05, {100.0}, 1000, SeedSpec{1, 0}),
               config_error);
}

TEST(Replication, ResultsAreThreadCountInvariant) {
  const auto m = amplitude_model(50.0);
  ExperimentOptions serial;
  serial.threads = 1;
  ExperimentOptions pooled;
  pooled.threads = 3;
  const PowerEstimate a =
      estimate_size(m, 0.05, ThresholdKind::third_order, 20000, SeedSpec{55, 0},
                    serial);
  const PowerEstimate b =
      estimate_size(m, 0.05, ThresholdKind::third_order, 20000, SeedSpec{55, 0},
                    pooled);
  EXPECT_EQ(a.rejections, b.rejections);
  EXPECT_DOUBLE_EQ(a.beta_hat, b.beta_hat);

  const auto la =
      paired_power_loss(m, 1.0, 0.05, {50.0}, 100000, SeedSpec{56, 0}, serial);
  const auto lb =
      paired_power_loss(m, 1.0, 0.05, {50.0}, 100000, SeedSpec{56, 0}, pooled);
  EXPECT_EQ(la[0].np_only, lb[0].np_only);
  EXPECT_EQ(la[0].score_only, lb[0].score_only);
  EXPECT_DOUBLE_EQ(la[0].loss_hat, lb[0].loss_hat);
}

TEST(ExpansionValidation, ScoreUnderNullStaysWithinBounds) {
  const auto m = amplitude_model(100.0);
  const EdgeworthValidation ev = edgeworth_validation(
      m, std::nullopt, StatisticKind::score_null, 100000, SeedSpec{61, 0});
  EXPECT_LE(ev.sup_distance, ev.mc_bound + ev.eps3_bound);
  EXPECT_NEAR(ev.mc_bound, 1.36 / std::sqrt(100000.0), 1e-12);
  EXPECT_NEAR(ev.eps3_bound, 12.0 * std::pow(100.0, -1.5), 1e-12);
  EXPECT_GE(ev.worst_y, -4.0);
  EXPECT_LE(ev.worst_y, 4.0);
}

TEST(ExpansionValidation, AlternativeStatisticsStayWithinBounds) {
  const auto m = amplitude_model(100.0);
  for (StatisticKind kind : {StatisticKind::score_alt, StatisticKind::lr_null,
                             StatisticKind::lr_alt}) {
    const EdgeworthValidation ev =
        edgeworth_validation(m, 1.0, kind, 100000, SeedSpec{62, 0});
    EXPECT_LE(ev.sup_distance, ev.mc_bound + ev.eps3_bound)
        << statistic_kind_name(kind);
  }
  EXPECT_THROW(edgeworth_validation(m, std::nullopt, StatisticKind::lr_alt,
                                    100000, SeedSpec{62, 0}),
               config_error);
}

TEST(ConvergenceSweep, ColumnsAreInternallyConsistent) {
  const auto m = IntensityModel::exp_sine_periods(1.0, 5);
  const auto rows = convergence_sweep(m, 1.0, 0.05,
                                      {m.domain_length(), 2.0 * m.domain_length()},
                                      100000, SeedSpec{71, 0});
  ASSERT_EQ(rows.size(), 2u);
  for (const SweepRow& row : rows) {
    EXPECT_NEAR(row.size2, 0.05, 0.02);
    EXPECT_NEAR(row.size3, 0.05, 0.02);
    EXPECT_GT(row.beta_score3, row.size3);
    EXPECT_GT(row.beta_np_mc, row.size3);
    EXPECT_GT(row.eps2_j_n, 0.0);
    EXPECT_GT(row.r_analytic, 0.0);
    EXPECT_GT(row.diff_residual, 0.0);
    EXPECT_GT(row.gamma_residual, 0.0);
  }
  EXPECT_LT(rows[1].diff_residual, rows[0].diff_residual);
  EXPECT_GT(rows[1].n, rows[0].n);
}

TEST(SeedPartitioning, CalibrationBlockStaysDisjoint) {
  const auto m = amplitude_model(50.0);
  // A replication budget that would collide with the calibration block is
  // rejected up front.
  EXPECT_THROW(estimate_size(m, 0.05, ThresholdKind::third_order,
                             (1LL << 40) + 1, SeedSpec{1, 0}),
               config_error);
}

}  // namespace
}  // namespace poissonht
