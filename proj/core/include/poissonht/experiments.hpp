#pragma once

// Monte Carlo harness: empirical size and power, the paired power-loss
// estimator against the Neyman-Pearson benchmark, Edgeworth-vs-empirical
// distribution validation, and the convergence sweep that aggregates them.
//
// Seeding layout: replication i of an operation draws its stream from
// {master_seed, base + i}.  Evaluation blocks start at the caller's
// replication_index; calibration blocks start kCalibrationOffset above it,
// so the two never overlap for any feasible reps.  All estimators are
// deterministic functions of (model, parameters, SeedSpec, thread count is
// irrelevant: indices own their streams and reductions are ordered).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poissonht/inference.hpp"

namespace poissonht {

inline constexpr std::uint64_t kCalibrationOffset = 1ULL << 40;

struct ExperimentOptions {
  MomentOptions moments{};
  int threads = 1;  // worker count; results are identical for any value
};

enum class ThresholdKind { second_order, third_order };
enum class TestKind { score2, score3, np_analytic, np_mc };
const char* test_kind_name(TestKind kind);

struct PowerEstimate {
  std::string test_name;  // score2 | score3 | np_analytic | np_mc
  double u = 0.0;
  double n = 0.0;
  long long reps = 0;
  long long rejections = 0;
  double beta_hat = 0.0;
  double std_error = 0.0;  // sqrt(beta (1 - beta) / reps)
  std::uint64_t master_seed = 0;
};

// Rejection frequency under theta0 with the chosen analytic threshold.
PowerEstimate estimate_size(const IntensityModel& model, double alpha,
                            ThresholdKind threshold_kind, long long reps,
                            const SeedSpec& seed,
                            const ExperimentOptions& opts = {});

// Rejection frequency under theta_u for the named test.  u = 0 with a score
// test reduces to estimate_size.
PowerEstimate estimate_power(const IntensityModel& model, double u,
                             double alpha, TestKind test_kind, long long reps,
                             const SeedSpec& seed,
                             const ExperimentOptions& opts = {});

// Power loss of the score test against the Neyman-Pearson benchmark from
// common realizations.  Both thresholds are the same-order statistic of a
// shared calibration block under theta0, so the two tests have exactly
// matched empirical size; the estimator then only sees realizations where
// the tests disagree.
struct PairedLossEstimate {
  double u = 0.0;
  double n = 0.0;
  long long reps = 0;
  long long np_only = 0;       // NP rejects, score does not
  long long score_only = 0;    // score rejects, NP does not
  long long cal_disagree = 0;  // calibration realizations where the tests split
  double loss_hat = 0.0;       // eps_n^{-2} (beta_np_hat - beta_score_hat)
  double std_error = 0.0;      // eps_n^{-2} SE: evaluation and threshold noise
  double r_analytic = 0.0;     // analytic power-loss surrogate at this n
};
std::vector<PairedLossEstimate> paired_power_loss(
    const IntensityModel& model, double u, double alpha,
    const std::vector<double>& n_list, long long reps, const SeedSpec& seed,
    const ExperimentOptions& opts = {});

// Which normalized statistic to compare against its expansion.
enum class StatisticKind { score_null, score_alt, lr_null, lr_alt };
const char* statistic_kind_name(StatisticKind kind);

struct EdgeworthValidation {
  double sup_distance = 0.0;  // sup over the y-grid of |empirical - expansion|
  double mc_bound = 0.0;      // 1.36 / sqrt(reps), Kolmogorov scale
  double eps3_bound = 0.0;    // 12 eps_n^3, expansion remainder scale
  double worst_y = 0.0;
};
EdgeworthValidation edgeworth_validation(const IntensityModel& model,
                                         std::optional<double> u,
                                         StatisticKind statistic_kind,
                                         long long reps, const SeedSpec& seed,
                                         const ExperimentOptions& opts = {});

struct SweepRow {
  double n = 0.0;
  double size2 = 0.0, size3 = 0.0;           // empirical sizes
  double beta_score3 = 0.0, beta_np_mc = 0.0;  // empirical powers
  double loss_hat = 0.0, loss_se = 0.0, r_analytic = 0.0;
  double eps2_j_n = 0.0;        // eps_n^{-2} J_n at this n
  double diff_residual = 0.0;   // |direct - series| for A_n - a_n
  double gamma_residual = 0.0;  // same for gamma3'(u) - gamma3(u)
};
std::vector<SweepRow> convergence_sweep(const IntensityModel& model, double u,
                                        double alpha,
                                        const std::vector<double>& n_list,
                                        long long reps, const SeedSpec& seed,
                                        const ExperimentOptions& opts = {});

}  // namespace poissonht
