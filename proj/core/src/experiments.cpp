#include "poissonht/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "poissonht/errors.hpp"
#include "poissonht/gauss.hpp"

namespace poissonht {

namespace {

// Runs body(i) for each replication index, split into contiguous chunks
// across workers.  Bodies may only write state owned by their index, so the
// result is identical for every thread count.
void for_each_replication(long long count, int threads,
                          const std::function<void(long long)>& body) {
  if (threads <= 1 || count < 2) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(
      std::min<long long>(threads, std::max<long long>(1, count)));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long long chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long long lo = w * chunk;
    const long long hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (long long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void require_reps(long long reps, long long minimum, const char* who) {
  if (reps < minimum) {
    std::ostringstream os;
    os << who << ": need at least " << minimum << " replications";
    throw config_error(os.str());
  }
  if (reps > static_cast<long long>(kCalibrationOffset))
    throw config_error(
        "replications would overlap the calibration seed block");
}

double binomial_se(double p, long long reps) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(reps));
}

long long quantile_index(double alpha, long long reps) {
  const double target = (1.0 - alpha) * static_cast<double>(reps);
  long long j = static_cast<long long>(std::ceil(target - 1e-9));
  return std::max<long long>(1, std::min(reps, j));
}

void validate_n_list(const std::vector<double>& n_list, const char* who) {
  if (n_list.empty()) {
    std::ostringstream os;
    os << who << ": empty window list";
    throw config_error(os.str());
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (!(std::isfinite(n_list[i]) && n_list[i] > 0.0))
      throw config_error("window lengths must be positive");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw config_error("window lengths must be strictly increasing");
  }
}

}  // namespace

const char* test_kind_name(TestKind kind) {
  switch (kind) {
    case TestKind::score2: return "score2";
    case TestKind::score3: return "score3";
    case TestKind::np_analytic: return "np_analytic";
    case TestKind::np_mc: return "np_mc";
  }
  return "unknown";
}

const char* statistic_kind_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::score_null: return "score_null";
    case StatisticKind::score_alt: return "score_alt";
    case StatisticKind::lr_null: return "lr_null";
    case StatisticKind::lr_alt: return "lr_alt";
  }
  return "unknown";
}

PowerEstimate estimate_size(const IntensityModel& model, double alpha,
                            ThresholdKind threshold_kind, long long reps,
                            const SeedSpec& seed,
                            const ExperimentOptions& opts) {
  require_reps(reps, 10000, "size estimate");
  const CoreQuantities core = core_quantities(model, opts.moments);
  const double threshold = threshold_kind == ThresholdKind::second_order
                               ? score_threshold_second(alpha, core)
                               : score_threshold_third(alpha, core);
  const ScoreKernel kernel(model, opts.moments);
  const double theta0 = model.theta0();
  std::vector<unsigned char> reject(static_cast<std::size_t>(reps));
  for_each_replication(reps, opts.threads, [&](long long i) {
    const Realization r = sample(
        model, theta0,
        SeedSpec{seed.master_seed,
                 seed.replication_index + static_cast<std::uint64_t>(i)});
    reject[static_cast<std::size_t>(i)] = kernel(r) > threshold ? 1 : 0;
  });
  PowerEstimate est;
  est.test_name = threshold_kind == ThresholdKind::second_order ? "score2" : "score3";
  est.u = 0.0;
  est.n = model.domain_length();
  est.reps = reps;
  for (const unsigned char b : reject) est.rejections += b;
  est.beta_hat = static_cast<double>(est.rejections) / static_cast<double>(reps);
  est.std_error = binomial_se(est.beta_hat, reps);
  est.master_seed = seed.master_seed;
  return est;
}

PowerEstimate estimate_power(const IntensityModel& model, double u,
                             double alpha, TestKind test_kind, long long reps,
                             const SeedSpec& seed,
                             const ExperimentOptions& opts) {
  if (u == 0.0) {
    if (test_kind == TestKind::score2 || test_kind == TestKind::score3)
      return estimate_size(model, alpha,
                           test_kind == TestKind::score2
                               ? ThresholdKind::second_order
                               : ThresholdKind::third_order,
                           reps, seed, opts);
    throw config_error("power estimate: the benchmark test is degenerate at u = 0");
  }
  if (!(u > 0.0)) throw config_error("power estimate: u must be >= 0");
  require_reps(reps, 10000, "power estimate");

  const bool score_test =
      test_kind == TestKind::score2 || test_kind == TestKind::score3;
  const CoreQuantities core = core_quantities(model, opts.moments);
  const ScoreKernel score_kernel(model, opts.moments);
  const LikelihoodRatioKernel lr_kernel(model, u, opts.moments);
  double threshold = 0.0;
  switch (test_kind) {
    case TestKind::score2:
      threshold = score_threshold_second(alpha, core);
      break;
    case TestKind::score3:
      threshold = score_threshold_third(alpha, core);
      break;
    case TestKind::np_analytic:
      threshold = alternative_quantities(model, u, alpha, opts.moments).b_n;
      break;
    case TestKind::np_mc:
      threshold = np_threshold_mc(
          model, u, alpha, reps,
          SeedSpec{seed.master_seed, seed.replication_index + kCalibrationOffset},
          opts.moments);
      break;
  }
  const double theta_u = lr_kernel.theta_u();
  std::vector<unsigned char> reject(static_cast<std::size_t>(reps));
  for_each_replication(reps, opts.threads, [&](long long i) {
    const Realization r = sample(
        model, theta_u,
        SeedSpec{seed.master_seed,
                 seed.replication_index + static_cast<std::uint64_t>(i)});
    const double stat = score_test ? score_kernel(r) : lr_kernel(r);
    reject[static_cast<std::size_t>(i)] = stat > threshold ? 1 : 0;
  });
  PowerEstimate est;
  est.test_name = test_kind_name(test_kind);
  est.u = u;
  est.n = model.domain_length();
  est.reps = reps;
  for (const unsigned char b : reject) est.rejections += b;
  est.beta_hat = static_cast<double>(est.rejections) / static_cast<double>(reps);
  est.std_error = binomial_se(est.beta_hat, reps);
  est.master_seed = seed.master_seed;
  return est;
}

std::vector<PairedLossEstimate> paired_power_loss(
    const IntensityModel& model, double u, double alpha,
    const std::vector<double>& n_list, long long reps, const SeedSpec& seed,
    const ExperimentOptions& opts) {
  if (!(u > 0.0)) throw config_error("paired loss: u must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("paired loss: alpha must be in (0,1)");
  validate_n_list(n_list, "paired loss");
  require_reps(reps, 100000, "paired loss");

  std::vector<PairedLossEstimate> out;
  for (const double n : n_list) {
    const IntensityModel m = model.with_domain_length(n);
    const ScoreKernel score_kernel(m, opts.moments);
    const LikelihoodRatioKernel lr_kernel(m, u, opts.moments);
    const double theta0 = m.theta0();
    const double theta_u = lr_kernel.theta_u();

    // Calibration under theta0: both statistics on the same realizations,
    // thresholds at the same order statistic, hence identical empirical size.
    std::vector<double> cal_score(static_cast<std::size_t>(reps));
    std::vector<double> cal_lr(static_cast<std::size_t>(reps));
    for_each_replication(reps, opts.threads, [&](long long i) {
      const Realization r = sample(
          m, theta0,
          SeedSpec{seed.master_seed, seed.replication_index +
                                         kCalibrationOffset +
                                         static_cast<std::uint64_t>(i)});
      cal_score[static_cast<std::size_t>(i)] = score_kernel(r);
      cal_lr[static_cast<std::size_t>(i)] = lr_kernel(r);
    });
    const long long j = quantile_index(alpha, reps);
    auto order_stat = [&](const std::vector<double>& values) {
      std::vector<double> tmp(values);
      auto nth = tmp.begin() + static_cast<std::ptrdiff_t>(j - 1);
      std::nth_element(tmp.begin(), nth, tmp.end());
      return *nth;
    };
    const double c_score = order_stat(cal_score);
    const double c_np = order_stat(cal_lr);

    // Both thresholds carry empirical-quantile noise from the same
    // calibration sample.  The component common to the two tests cancels in
    // the power difference; what survives is the calibration disagreement
    // rate, amplified by the density ratio of each statistic at its critical
    // point under theta_u versus theta0, phi(z - u)/phi(z) to first order.
    long long cal_disagree = 0;
    for (long long i = 0; i < reps; ++i) {
      const bool rn = cal_lr[static_cast<std::size_t>(i)] > c_np;
      const bool rs = cal_score[static_cast<std::size_t>(i)] > c_score;
      if (rn != rs) ++cal_disagree;
    }

    // Evaluation under theta_u on common realizations.
    std::vector<unsigned char> np_flag(static_cast<std::size_t>(reps));
    std::vector<unsigned char> score_flag(static_cast<std::size_t>(reps));
    for_each_replication(reps, opts.threads, [&](long long i) {
      const Realization r = sample(
          m, theta_u,
          SeedSpec{seed.master_seed,
                   seed.replication_index + static_cast<std::uint64_t>(i)});
      const bool rn = lr_kernel(r) > c_np;
      const bool rs = score_kernel(r) > c_score;
      if (m.family() == Family::homogeneous && rn != rs)
        throw invariant_error(
            "paired loss: homogeneous indicators disagreed; both tests are "
            "monotone in the count and must match after size calibration");
      np_flag[static_cast<std::size_t>(i)] = rn ? 1 : 0;
      score_flag[static_cast<std::size_t>(i)] = rs ? 1 : 0;
    });

    PairedLossEstimate est;
    est.u = u;
    est.n = n;
    est.reps = reps;
    for (long long i = 0; i < reps; ++i) {
      const int d = static_cast<int>(np_flag[static_cast<std::size_t>(i)]) -
                    static_cast<int>(score_flag[static_cast<std::size_t>(i)]);
      if (d > 0) ++est.np_only;
      if (d < 0) ++est.score_only;
    }
    est.cal_disagree = cal_disagree;
    const double r = static_cast<double>(reps);
    const double mean = static_cast<double>(est.np_only - est.score_only) / r;
    const double sumsq = static_cast<double>(est.np_only + est.score_only);
    const double var = (sumsq - r * mean * mean) / (r - 1.0);
    const double z = normal_quantile(1.0 - alpha);
    const double rho = normal_pdf(z - u) / normal_pdf(z);
    const double threshold_var =
        rho * rho * static_cast<double>(cal_disagree) / r;
    const double eps = m.eps_n();
    const double scale = 1.0 / (eps * eps);
    est.loss_hat = scale * mean;
    est.std_error = scale * std::sqrt(std::max(0.0, var + threshold_var) / r);
    est.r_analytic = power_loss_limit(m, u, alpha, opts.moments);
    out.push_back(est);
  }
  return out;
}

EdgeworthValidation edgeworth_validation(const IntensityModel& model,
                                         std::optional<double> u,
                                         StatisticKind statistic_kind,
                                         long long reps, const SeedSpec& seed,
                                         const ExperimentOptions& opts) {
  require_reps(reps, 100000, "expansion validation");
  const bool needs_u = statistic_kind != StatisticKind::score_null;
  if (needs_u && !(u && *u > 0.0))
    throw config_error("expansion validation: this statistic needs u > 0");

  const CoreQuantities core = core_quantities(model, opts.moments);
  double center = 0.0, spread = 1.0;
  ExpansionInput input{core.gamma3, core.gamma4, core.eps_n};
  double theta_sample = model.theta0();
  const bool lr_statistic = statistic_kind == StatisticKind::lr_null ||
                            statistic_kind == StatisticKind::lr_alt;
  // Cumulants and moments do not depend on the test level; alpha below only
  // fills threshold fields that are ignored here.
  if (needs_u) {
    const AlternativeQuantities aq =
        alternative_quantities(model, *u, 0.05, opts.moments);
    switch (statistic_kind) {
      case StatisticKind::score_alt:
        center = aq.m_n_u;
        spread = aq.eta_n;
        input = ExpansionInput{aq.gamma3_u, aq.gamma4_u, core.eps_n};
        theta_sample = model.theta0() + core.phi_n * *u;
        break;
      case StatisticKind::lr_null:
        center = aq.mu_n0;
        spread = aq.sigma_n0;
        input = ExpansionInput{aq.gamma3p0, aq.gamma4p0, core.eps_n};
        break;
      case StatisticKind::lr_alt:
        center = aq.mu_n_u;
        spread = aq.sigma_n_u;
        input = ExpansionInput{aq.gamma3p_u, aq.gamma4p_u, core.eps_n};
        theta_sample = model.theta0() + core.phi_n * *u;
        break;
      default:
        break;
    }
  }

  const ScoreKernel score_kernel(model, opts.moments);
  const LikelihoodRatioKernel lr_kernel(model, needs_u ? *u : 0.0,
                                        opts.moments);
  std::vector<double> values(static_cast<std::size_t>(reps));
  for_each_replication(reps, opts.threads, [&](long long i) {
    const Realization r = sample(
        model, theta_sample,
        SeedSpec{seed.master_seed,
                 seed.replication_index + static_cast<std::uint64_t>(i)});
    const double stat = lr_statistic ? lr_kernel(r) : score_kernel(r);
    values[static_cast<std::size_t>(i)] = (stat - center) / spread;
  });
  std::sort(values.begin(), values.end());

  EdgeworthValidation rep;
  rep.mc_bound = 1.36 / std::sqrt(static_cast<double>(reps));
  rep.eps3_bound = 12.0 * std::pow(model.eps_n(), 3);
  const int kGrid = 1000;
  for (int k = 0; k < kGrid; ++k) {
    const double y = -4.0 + 8.0 * k / (kGrid - 1);
    const double empirical =
        static_cast<double>(std::upper_bound(values.begin(), values.end(), y) -
                            values.begin()) /
        static_cast<double>(reps);
    const double expansion = edgeworth_cdf(y, input).value;
    const double d = std::abs(empirical - expansion);
    if (d > rep.sup_distance) {
      rep.sup_distance = d;
      rep.worst_y = y;
    }
  }
  return rep;
}

std::vector<SweepRow> convergence_sweep(const IntensityModel& model, double u,
                                        double alpha,
                                        const std::vector<double>& n_list,
                                        long long reps, const SeedSpec& seed,
                                        const ExperimentOptions& opts) {
  if (!(u > 0.0)) throw config_error("sweep: u must be positive");
  validate_n_list(n_list, "sweep");
  std::vector<SweepRow> rows;
  for (const double n : n_list) {
    const IntensityModel m = model.with_domain_length(n);
    SweepRow row;
    row.n = n;
    row.size2 =
        estimate_size(m, alpha, ThresholdKind::second_order, reps, seed, opts)
            .beta_hat;
    row.size3 =
        estimate_size(m, alpha, ThresholdKind::third_order, reps, seed, opts)
            .beta_hat;
    row.beta_score3 =
        estimate_power(m, u, alpha, TestKind::score3, reps, seed, opts).beta_hat;
    row.beta_np_mc =
        estimate_power(m, u, alpha, TestKind::np_mc, reps, seed, opts).beta_hat;
    const auto loss = paired_power_loss(m, u, alpha, {n}, reps, seed, opts);
    row.loss_hat = loss[0].loss_hat;
    row.loss_se = loss[0].std_error;
    row.r_analytic = loss[0].r_analytic;
    row.eps2_j_n = core_quantities(m, opts.moments).loss_limit_scale;
    if (m.max_deriv() >= 3) {
      const CenteringReport cr = expansion_centering(m, u, alpha, opts.moments);
      row.diff_residual = std::abs(cr.diff_direct - cr.diff_series);
      row.gamma_residual =
          std::abs(cr.gamma3_diff_direct - cr.gamma3_diff_series);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace poissonht
