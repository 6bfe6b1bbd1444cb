#pragma once

// Test statistics on realizations, thresholds of second and third order,
// the u-dependent distribution quantities at the local alternative
// theta_u = theta0 + phi_n u (all by direct quadrature), the polynomial
// expansions of the centering constants used as cross-checks, analytic
// power representations, and the Monte Carlo threshold calibrator.

#include <functional>

#include "poissonht/edgeworth.hpp"
#include "poissonht/moments.hpp"
#include "poissonht/sampler.hpp"

namespace poissonht {

struct TestOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;  // strict inequality: statistic > threshold
};

inline TestOutcome run_test(double statistic, double threshold) {
  return TestOutcome{statistic, threshold, statistic > threshold};
}

// Normalized score statistic evaluator with the deterministic pieces
// (phi_n and the compensator integral) precomputed once, for use across
// many realizations of one model.
class ScoreKernel {
 public:
  explicit ScoreKernel(const IntensityModel& model,
                       const MomentOptions& opts = {});
  // phi_n [ sum_i S'(theta0, x_i)/S(theta0, x_i) - int S'(theta0, x) dx ]
  double operator()(const Realization& realization) const;
  double phi() const { return phi_; }

 private:
  IntensityModel model_;
  std::function<double(double)> ratio_;  // S'/S at theta0, family-reduced
  double phi_ = 0.0;
  double compensator_ = 0.0;  // int S'(theta0) dx
};

// Log likelihood ratio evaluator for the alternative at a fixed u.
class LikelihoodRatioKernel {
 public:
  LikelihoodRatioKernel(const IntensityModel& model, double u,
                        const MomentOptions& opts = {});
  // sum_i ln[S(theta_u, x_i)/S(theta0, x_i)] - int [S(theta_u) - S(theta0)] dx
  double operator()(const Realization& realization) const;
  double theta_u() const { return theta_u_; }
  double u() const { return u_; }

 private:
  IntensityModel model_;
  std::function<double(double)> log_ratio_;  // ln(S_u/S_0), family-reduced
  double u_ = 0.0;
  double theta_u_ = 0.0;
  double compensator_ = 0.0;  // int (S_u - S_0) dx
};

double score_statistic(const Realization& realization,
                       const IntensityModel& model,
                       const MomentOptions& opts = {});

double log_likelihood_ratio(const Realization& realization,
                            const IntensityModel& model, double u,
                            const MomentOptions& opts = {});

// z_alpha + (gamma3/6) H2(z_alpha): the one-term corrected threshold.
double score_threshold_second(double alpha, const CoreQuantities& core);

// Full Cornish-Fisher threshold; identical to
// edgeworth_quantile(alpha, {gamma3, gamma4}).
double score_threshold_third(double alpha, const CoreQuantities& core);

// Distributional quantities of the score statistic and the log likelihood
// ratio under both measures, each computed by direct quadrature of its
// defining integral at theta_u.  The cumulants follow the Poisson integral
// rule kappa_r(int g dX) = int g^r S dx.
struct AlternativeQuantities {
  double u = 0.0;
  bool degenerate = false;  // u == 0: likelihood-ratio fields are all zero
  double m_n_u = 0.0;       // mean of the score under theta_u
  double eta_n = 0.0;       // sd of the score under theta_u
  double mu_n_u = 0.0;      // mean of the log LR under theta_u
  double sigma_n_u = 0.0;   // sd of the log LR under theta_u
  double mu_n0 = 0.0;       // mean of the log LR under theta0
  double sigma_n0 = 0.0;    // sd of the log LR under theta0
  double gamma3_u = 0.0, gamma4_u = 0.0;    // score cumulants under theta_u
  double gamma3p_u = 0.0, gamma4p_u = 0.0;  // log-LR cumulants under theta_u
  double gamma3p0 = 0.0, gamma4p0 = 0.0;    // log-LR cumulants under theta0
  double a_n = 0.0;  // (m_n_u - third-order threshold) / eta_n
  double A_n = 0.0;  // (mu_n_u - b_n) / sigma_n_u
  double b_n = 0.0;  // corrected quantile of the log LR under theta0
};
AlternativeQuantities alternative_quantities(const IntensityModel& model,
                                             double u, double alpha,
                                             const MomentOptions& opts = {});

// Polynomial expansions of a_n, A_n, A_n - a_n and gamma3'(u) - gamma3(u)
// in phi-weighted moments, next to the direct-quadrature values they
// approximate.  The series carry O(eps^3) remainders by construction, so
// |series - direct| shrinking at that rate validates both routes.
struct CenteringReport {
  double a_n_series = 0.0;
  double A_n_series = 0.0;
  double diff_series = 0.0;  // series for A_n - a_n
  double gamma3_diff_series = 0.0;
  double a_n_direct = 0.0;
  double A_n_direct = 0.0;
  double diff_direct = 0.0;
  double gamma3_diff_direct = 0.0;
};
CenteringReport expansion_centering(const IntensityModel& model, double u,
                                    double alpha,
                                    const MomentOptions& opts = {});

// N(u - z) + Q_n(u) n(u - z) with
// Q_n(u) = (u(z - 2u)/6) gamma3 + (phi^3 u^2 / 2) I(1,1,1).
double power_representation_second(const IntensityModel& model, double u,
                                   double alpha,
                                   const MomentOptions& opts = {});

// N(u - z) + n(u - z)(r_1 + r_2), the two-term refinement; r_1 = Q_n(u).
double power_representation_third(const IntensityModel& model, double u,
                                  double alpha,
                                  const MomentOptions& opts = {});

// Empirical (1 - alpha) quantile of the log likelihood ratio over reps
// realizations sampled under theta0; the size-exact benchmark threshold.
// Replication i uses seed {seed.master_seed, seed.replication_index + i}.
double np_threshold_mc(const IntensityModel& model, double u, double alpha,
                       long long reps, const SeedSpec& seed,
                       const MomentOptions& opts = {});

}  // namespace poissonht
