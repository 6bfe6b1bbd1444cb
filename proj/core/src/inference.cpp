#include "poissonht/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "poissonht/errors.hpp"
#include "poissonht/gauss.hpp"

namespace poissonht {

namespace {

struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double get() const { return sum + comp; }
};

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void check_window(const Realization& realization, const IntensityModel& model) {
  if (std::abs(realization.domain - model.domain_length()) >
      1e-9 * std::max(1.0, model.domain_length()))
    throw config_error("statistic: realization window does not match the model");
}

// Integral over [0, n] of an integrand mixing theta0 and theta_u.  When the
// x-period does not move with theta the integrand is periodic and one
// period suffices.
double mixed_integral(const IntensityModel& model,
                      const std::function<double(double)>& f,
                      const MomentOptions& opts) {
  if (opts.periodic_fast_path && model.period_theta_independent()) {
    if (const auto m = whole_periods(model))
      return static_cast<double>(*m) *
             integrate(f, 0.0, *model.period(), opts.quad);
  }
  return integrate(f, 0.0, model.domain_length(),
                   resolved_quad_options(model, opts.quad,
                                         model.domain_length()));
}

// S'(theta0, x)/S(theta0, x) with the family's cancellations applied.
std::function<double(double)> make_ratio(const IntensityModel& model) {
  const double theta0 = model.theta0();
  const double lambda = model.dark_current();
  switch (model.family()) {
    case Family::homogeneous:
      return [theta0](double) { return 1.0 / theta0; };
    case Family::amplitude: {
      const BaseSignal base = model.base();
      return [=](double x) {
        const double b = base.eval(0, x);
        return b / (theta0 * b + lambda);
      };
    }
    case Family::phase: {
      const BaseSignal base = model.base();
      return [=](double x) {
        return base.eval(1, theta0 + x) / (base.eval(0, theta0 + x) + lambda);
      };
    }
    case Family::frequency: {
      const BaseSignal base = model.base();
      return [=](double x) {
        return x * base.eval(1, theta0 * x) /
               (base.eval(0, theta0 * x) + lambda);
      };
    }
    case Family::exp_sine:
      return [theta0](double x) { return x * std::cos(theta0 * x); };
    case Family::custom:
      return [model, theta0](double x) {
        const double s = model.eval(0, theta0, x);
        if (!(s > 0.0)) {
          std::ostringstream os;
          os << "score: intensity not positive at event x = " << x;
          throw invariant_error(os.str());
        }
        return model.eval(1, theta0, x) / s;
      };
  }
  throw config_error("score: unknown family");
}

// ln S(theta_u, x) - ln S(theta0, x), reduced per family.
std::function<double(double)> make_log_ratio(const IntensityModel& model,
                                             double theta_u) {
  const double theta0 = model.theta0();
  const double lambda = model.dark_current();
  switch (model.family()) {
    case Family::homogeneous: {
      const double c = std::log(theta_u / theta0);
      return [c](double) { return c; };
    }
    case Family::amplitude: {
      const BaseSignal base = model.base();
      return [=](double x) {
        const double b = base.eval(0, x);
        return std::log((theta_u * b + lambda) / (theta0 * b + lambda));
      };
    }
    case Family::phase: {
      const BaseSignal base = model.base();
      return [=](double x) {
        return std::log((base.eval(0, theta_u + x) + lambda) /
                        (base.eval(0, theta0 + x) + lambda));
      };
    }
    case Family::frequency: {
      const BaseSignal base = model.base();
      return [=](double x) {
        return std::log((base.eval(0, theta_u * x) + lambda) /
                        (base.eval(0, theta0 * x) + lambda));
      };
    }
    case Family::exp_sine:
      return [=](double x) {
        return std::sin(theta_u * x) - std::sin(theta0 * x);
      };
    case Family::custom:
      return [model, theta0, theta_u](double x) {
        const double s0 = model.eval(0, theta0, x);
        const double su = model.eval(0, theta_u, x);
        if (!(s0 > 0.0 && su > 0.0)) {
          std::ostringstream os;
          os << "likelihood ratio: intensity not positive at event x = " << x;
          throw invariant_error(os.str());
        }
        return std::log(su / s0);
      };
  }
  throw config_error("likelihood ratio: unknown family");
}

double theta_at(const IntensityModel& model, double u, double phi) {
  const double theta_u = model.theta0() + phi * u;
  if (std::abs(theta_u - model.theta0()) > model.delta_theta_max()) {
    std::ostringstream os;
    os << "alternative: theta_u = " << theta_u
       << " leaves the validated neighborhood of theta0 (max offset "
       << model.delta_theta_max() << ")";
    throw config_error(os.str());
  }
  return theta_u;
}

}  // namespace

ScoreKernel::ScoreKernel(const IntensityModel& model, const MomentOptions& opts)
    : model_(model), ratio_(make_ratio(model)) {
  const double fisher = moment_I(model_, 1, 2, 0, 0, opts);
  if (!(std::isfinite(fisher) && fisher > 0.0))
    throw invariant_error("score: Fisher information must be positive");
  phi_ = 1.0 / std::sqrt(fisher);
  compensator_ = moment_I(model_, 0, 1, 0, 0, opts);
}

double ScoreKernel::operator()(const Realization& realization) const {
  check_window(realization, model_);
  Accumulator acc;
  for (const double x : realization.points) acc.add(ratio_(x));
  return phi_ * (acc.get() - compensator_);
}

LikelihoodRatioKernel::LikelihoodRatioKernel(const IntensityModel& model,
                                             double u,
                                             const MomentOptions& opts)
    : model_(model), u_(u) {
  if (!(std::isfinite(u) && u >= 0.0))
    throw config_error("likelihood ratio: u must be finite and >= 0");
  const double fisher = moment_I(model_, 1, 2, 0, 0, opts);
  if (!(std::isfinite(fisher) && fisher > 0.0))
    throw invariant_error("likelihood ratio: Fisher information must be positive");
  theta_u_ = theta_at(model_, u, 1.0 / std::sqrt(fisher));
  log_ratio_ = make_log_ratio(model_, theta_u_);
  const double theta0 = model_.theta0();
  compensator_ = u == 0.0
                     ? 0.0
                     : mixed_integral(
                           model_,
                           [&](double x) {
                             return model_.eval(0, theta_u_, x) -
                                    model_.eval(0, theta0, x);
                           },
                           opts);
}

double LikelihoodRatioKernel::operator()(const Realization& realization) const {
  check_window(realization, model_);
  if (u_ == 0.0) return 0.0;
  Accumulator acc;
  for (const double x : realization.points) acc.add(log_ratio_(x));
  return acc.get() - compensator_;
}

double score_statistic(const Realization& realization,
                       const IntensityModel& model, const MomentOptions& opts) {
  return ScoreKernel(model, opts)(realization);
}

double log_likelihood_ratio(const Realization& realization,
                            const IntensityModel& model, double u,
                            const MomentOptions& opts) {
  return LikelihoodRatioKernel(model, u, opts)(realization);
}

double score_threshold_second(double alpha, const CoreQuantities& core) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("threshold: alpha must be in (0,1)");
  const double z = normal_quantile(1.0 - alpha);
  return z + core.gamma3 / 6.0 * hermite(2, z);
}

double score_threshold_third(double alpha, const CoreQuantities& core) {
  return edgeworth_quantile(alpha,
                            ExpansionInput{core.gamma3, core.gamma4, core.eps_n});
}

AlternativeQuantities alternative_quantities(const IntensityModel& model,
                                             double u, double alpha,
                                             const MomentOptions& opts) {
  if (!(std::isfinite(u) && u >= 0.0))
    throw config_error("alternative: u must be finite and >= 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("alternative: alpha must be in (0,1)");
  const CoreQuantities core = core_quantities(model, opts);
  const double phi = core.phi_n;
  const double theta0 = model.theta0();
  const double theta_u = theta_at(model, u, phi);
  const auto ratio = make_ratio(model);
  const auto log_ratio = make_log_ratio(model, theta_u);
  auto s0 = [&](double x) { return model.eval(0, theta0, x); };
  auto su = [&](double x) { return model.eval(0, theta_u, x); };
  auto integral = [&](const std::function<double(double)>& f) {
    return mixed_integral(model, f, opts);
  };

  AlternativeQuantities q;
  q.u = u;
  q.degenerate = u == 0.0;

  // Score statistic under theta_u: mean, variance and cumulants of
  // phi int (S'/S)(theta0, x) dX - compensator.
  q.m_n_u = q.degenerate
                ? 0.0
                : phi * integral([&](double x) {
                    return ratio(x) * (su(x) - s0(x));
                  });
  const double eta2 =
      phi * phi * integral([&](double x) { return ratio(x) * ratio(x) * su(x); });
  if (!(std::isfinite(eta2) && eta2 > 0.0))
    throw numerical_error("alternative: score variance must be positive");
  q.eta_n = std::sqrt(eta2);
  q.gamma3_u = ipow(phi / q.eta_n, 3) *
               integral([&](double x) { return ipow(ratio(x), 3) * su(x); });
  q.gamma4_u = ipow(phi / q.eta_n, 4) *
               integral([&](double x) { return ipow(ratio(x), 4) * su(x); });

  const double c_third = score_threshold_third(alpha, core);
  q.a_n = (q.m_n_u - c_third) / q.eta_n;

  if (q.degenerate) return q;  // likelihood-ratio fields stay zero

  // Log likelihood ratio under both measures.
  q.mu_n_u = integral(
      [&](double x) { return log_ratio(x) * su(x) - su(x) + s0(x); });
  const double sig2_u =
      integral([&](double x) { return log_ratio(x) * log_ratio(x) * su(x); });
  q.mu_n0 = integral(
      [&](double x) { return log_ratio(x) * s0(x) - su(x) + s0(x); });
  const double sig2_0 =
      integral([&](double x) { return log_ratio(x) * log_ratio(x) * s0(x); });
  if (!(sig2_u > 0.0 && sig2_0 > 0.0))
    throw numerical_error("alternative: log-LR variance must be positive");
  q.sigma_n_u = std::sqrt(sig2_u);
  q.sigma_n0 = std::sqrt(sig2_0);
  q.gamma3p_u =
      integral([&](double x) { return ipow(log_ratio(x), 3) * su(x); }) /
      ipow(q.sigma_n_u, 3);
  q.gamma4p_u =
      integral([&](double x) { return ipow(log_ratio(x), 4) * su(x); }) /
      ipow(q.sigma_n_u, 4);
  q.gamma3p0 =
      integral([&](double x) { return ipow(log_ratio(x), 3) * s0(x); }) /
      ipow(q.sigma_n0, 3);
  q.gamma4p0 =
      integral([&](double x) { return ipow(log_ratio(x), 4) * s0(x); }) /
      ipow(q.sigma_n0, 4);

  q.b_n = q.mu_n0 +
          q.sigma_n0 * edgeworth_quantile(
                           alpha, ExpansionInput{q.gamma3p0, q.gamma4p0,
                                                 core.eps_n});
  q.A_n = (q.mu_n_u - q.b_n) / q.sigma_n_u;
  return q;
}

namespace {

struct SeriesContext {
  double u, z, delta, phi;
  double g3, g4;          // gamma3, gamma4 at theta0
  double i111, i221, i230, i340, i102, i1101;
  double delta1;          // leading centering shift
};

SeriesContext make_series_context(const IntensityModel& model, double u,
                                  double alpha, const MomentOptions& opts,
                                  bool need_third_deriv) {
  if (!(u > 0.0)) throw config_error("expansion: u must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("expansion: alpha must be in (0,1)");
  if (need_third_deriv && model.max_deriv() < 3)
    throw config_error("expansion: model must expose three theta-derivatives");
  MomentTable tab(model, opts);
  SeriesContext c{};
  const double fisher = tab.I(1, 2, 0);
  if (!(std::isfinite(fisher) && fisher > 0.0))
    throw invariant_error("expansion: Fisher information must be positive");
  c.u = u;
  c.z = normal_quantile(1.0 - alpha);
  c.delta = u - c.z;
  c.phi = 1.0 / std::sqrt(fisher);
  c.g3 = ipow(c.phi, 3) * tab.I(2, 3, 0);
  c.g4 = ipow(c.phi, 4) * tab.I(3, 4, 0);
  c.i111 = ipow(c.phi, 3) * tab.I(1, 1, 1);
  c.i221 = ipow(c.phi, 4) * tab.I(2, 2, 1);
  c.i230 = ipow(c.phi, 3) * tab.I(2, 3, 0);
  c.i340 = ipow(c.phi, 4) * tab.I(3, 4, 0);
  c.i102 = ipow(c.phi, 4) * tab.I(1, 0, 2);
  c.i1101 = need_third_deriv ? ipow(c.phi, 4) * tab.I(1, 1, 0, 1) : 0.0;
  c.delta1 = 0.5 * u * u * c.i111 +
             (1.0 - c.z * c.z - 3.0 * u * c.delta) / 6.0 * c.g3;
  return c;
}

// Series for a_n = (m_n(u) - c_n)/eta_n through order eps^2, including the
// third-order threshold pieces.
double a_series_value(const SeriesContext& c) {
  const double u = c.u, z = c.z, d = c.delta;
  const double one_mz2 = 1.0 - z * z;
  return d + c.delta1 + ipow(u, 3) / 6.0 * c.i1101 +
         (9.0 * u * u * d - 2.0 * u * one_mz2) / 24.0 * c.i230 * c.i230 -
         u * u * d / 4.0 * c.i221 - ipow(u, 3) / 4.0 * c.i230 * c.i111 -
         hermite(3, z) / 24.0 * c.g4 - hermite(5, z) / 72.0 * c.g3 * c.g3;
}

// Series for A_n - a_n through order eps^2.
double diff_series_value(const SeriesContext& c) {
  const double u = c.u, z = c.z;
  const double one_mz2 = 1.0 - z * z;
  const double u3 = ipow(u, 3), u2z = u * u * z;
  return u3 / 8.0 * c.i102 -
         (2.0 * u3 - 2.0 * u2z - u * one_mz2) / 4.0 * c.i221 +
         (9.0 * u3 - 12.0 * u2z - 6.0 * u * one_mz2) / 24.0 * c.i340 -
         (9.0 * u3 - 12.0 * u2z - 6.0 * u * one_mz2) / 24.0 * c.i230 * c.i230 +
         (6.0 * u3 - 6.0 * u2z - 3.0 * u * one_mz2) / 12.0 * c.i230 * c.i111 -
         u3 / 8.0 * c.i111 * c.i111;
}

double gamma3_diff_series_value(const SeriesContext& c) {
  return 1.5 * c.u *
         (c.i221 + c.i230 * c.i230 - c.i340 - c.i230 * c.i111);
}

}  // namespace

CenteringReport expansion_centering(const IntensityModel& model, double u,
                                    double alpha, const MomentOptions& opts) {
  const SeriesContext c = make_series_context(model, u, alpha, opts, true);
  CenteringReport rep;
  rep.a_n_series = a_series_value(c);
  rep.diff_series = diff_series_value(c);
  rep.A_n_series = rep.a_n_series + rep.diff_series;
  rep.gamma3_diff_series = gamma3_diff_series_value(c);
  const AlternativeQuantities q = alternative_quantities(model, u, alpha, opts);
  rep.a_n_direct = q.a_n;
  rep.A_n_direct = q.A_n;
  rep.diff_direct = q.A_n - q.a_n;
  rep.gamma3_diff_direct = q.gamma3p_u - q.gamma3_u;
  return rep;
}

double power_representation_second(const IntensityModel& model, double u,
                                   double alpha, const MomentOptions& opts) {
  const SeriesContext c = make_series_context(model, u, alpha, opts, false);
  const double q_n = u * (c.z - 2.0 * u) / 6.0 * c.g3 +
                     0.5 * u * u * c.i111;
  return normal_cdf(c.delta) + q_n * normal_pdf(c.delta);
}

double power_representation_third(const IntensityModel& model, double u,
                                  double alpha, const MomentOptions& opts) {
  const SeriesContext c = make_series_context(model, u, alpha, opts, true);
  const double u2 = c.u * c.u, u3 = u2 * c.u;
  const double d = c.delta, z = c.z;
  const double r1 = c.u * (z - 2.0 * c.u) / 6.0 * c.g3 + 0.5 * u2 * c.i111;
  const double r2 = u3 / 6.0 * c.i1101 +
                    (9.0 * u2 * d - 2.0 * c.u * (1.0 - z * z)) / 24.0 *
                        c.g3 * c.g3 -
                    u2 * d / 4.0 * c.i221 - u3 / 4.0 * c.i111 * c.g3 -
                    hermite(3, z) / 24.0 * c.g4 -
                    hermite(5, z) / 72.0 * c.g3 * c.g3 +
                    c.u * hermite(2, d) / 6.0 * c.g4 -
                    c.u * hermite(2, d) / 4.0 * c.g3 * c.g3 -
                    c.g4 / 24.0 * hermite(3, d) -
                    c.g3 * c.g3 / 72.0 * hermite(5, d) -
                    d / 2.0 * c.delta1 * c.delta1 -
                    c.g3 / 6.0 * hermite(3, d) * c.delta1;
  return normal_cdf(d) + (r1 + r2) * normal_pdf(d);
}

double np_threshold_mc(const IntensityModel& model, double u, double alpha,
                       long long reps, const SeedSpec& seed,
                       const MomentOptions& opts) {
  if (!(u > 0.0))
    throw config_error("threshold calibration: u must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("threshold calibration: alpha must be in (0,1)");
  if (reps < 10000)
    throw config_error("threshold calibration: need at least 10^4 replications");
  const LikelihoodRatioKernel kernel(model, u, opts);
  std::vector<double> values(static_cast<std::size_t>(reps));
  for (long long i = 0; i < reps; ++i) {
    const Realization r =
        sample(model, model.theta0(),
               SeedSpec{seed.master_seed, seed.replication_index + static_cast<std::uint64_t>(i)});
    values[static_cast<std::size_t>(i)] = kernel(r);
  }
  std::sort(values.begin(), values.end());
  const double target = (1.0 - alpha) * static_cast<double>(reps);
  long long j = static_cast<long long>(std::ceil(target - 1e-9));
  j = std::max<long long>(1, std::min(reps, j));
  return values[static_cast<std::size_t>(j - 1)];
}

}  // namespace poissonht
