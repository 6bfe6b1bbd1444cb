#include "poissonht/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poissonht/errors.hpp"
#include "poissonht/gauss.hpp"

namespace poissonht {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// Neumaier compensated sum, matching the quadrature reduction.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double get() const { return sum + comp; }
};

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// sum_{m=0}^{M-1} m^p
double power_sum(long long M, int p) {
  if (p == 0) return static_cast<double>(M);
  Accumulator acc;
  for (long long m = 1; m < M; ++m) acc.add(ipow(static_cast<double>(m), p));
  return acc.get();
}

}  // namespace

std::optional<long long> whole_periods(const IntensityModel& model) {
  const auto tau = model.period();
  if (!tau) return std::nullopt;
  const double ratio = model.domain_length() / *tau;
  const long long m = std::llround(ratio);
  if (m >= 1 &&
      std::abs(ratio - static_cast<double>(m)) <=
          1e-9 * std::max(1.0, static_cast<double>(m)))
    return m;
  return std::nullopt;
}

double power_weighted_periodic_integral(const std::function<double(double)>& g,
                                        double tau, long long periods, int K,
                                        const QuadratureOptions& quad) {
  require(tau > 0.0, "periodic integral: period must be positive");
  require(periods >= 1, "periodic integral: need at least one period");
  require(K >= 0, "periodic integral: power weight must be nonnegative");
  Accumulator acc;
  for (int k = 0; k <= K; ++k) {
    const double mk = integrate(
        [&](double x) { return ipow(x, k) * g(x); }, 0.0, tau, quad);
    acc.add(binomial(K, k) * ipow(tau, K - k) * power_sum(periods, K - k) * mk);
  }
  return acc.get();
}

QuadratureOptions resolved_quad_options(const IntensityModel& model,
                                        QuadratureOptions quad, double length) {
  if (const auto tau = model.period()) {
    const double periods = length / *tau;
    if (periods > 8.0) {
      const int lvl = static_cast<int>(std::ceil(std::log2(periods / 4.0)));
      quad.min_level = std::clamp(std::max(quad.min_level, lvl), 0, 16);
    }
  }
  return quad;
}

namespace {

// Integrate a theta0-integrand choosing the periodic decomposition when the
// model structure allows it.  K_weight is the total x-power for structures
// of the x^j-times-periodic kind; periodic_factor is the integrand with that
// power stripped.
double structured_integral(const IntensityModel& model,
                           const MomentOptions& opts, int K_weight,
                           const std::function<double(double)>& periodic_factor,
                           const std::function<double(double)>& full_integrand) {
  if (opts.periodic_fast_path &&
      model.deriv_structure() != DerivStructure::none) {
    if (const auto m = whole_periods(model)) {
      const int K = model.deriv_structure() == DerivStructure::x_power_periodic
                        ? K_weight
                        : 0;
      return power_weighted_periodic_integral(periodic_factor, *model.period(),
                                              *m, K, opts.quad);
    }
  }
  return integrate(full_integrand, 0.0, model.domain_length(),
                   resolved_quad_options(model, opts.quad, model.domain_length()));
}

int max_deriv_needed(int r1, int r2, int r3) {
  if (r3 > 0) return 3;
  if (r2 > 0) return 2;
  if (r1 > 0) return 1;
  return 0;
}

}  // namespace

double moment_I(const IntensityModel& model, int r0, int r1, int r2, int r3,
                const MomentOptions& opts) {
  require(r0 >= 0 && r1 >= 0 && r2 >= 0, "moment: powers must be nonnegative");
  require(r3 == 0 || r3 == 1, "moment: third-derivative power must be 0 or 1");
  require(max_deriv_needed(r1, r2, r3) <= model.max_deriv(),
          "moment: model does not expose the required derivative order");
  const double theta0 = model.theta0();
  auto full = [&, r0, r1, r2, r3](double x) {
    double v = ipow(model.eval(1, theta0, x), r1);
    if (r2 > 0) v *= ipow(model.eval(2, theta0, x), r2);
    if (r3 > 0) v *= model.eval(3, theta0, x);
    return v / ipow(model.eval(0, theta0, x), r0);
  };
  auto periodic = [&, r0, r1, r2, r3](double x) {
    double v = ipow(model.periodic_part(1, x), r1);
    if (r2 > 0) v *= ipow(model.periodic_part(2, x), r2);
    if (r3 > 0) v *= model.periodic_part(3, x);
    return v / ipow(model.periodic_part(0, x), r0);
  };
  return structured_integral(model, opts, r1 + 2 * r2 + 3 * r3, periodic, full);
}

MomentTable::MomentTable(const IntensityModel& model, MomentOptions opts)
    : model_(model), opts_(opts) {}

double MomentTable::I(int r0, int r1, int r2, int r3) const {
  const std::array<int, 4> key{r0, r1, r2, r3};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double value = moment_I(model_, r0, r1, r2, r3, opts_);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, value);
  return value;
}

CoreQuantities core_quantities(const IntensityModel& model,
                               const MomentOptions& opts) {
  require(model.max_deriv() >= 2,
          "core quantities: model must expose two theta-derivatives");
  MomentTable tab(model, opts);
  CoreQuantities q;
  q.fisher = tab.I(1, 2, 0);
  if (!(std::isfinite(q.fisher) && q.fisher > 0.0))
    throw invariant_error("core quantities: Fisher information must be positive");
  q.phi_n = 1.0 / std::sqrt(q.fisher);
  q.eps_n = model.eps_n();
  q.gamma3 = ipow(q.phi_n, 3) * tab.I(2, 3, 0);
  q.gamma4 = ipow(q.phi_n, 4) * tab.I(3, 4, 0);

  const double theta0 = model.theta0();
  // (S'^2 - S S'')^2 / S^3, an x^4-weighted periodic factor when structured
  auto sq_full = [&](double x) {
    const double s = model.eval(0, theta0, x);
    const double d1 = model.eval(1, theta0, x);
    const double h = d1 * d1 - s * model.eval(2, theta0, x);
    return h * h / ipow(s, 3);
  };
  auto sq_periodic = [&](double x) {
    const double s = model.periodic_part(0, x);
    const double q1 = model.periodic_part(1, x);
    const double h = q1 * q1 - s * model.periodic_part(2, x);
    return h * h / ipow(s, 3);
  };
  // S'(S'^2 - S S'') / S^2, x^3-weighted
  auto cr_full = [&](double x) {
    const double s = model.eval(0, theta0, x);
    const double d1 = model.eval(1, theta0, x);
    return d1 * (d1 * d1 - s * model.eval(2, theta0, x)) / (s * s);
  };
  auto cr_periodic = [&](double x) {
    const double s = model.periodic_part(0, x);
    const double q1 = model.periodic_part(1, x);
    return q1 * (q1 * q1 - s * model.periodic_part(2, x)) / (s * s);
  };
  const double t_sq = structured_integral(model, opts, 4, sq_periodic, sq_full);
  const double t_cr = structured_integral(model, opts, 3, cr_periodic, cr_full);
  q.j_n = ipow(q.phi_n, 4) * t_sq - ipow(ipow(q.phi_n, 3) * t_cr, 2);

  const double comb = tab.I(1, 0, 2) - 2.0 * tab.I(2, 2, 1) + tab.I(3, 4, 0);
  const double cross = tab.I(2, 3, 0) - tab.I(1, 1, 1);
  q.j_n_expanded = ipow(q.phi_n, 4) * comb - ipow(q.phi_n, 3) * cross *
                                                 ipow(q.phi_n, 3) * cross;
  if (q.j_n < -1e-12) {
    std::ostringstream os;
    os << "core quantities: J_n = " << q.j_n
       << " is negative beyond tolerance; derivatives or quadrature are broken";
    throw invariant_error(os.str());
  }
  q.loss_limit_scale = q.j_n / (q.eps_n * q.eps_n);
  return q;
}

double power_loss_limit(const IntensityModel& model, double u, double alpha,
                        const MomentOptions& opts) {
  require(std::isfinite(u) && u >= 0.0, "power loss: u must be >= 0");
  require(alpha > 0.0 && alpha < 1.0, "power loss: alpha must be in (0,1)");
  const CoreQuantities q = core_quantities(model, opts);
  const double z = normal_quantile(1.0 - alpha);
  return ipow(u, 3) * normal_pdf(u - z) / 8.0 * q.loss_limit_scale;
}

namespace {

void validate_sweep(const std::vector<double>& n_list, std::size_t min_size,
                    const char* who) {
  std::ostringstream os;
  if (n_list.size() < min_size) {
    os << who << ": need at least " << min_size << " window lengths";
    throw config_error(os.str());
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (!(std::isfinite(n_list[i]) && n_list[i] > 0.0)) {
      os << who << ": window lengths must be positive";
      throw config_error(os.str());
    }
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      os << who << ": window lengths must be strictly increasing";
      throw config_error(os.str());
    }
  }
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t k = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw config_error("slope fit: degenerate abscissa");
  return sxy / sxx;
}

}  // namespace

B1Report check_B1(const IntensityModel& model,
                  const std::vector<double>& n_list,
                  const MomentOptions& opts) {
  validate_sweep(n_list, 3, "growth check");
  B1Report rep;
  rep.n_values = n_list;
  for (const double n : n_list) {
    const IntensityModel m = model.with_domain_length(n);
    const double fisher = moment_I(m, 1, 2, 0, 0, opts);
    if (!(std::isfinite(fisher) && fisher > 0.0))
      throw invariant_error("growth check: Fisher information must be positive");
    const double phi = 1.0 / std::sqrt(fisher);
    const double eps = m.eps_n();
    rep.eps_values.push_back(eps);
    const double theta0 = m.theta0();
    for (int r = 3; r <= 5; ++r) {
      auto full = [&, r](double x) {
        return ipow(std::abs(m.eval(1, theta0, x)), r) /
               ipow(m.eval(0, theta0, x), r - 1);
      };
      auto periodic = [&, r](double x) {
        return ipow(std::abs(m.periodic_part(1, x)), r) /
               ipow(m.periodic_part(0, x), r - 1);
      };
      const double t =
          ipow(phi, r) * structured_integral(m, opts, r, periodic, full);
      rep.integrals[r - 3].push_back(t);
      rep.C[r - 3] =
          std::max(rep.C[r - 3], t / ipow(eps, r - 2));
    }
  }
  for (int r = 3; r <= 5; ++r) {
    for (const double t : rep.integrals[r - 3])
      require(t > 0.0, "growth check: degenerate kernel integral");
    rep.slope[r - 3] = loglog_slope(rep.eps_values, rep.integrals[r - 3]);
  }
  return rep;
}

D3Report check_D3(const IntensityModel& model,
                  const std::vector<double>& n_list,
                  const MomentOptions& opts) {
  validate_sweep(n_list, 1, "regularity check");
  D3Report rep;
  rep.n_values = n_list;
  for (const double n : n_list) {
    const IntensityModel m = model.with_domain_length(n);
    const double fisher = moment_I(m, 1, 2, 0, 0, opts);
    if (!(std::isfinite(fisher) && fisher > 0.0))
      throw invariant_error("regularity check: Fisher information must be positive");
    const double phi = 1.0 / std::sqrt(fisher);
    const double eps = m.eps_n();
    const QuadratureOptions quad = opts.quad;
    for (int k = 2; k <= 4; ++k) {
      const double e = integrate(
          [&, k](double x) {
            return ipow(std::abs(m.envelope(1, x)), k) /
                   ipow(m.envelope(0, x), k - 1);
          },
          0.0, n, quad);
      const double ratio = ipow(phi, k) * e / ipow(eps, k - 2);
      rep.ratios[k - 2].push_back(ratio);
      rep.max_ratio[k - 2] = std::max(rep.max_ratio[k - 2], ratio);
    }
    for (int j = 2; j <= 4; ++j) {
      const double e = integrate(
          [&, j](double x) {
            const double f = m.envelope(j, x);
            return f * f / m.envelope(0, x);
          },
          0.0, n, quad);
      const double ratio = ipow(phi, 2 * j) * e / ipow(eps, 2 * j - 2);
      rep.ratios[j + 1].push_back(ratio);
      rep.max_ratio[j + 1] = std::max(rep.max_ratio[j + 1], ratio);
    }
  }
  return rep;
}

}  // namespace poissonht
