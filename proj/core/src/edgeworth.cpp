#include "poissonht/edgeworth.hpp"

#include <cmath>
#include <sstream>

#include "poissonht/errors.hpp"
#include "poissonht/gauss.hpp"
#include "poissonht/quadrature.hpp"

namespace poissonht {

double hermite(int k, double y) {
  switch (k) {
    case 2:
      return y * y - 1.0;
    case 3:
      return y * (y * y - 3.0);
    case 5:
      return y * (y * y * (y * y - 10.0) + 15.0);
    default: {
      std::ostringstream os;
      os << "hermite: order " << k << " not supported (need 2, 3 or 5)";
      throw config_error(os.str());
    }
  }
}

bool expansion_plausible(const ExpansionInput& input) {
  return std::abs(input.gamma3) <= 0.5 && std::abs(input.gamma4) <= 0.5;
}

EdgeworthCdf edgeworth_cdf(double y, const ExpansionInput& input) {
  const double g3 = input.gamma3, g4 = input.gamma4;
  const double correction = g3 / 6.0 * hermite(2, y) +
                            g4 / 24.0 * hermite(3, y) +
                            g3 * g3 / 72.0 * hermite(5, y);
  EdgeworthCdf out;
  out.value = normal_cdf(y) - correction * normal_pdf(y);
  out.in_unit_interval = out.value >= 0.0 && out.value <= 1.0;
  return out;
}

double edgeworth_quantile(double alpha, const ExpansionInput& input) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("edgeworth_quantile: alpha must be in (0,1)");
  const double z = normal_quantile(1.0 - alpha);
  const double g3 = input.gamma3, g4 = input.gamma4;
  return z + g3 / 6.0 * hermite(2, z) + g4 / 24.0 * hermite(3, z) +
         g3 * g3 / 72.0 * hermite(5, z);
}

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

}  // namespace

B2Report check_B2(const IntensityModel& model,
                  const std::function<double(double)>& normalized_kernel,
                  double eps_n, double c0, double gamma_exp) {
  if (!(eps_n > 0.0 && eps_n < 1.0))
    throw config_error("separation check: eps_n must lie in (0,1)");
  if (!(c0 > 0.0)) throw config_error("separation check: c0 must be positive");
  if (!(gamma_exp >= 2.5))
    throw config_error("separation check: exponent must be >= 5/2");

  const double n = model.domain_length();
  const double theta0 = model.theta0();
  auto weighted = [&](int r) {
    return integrate(
        [&, r](double x) {
          double v = std::abs(normalized_kernel(x));
          double p = v;
          for (int i = 1; i < r; ++i) p *= v;
          return p * model.eval(0, theta0, x);
        },
        0.0, n, QuadratureOptions{1e-8, 20, 4});
  };
  B2Report rep;
  rep.c3 = weighted(3) / eps_n;
  rep.c4 = weighted(4) / (eps_n * eps_n);
  rep.c5 = weighted(5) / (eps_n * eps_n * eps_n);
  const double cubic =
      rep.c3 / 6.0 * c0 + rep.c4 / 24.0 * c0 * c0 + rep.c5 / 120.0 * c0 * c0 * c0;
  if (!(cubic < 0.5)) {
    std::ostringstream os;
    os << "separation check: c0 = " << c0
       << " violates the cubic inequality (value " << cubic << " >= 1/2)";
    throw config_error(os.str());
  }
  const double t_lo = 0.5 * c0 / eps_n;
  const double t_hi = 0.5 / (eps_n * eps_n);
  if (!(t_lo < t_hi))
    throw config_error("separation check: empty t-range (c0 >= 1/eps_n)");

  // One fixed sampling grid for all t: resolve the integrand at the largest
  // frequency by growing the panel count until the value stabilizes there.
  auto value_at = [&](double t, const QuadGrid& grid) {
    Accumulator acc;
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
      const double s = std::sin(t * normalized_kernel(grid.x[i]));
      acc.add(s * s * model.eval(0, theta0, grid.x[i]) * grid.w[i]);
    }
    return acc.get();
  };
  int panels = 64;
  QuadGrid grid = make_composite_grid(0.0, n, panels);
  double probe = value_at(t_hi, grid);
  for (; panels <= (1 << 14); ) {
    QuadGrid next = make_composite_grid(0.0, n, panels * 2);
    const double refined = value_at(t_hi, next);
    const bool settled = std::abs(refined - probe) <= 1e-6 * (std::abs(refined) + 1.0);
    grid = std::move(next);
    probe = refined;
    panels *= 2;
    if (settled) break;
  }

  const int kGridPoints = 10000;
  const double ratio = t_hi / t_lo;
  rep.inf_value = probe;
  rep.t_at_inf = t_hi;
  for (int i = 1; i <= kGridPoints; ++i) {
    const double t =
        t_lo * std::pow(ratio, static_cast<double>(i) / kGridPoints);
    const double v = value_at(t, grid);
    if (v < rep.inf_value) {
      rep.inf_value = v;
      rep.t_at_inf = t;
    }
  }
  rep.bound = gamma_exp * std::log(1.0 / eps_n);
  rep.ok = rep.inf_value >= rep.bound;
  return rep;
}

}  // namespace poissonht
