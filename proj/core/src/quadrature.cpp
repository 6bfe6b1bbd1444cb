#include "poissonht/quadrature.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "poissonht/errors.hpp"

namespace poissonht {

namespace {

constexpr int kNodes = 32;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Legendre P_32 roots by Newton iteration from the Chebyshev initial guess.
// Symmetric pairs are filled from one half so the rule is exactly symmetric.
Rule build_rule() {
  Rule r;
  r.x.assign(kNodes, 0.0);
  r.w.assign(kNodes, 0.0);
  const int half = (kNodes + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (kNodes + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Recurrence for P_n(x) and P_{n-1}(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= kNodes; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    r.x[i] = -x;
    r.x[kNodes - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.w[i] = w;
    r.w[kNodes - 1 - i] = w;
  }
  return r;
}

const Rule& rule() {
  static const Rule r = build_rule();
  return r;
}

// Neumaier compensated accumulator; deterministic for a fixed visit order.
struct Accumulator {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double get() const { return sum + c; }
};

struct LevelValue {
  double value;
  double abs_value;
};

LevelValue evaluate_level(const std::function<double(double)>& f, double a,
                          double b, int panels) {
  const Rule& r = rule();
  const double h = (b - a) / panels;
  Accumulator acc;
  Accumulator acc_abs;
  for (int p = 0; p < panels; ++p) {
    const double left = a + h * p;
    const double mid = left + 0.5 * h;
    const double scale = 0.5 * h;
    for (int i = 0; i < kNodes; ++i) {
      const double xi = mid + scale * r.x[i];
      const double fi = f(xi);
      if (!std::isfinite(fi)) {
        throw numerical_error("integrate: integrand is not finite at x = " +
                              std::to_string(xi));
      }
      const double wi = scale * r.w[i];
      acc.add(wi * fi);
      acc_abs.add(wi * std::fabs(fi));
    }
  }
  return {acc.get(), acc_abs.get()};
}

}  // namespace

const std::vector<double>& gauss_legendre_nodes() { return rule().x; }
const std::vector<double>& gauss_legendre_weights() { return rule().w; }

QuadGrid make_composite_grid(double a, double b, int panels) {
  if (!(a <= b) || panels < 1) {
    throw config_error("make_composite_grid: need a <= b and panels >= 1");
  }
  const Rule& r = rule();
  QuadGrid g;
  g.x.reserve(static_cast<size_t>(panels) * kNodes);
  g.w.reserve(static_cast<size_t>(panels) * kNodes);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * p + 0.5 * h;
    const double scale = 0.5 * h;
    for (int i = 0; i < kNodes; ++i) {
      g.x.push_back(mid + scale * r.x[i]);
      g.w.push_back(scale * r.w[i]);
    }
  }
  return g;
}

QuadratureResult integrate_detail(const std::function<double(double)>& f,
                                  double a, double b,
                                  const QuadratureOptions& opts) {
  if (!(a <= b)) {
    throw config_error("integrate: interval must satisfy a <= b");
  }
  if (a == b) return {0.0, 0.0, 0};
  if (opts.min_level < 0 || opts.max_level < opts.min_level ||
      opts.max_level > 30) {
    throw config_error("integrate: invalid refinement levels");
  }
  LevelValue prev = evaluate_level(f, a, b, 1 << opts.min_level);
  double last_diff = std::numeric_limits<double>::infinity();
  for (int level = opts.min_level + 1; level <= opts.max_level; ++level) {
    const int panels = 1 << level;
    const LevelValue cur = evaluate_level(f, a, b, panels);
    const double scale = std::fabs(cur.value) + cur.abs_value;
    last_diff = std::fabs(cur.value - prev.value);
    if (last_diff <= opts.tol * scale + std::numeric_limits<double>::min()) {
      return {cur.value, cur.abs_value, panels};
    }
    prev = cur;
  }
  throw numerical_error(
      "integrate: no convergence within the panel budget (last refinement "
      "difference " +
      std::to_string(last_diff) + ")");
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  return integrate_detail(f, a, b, opts).value;
}

}  // namespace poissonht
