#pragma once

// Composite Gauss-Legendre quadrature with panel-doubling refinement.
//
// integrate() subdivides [a,b] into 2^k equal panels, applies a 32-node
// Gauss-Legendre rule on each and doubles the panel count until two
// successive refinements agree.  Agreement is measured against
// tol * (|I| + integral of |f|), so integrals whose true value is zero by
// cancellation still converge at a sensible absolute scale.  The panel
// count is capped at 2^20; exceeding the cap or meeting a non-finite
// integrand value raises numerical_error.
//
// Summation within a refinement level uses compensated (Neumaier)
// accumulation in a fixed serial order, so results are bit-reproducible.

#include <functional>
#include <vector>

namespace poissonht {

struct QuadratureOptions {
  double tol = 1e-10;      // relative to |I| + integral of |f|
  int max_level = 20;      // panel count capped at 2^max_level
  int min_level = 0;       // start refinement at 2^min_level panels
};

struct QuadratureResult {
  double value = 0.0;
  double abs_value = 0.0;  // integral of |f|, same rule
  int panels = 0;
};

// Integral of f over [a,b].  Requires a <= b.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// As integrate(), but also reports the |f|-integral and the panel count at
// convergence.
QuadratureResult integrate_detail(const std::function<double(double)>& f,
                                  double a, double b,
                                  const QuadratureOptions& opts = {});

// Nodes and weights of the 32-node Gauss-Legendre rule on [-1,1], computed
// once by Newton iteration on the Legendre polynomial.
const std::vector<double>& gauss_legendre_nodes();
const std::vector<double>& gauss_legendre_weights();

// Fixed composite grid: the 32-node rule replicated over `panels` equal
// panels of [a,b].  Used where many integrands share one sampling grid.
struct QuadGrid {
  std::vector<double> x;
  std::vector<double> w;
};
QuadGrid make_composite_grid(double a, double b, int panels);

}  // namespace poissonht
