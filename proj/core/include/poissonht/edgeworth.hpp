#pragma once

// Two-term Edgeworth machinery for normalized Poisson stochastic integrals:
// the corrected distribution function
//
//   F(y) = N(y) - n(y) [ (g3/6) H2(y) + (g4/24) H3(y) + (g3^2/72) H5(y) ]
//
// its Cornish-Fisher quantile
//
//   c_alpha = z_alpha + (g3/6) H2(z) + (g4/24) H3(z) + (g3^2/72) H5(z)
//
// the Hermite polynomials these use, and a grid diagnostic for the
// characteristic-function separation condition backing the expansion.

#include <functional>

#include "poissonht/intensity.hpp"

namespace poissonht {

// H2, H3, H5 (probabilists' convention); other orders are not used anywhere
// and are rejected.
double hermite(int k, double y);

struct ExpansionInput {
  double gamma3 = 0.0;
  double gamma4 = 0.0;
  double eps_n = 0.0;  // rate scale, carried for error reporting
};

// The expansion is an asymptotic correction; cumulants of order one or
// larger put it outside its validity range.  Callers surface this as a
// warning, never as an error.
bool expansion_plausible(const ExpansionInput& input);

struct EdgeworthCdf {
  double value = 0.0;
  bool in_unit_interval = true;  // false when the polynomial correction
                                 // pushes the value outside [0, 1]
};

// Corrected CDF at y; unclamped.
EdgeworthCdf edgeworth_cdf(double y, const ExpansionInput& input);

// Upper-alpha corrected quantile: edgeworth_cdf(result) ~= 1 - alpha up to
// the dropped higher-order terms.
double edgeworth_quantile(double alpha, const ExpansionInput& input);

// Characteristic-function separation diagnostic: grid-minimizes
//   t -> int sin^2(t f(x)) S(theta0, x) dx
// over a geometric grid of 10^4 points in (c0/(2 eps), 1/(2 eps^2)] and
// compares against gamma_exp * ln(1/eps).  c0 must satisfy the cubic
// inequality (C3/3!)c0 + (C4/4!)c0^2 + (C5/5!)c0^3 < 1/2 with the constants
// C_r = eps^{2-r} int |f|^r S dx measured on this window.
struct B2Report {
  double inf_value = 0.0;
  double bound = 0.0;
  bool ok = false;
  double t_at_inf = 0.0;
  double c3 = 0.0, c4 = 0.0, c5 = 0.0;  // measured constants behind the c0 check
};
B2Report check_B2(const IntensityModel& model,
                  const std::function<double(double)>& normalized_kernel,
                  double eps_n, double c0, double gamma_exp);

}  // namespace poissonht
