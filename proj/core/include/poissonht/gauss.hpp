#pragma once

// Standard normal density, distribution function and quantile.
//
// The quantile uses Wichura's algorithm AS 241 (PPND16), a rational
// approximation with absolute error below 1e-15 over (0,1).  The
// distribution function is computed from the complementary error function,
// which is accurate to machine precision.  Both therefore satisfy the
// |error| < 1e-12 requirement placed on these primitives.

namespace poissonht {

// Density n(y) of N(0,1).
double normal_pdf(double y);

// Distribution function N(y) = P{Z < y}.
double normal_cdf(double y);

// Quantile z_p with N(z_p) = p, for p in (0,1).  Throws config_error
// otherwise.
double normal_quantile(double p);

}  // namespace poissonht
