#pragma once

// Deterministic integrals of an intensity model at theta0: the moment family
//
//   I(r0, r1, r2, r3) = int_0^n S'(x)^r1 S''(x)^r2 S'''(x)^r3 / S(x)^r0 dx
//
// (theta-derivatives, evaluated at theta0), the Fisher information
// I_n = I(1,2,0,0), the normalizer phi_n = I_n^{-1/2}, the cumulants
// gamma3 = phi^3 I(2,3,0,0) and gamma4 = phi^4 I(3,4,0,0), the nonnegative
// functional J_n driving the power-loss limit, and the growth/regularity
// diagnostics over a window sweep.
//
// When the model declares a periodic derivative structure and the window is
// a whole number of periods, integrals reduce exactly to one-period moments:
// integrands of the form x^K g(x) with g periodic split via the binomial
// theorem into sums over period indices, so window length never inflates
// quadrature cost or error.

#include <array>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "poissonht/intensity.hpp"
#include "poissonht/quadrature.hpp"

namespace poissonht {

struct MomentOptions {
  QuadratureOptions quad{};
  bool periodic_fast_path = true;
};

// Number of whole periods in the window, when the model has a period and
// n is an integer multiple of it (relative slack 1e-9).
std::optional<long long> whole_periods(const IntensityModel& model);

// Quadrature options with min_level raised so one panel never spans more
// than a few of the model's periods over the given length.  Full-domain
// integrals of oscillatory integrands otherwise risk false convergence at
// coarse panel counts.
QuadratureOptions resolved_quad_options(const IntensityModel& model,
                                        QuadratureOptions quad, double length);

// Exact decomposition of int_0^{M tau} x^K g(x) dx for tau-periodic g:
// sum_k binom(K,k) tau^{K-k} (sum_{m<M} m^{K-k}) int_0^tau x^k g(x) dx.
double power_weighted_periodic_integral(const std::function<double(double)>& g,
                                        double tau, long long periods, int K,
                                        const QuadratureOptions& quad = {});

double moment_I(const IntensityModel& model, int r0, int r1, int r2,
                int r3 = 0, const MomentOptions& opts = {});

// Cached moment entries for one model.
class MomentTable {
 public:
  explicit MomentTable(const IntensityModel& model, MomentOptions opts = {});
  double I(int r0, int r1, int r2, int r3 = 0) const;
  const IntensityModel& model() const { return model_; }

 private:
  IntensityModel model_;
  MomentOptions opts_;
  mutable std::mutex mutex_;
  mutable std::map<std::array<int, 4>, double> cache_;
};

struct CoreQuantities {
  double fisher = 0.0;       // I_n = I(1,2,0,0)
  double phi_n = 0.0;        // I_n^{-1/2}
  double eps_n = 0.0;        // rate scale, n^{-1/2} unless overridden
  double gamma3 = 0.0;       // phi^3 I(2,3,0,0)
  double gamma4 = 0.0;       // phi^4 I(3,4,0,0)
  double j_n = 0.0;          // definition route (see below)
  double j_n_expanded = 0.0; // I-combination route, kept for cross-checking
  double loss_limit_scale = 0.0;  // eps_n^{-2} j_n
};

// J_n = phi^4 int (S'^2 - S S'')^2 / S^3 dx
//     - (phi^3 int S'(S'^2 - S S'') / S^2 dx)^2,
// computed both from this definition and from the expanded combination
// phi^4 [I(1,0,2) - 2 I(2,2,1) + I(3,4,0)] - phi^6 [I(2,3,0) - I(1,1,1)]^2.
// Cauchy-Schwarz against the score kernel gives J_n >= 0; a value below
// -1e-12 raises invariant_error (it means derivatives or quadrature broke).
CoreQuantities core_quantities(const IntensityModel& model,
                               const MomentOptions& opts = {});

// Finite-n surrogate of the limiting power loss:
// r_n(u) = (u^3 n(u - z_alpha) / 8) eps_n^{-2} J_n.
double power_loss_limit(const IntensityModel& model, double u, double alpha,
                        const MomentOptions& opts = {});

// Growth diagnostic for the normalized score kernel f_n = phi_n S'/S:
// T_r(n) = int |f_n|^r S dx should scale like eps_n^{r-2}, r = 3,4,5.
struct B1Report {
  std::vector<double> n_values;
  std::vector<double> eps_values;
  std::array<std::vector<double>, 3> integrals;  // T_r per n, r = 3,4,5
  std::array<double, 3> C{};      // max over n of T_r / eps^{r-2}
  std::array<double, 3> slope{};  // log-log slope of T_r against eps
};
B1Report check_B1(const IntensityModel& model,
                  const std::vector<double>& n_list,
                  const MomentOptions& opts = {});

// Regularity diagnostic built on the envelopes: the six scaled ratios
//   phi^k  int f_1^k / f_0^{k-1} dx / eps^{k-2},   k = 2,3,4
//   phi^2j int f_j^2 / f_0 dx      / eps^{2j-2},   j = 2,3,4
// should stay bounded along the window sweep.
struct D3Report {
  std::vector<double> n_values;
  std::array<std::vector<double>, 6> ratios;  // k=2,3,4 then j=2,3,4
  std::array<double, 6> max_ratio{};
};
D3Report check_D3(const IntensityModel& model,
                  const std::vector<double>& n_list,
                  const MomentOptions& opts = {});

}  // namespace poissonht
