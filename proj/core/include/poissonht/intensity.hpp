#pragma once

// One-parameter intensity families on the observation window [0, n].
//
// A model fixes a family S(theta, x), the reference parameter theta0, the
// window length n and, where applicable, a dark-current offset lambda and a
// periodic base signal.  The families:
//
//   homogeneous   S(theta, x) = theta
//   amplitude     S(theta, x) = theta * B(x) + lambda
//   phase         S(theta, x) = B(theta + x) + lambda
//   frequency     S(theta, x) = B(theta * x) + lambda
//   exp_sine      S(theta, x) = exp(sin(theta * x))
//   custom        user-registered, looked up by name
//
// eval(j, theta, x) returns the j-th theta-derivative, j = 0..4, in closed
// form.  Every built-in family also reports, at theta0, the algebraic shape
// of its derivatives (periodic, or x^j times a periodic factor), which the
// moment integrals exploit; positive floors and derivative envelopes valid
// on theta in [theta0, theta0 + delta_theta_max] support the growth and
// regularity diagnostics.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "poissonht/errors.hpp"

namespace poissonht {

enum class Family { homogeneous, amplitude, phase, frequency, exp_sine, custom };

const char* family_name(Family f);

// Periodic base signal with closed-form x-derivatives up to order 4.
//   offset_cosine:  offset + amp * cos(2 pi x / period)
//   harmonics:      offset + sum_k a_k cos(k w x) + b_k sin(k w x), w = 2 pi / period
struct BaseSignal {
  enum class Kind { offset_cosine, harmonics };

  Kind kind = Kind::offset_cosine;
  double offset = 2.0;
  double amp = 1.0;
  double period = 1.0;
  std::array<double, 3> a{0.0, 0.0, 0.0};  // harmonics only
  std::array<double, 3> b{0.0, 0.0, 0.0};

  static BaseSignal offset_cosine(double offset, double amp, double period);
  static BaseSignal harmonics(double offset, const std::array<double, 3>& a,
                              const std::array<double, 3>& b, double period);

  // d^j/dx^j at x, j = 0..4.
  double eval(int j, double x) const;
  // Bounds over one period; min/max are rigorous (closed form, or grid scan
  // widened by a Lipschitz margin).
  double min_value() const;
  double max_value() const;
  double max_abs_deriv(int j) const;
};

// Shape of the theta-derivatives at theta0 as functions of x.
enum class DerivStructure {
  none,               // no special structure (general custom models)
  periodic,           // S^(j)(theta0, .) has period tau for every j
  x_power_periodic,   // S^(j)(theta0, x) = x^j q_j(x), q_j has period tau
};

// Full definition of a custom family, registered by name.
struct CustomIntensity {
  std::string name;
  int max_deriv = 4;
  // (j, theta, x) -> d^j S / d theta^j
  std::function<double(int, double, double)> deriv;
  // theta -> sup_x S(theta, x) over the window
  std::function<double(double)> majorant;
  std::optional<double> period;
  // True when S(theta, .) is periodic with the same period for every theta
  // (enables one-period integration of integrands mixing theta0 and theta_u).
  bool period_theta_independent = false;
  DerivStructure structure = DerivStructure::none;
  // envelopes: j = 0 is a positive floor, j >= 1 bounds |S^(j)|; optional
  std::function<double(int, double)> envelope;
};

class IntensityModel {
 public:
  static IntensityModel homogeneous(double theta0, double n);
  static IntensityModel amplitude(double theta0, double n, double lambda,
                                  const BaseSignal& base);
  static IntensityModel phase(double theta0, double n, double lambda,
                              const BaseSignal& base);
  static IntensityModel frequency(double theta0, double n, double lambda,
                                  const BaseSignal& base);
  static IntensityModel exp_sine(double theta0, double n);
  // Window of m whole periods: n = m * 2 pi / theta0.
  static IntensityModel exp_sine_periods(double theta0, int m);
  static IntensityModel custom(const CustomIntensity& def, double theta0,
                               double n);
  // Same family and parameters on a window of a different length.
  IntensityModel with_domain_length(double n) const;

  Family family() const { return family_; }
  double theta0() const { return theta0_; }
  double domain_length() const { return n_; }
  double dark_current() const { return lambda_; }
  const BaseSignal& base() const { return base_; }
  std::optional<double> period() const { return period_; }
  // True when the x-period of S(theta, .) does not move with theta
  // (amplitude, phase, and custom families that declare it).
  bool period_theta_independent() const;
  double delta_theta_max() const { return delta_theta_max_; }
  void set_delta_theta_max(double d);
  // Rate scale of the expansions; defaults to n^(-1/2).
  double eps_n() const { return eps_override_ > 0.0 ? eps_override_ : 1.0 / std::sqrt(n_); }
  void set_eps_n(double eps);
  const std::string& name() const { return name_; }
  // Highest theta-derivative available: 4 for built-ins, as declared for
  // custom families.
  int max_deriv() const;

  // j-th theta-derivative of the intensity, j = 0..4.
  double eval(int j, double theta, double x) const;
  double intensity(double theta, double x) const { return eval(0, theta, x); }

  // sup_x S(theta, x) over [0, n]; used as the thinning bound.
  double majorant(double theta) const;

  DerivStructure deriv_structure() const { return structure_; }
  // q_j(x) with S^(j)(theta0, x) = x^p q_j(x), p = x_power(j).  Requires a
  // periodic or x_power_periodic structure.
  int x_power(int j) const;
  double periodic_part(int j, double x) const;

  // Envelopes valid for theta in [theta0, theta0 + delta_theta_max]:
  // envelope(0, x) is a positive lower bound for S(theta, x), envelope(j, x)
  // an upper bound for |S^(j)(theta, x)|, j = 1..4.
  double envelope(int j, double x) const;

 private:
  IntensityModel() = default;

  Family family_ = Family::homogeneous;
  double theta0_ = 1.0;
  double n_ = 1.0;
  double lambda_ = 0.0;
  BaseSignal base_;
  std::optional<double> period_;
  DerivStructure structure_ = DerivStructure::none;
  double delta_theta_max_ = 1.0;
  double eps_override_ = -1.0;
  std::string name_;
  CustomIntensity custom_;
};

// Grid check that the envelopes actually dominate the family over
// [theta0, theta0 + delta_theta_max] x [0, n].
struct EnvelopeReport {
  bool ok = true;
  // Worst observed margin, negative when violated: min over the grid of
  // f_j(x) - |S^(j)(theta, x)| (j >= 1) and S(theta, x) - f_0(x).
  double worst_margin = 0.0;
  int worst_j = 0;
  double worst_theta = 0.0;
  double worst_x = 0.0;
};
EnvelopeReport validate_envelopes(const IntensityModel& model,
                                  int x_points = 2001, int theta_points = 11);

// Check eval(j) against a central finite difference of eval(j-1) on a grid;
// worst relative error is reported.  Validates four-fold differentiability
// of custom models.
struct DerivativeReport {
  bool ok = true;
  double worst_rel_error = 0.0;
  int worst_j = 1;
  double worst_x = 0.0;
};
DerivativeReport check_derivatives(const IntensityModel& model,
                                   double rel_tol = 1e-6,
                                   int x_points = 101, double step = 1e-5);

// Custom-family registry.
void register_custom_intensity(const CustomIntensity& def);
bool custom_intensity_registered(const std::string& name);
// Throws config_error when the name is unknown.
IntensityModel make_custom_intensity(const std::string& name, double theta0,
                                     double n);

}  // namespace poissonht
