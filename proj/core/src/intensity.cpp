#include "poissonht/intensity.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

namespace poissonht {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

bool finite(double v) { return std::isfinite(v); }

// j-th derivative of cos(w x) divided by w^j: cos, -sin, -cos, sin, ...
double cos_deriv_phase(int j, double t) {
  switch (j & 3) {
    case 0: return std::cos(t);
    case 1: return -std::sin(t);
    case 2: return -std::cos(t);
    default: return std::sin(t);
  }
}

double sin_deriv_phase(int j, double t) {
  switch (j & 3) {
    case 0: return std::sin(t);
    case 1: return std::cos(t);
    case 2: return -std::sin(t);
    default: return -std::cos(t);
  }
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::homogeneous: return "homogeneous";
    case Family::amplitude: return "amplitude";
    case Family::phase: return "phase";
    case Family::frequency: return "frequency";
    case Family::exp_sine: return "exp-sine";
    case Family::custom: return "custom";
  }
  return "unknown";
}

BaseSignal BaseSignal::offset_cosine(double offset, double amp, double period) {
  require(finite(offset) && finite(amp), "base signal: offset/amp must be finite");
  require(finite(period) && period > 0.0, "base signal: period must be positive");
  BaseSignal s;
  s.kind = Kind::offset_cosine;
  s.offset = offset;
  s.amp = amp;
  s.period = period;
  return s;
}

BaseSignal BaseSignal::harmonics(double offset, const std::array<double, 3>& a,
                                 const std::array<double, 3>& b, double period) {
  require(finite(offset), "base signal: offset must be finite");
  require(finite(period) && period > 0.0, "base signal: period must be positive");
  for (int k = 0; k < 3; ++k)
    require(finite(a[k]) && finite(b[k]), "base signal: coefficients must be finite");
  BaseSignal s;
  s.kind = Kind::harmonics;
  s.offset = offset;
  s.a = a;
  s.b = b;
  s.period = period;
  return s;
}

double BaseSignal::eval(int j, double x) const {
  require(j >= 0 && j <= 4, "base signal: derivative order must be 0..4");
  const double w = kTwoPi / period;
  if (kind == Kind::offset_cosine) {
    const double v = amp * ipow(w, j) * cos_deriv_phase(j, w * x);
    return j == 0 ? offset + v : v;
  }
  double v = j == 0 ? offset : 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double cw = k * w;
    if (a[k - 1] == 0.0 && b[k - 1] == 0.0) continue;
    v += ipow(cw, j) * (a[k - 1] * cos_deriv_phase(j, cw * x) +
                        b[k - 1] * sin_deriv_phase(j, cw * x));
  }
  return v;
}

namespace {

// Rigorous one-period bounds for a harmonics signal: dense scan widened by a
// Lipschitz margin from the coefficient bound on the next derivative.
void harmonic_bounds(const BaseSignal& s, int j, double* lo, double* hi) {
  const double w = kTwoPi / s.period;
  double lip = 0.0;
  for (int k = 1; k <= 3; ++k)
    lip += ipow(k * w, j + 1) * (std::abs(s.a[k - 1]) + std::abs(s.b[k - 1]));
  const int kPoints = 20001;
  const double h = s.period / (kPoints - 1);
  double mn = s.eval(j, 0.0), mx = mn;
  for (int i = 1; i < kPoints; ++i) {
    const double v = s.eval(j, i * h);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  *lo = mn - 0.5 * lip * h;
  *hi = mx + 0.5 * lip * h;
}

}  // namespace

double BaseSignal::min_value() const {
  if (kind == Kind::offset_cosine) return offset - std::abs(amp);
  double lo, hi;
  harmonic_bounds(*this, 0, &lo, &hi);
  return lo;
}

double BaseSignal::max_value() const {
  if (kind == Kind::offset_cosine) return offset + std::abs(amp);
  double lo, hi;
  harmonic_bounds(*this, 0, &lo, &hi);
  return hi;
}

double BaseSignal::max_abs_deriv(int j) const {
  require(j >= 0 && j <= 4, "base signal: derivative order must be 0..4");
  if (j == 0) return std::max(std::abs(min_value()), std::abs(max_value()));
  if (kind == Kind::offset_cosine) return std::abs(amp) * ipow(kTwoPi / period, j);
  double lo, hi;
  harmonic_bounds(*this, j, &lo, &hi);
  return std::max(std::abs(lo), std::abs(hi));
}

namespace {

void validate_common(double theta0, double n) {
  require(finite(theta0), "model: theta0 must be finite");
  require(finite(n) && n > 0.0, "model: window length must be positive");
}

}  // namespace

IntensityModel IntensityModel::homogeneous(double theta0, double n) {
  validate_common(theta0, n);
  require(theta0 > 0.0, "homogeneous model: theta0 must be positive");
  IntensityModel m;
  m.family_ = Family::homogeneous;
  m.theta0_ = theta0;
  m.n_ = n;
  m.structure_ = DerivStructure::none;
  m.name_ = family_name(m.family_);
  return m;
}

IntensityModel IntensityModel::amplitude(double theta0, double n, double lambda,
                                         const BaseSignal& base) {
  validate_common(theta0, n);
  require(finite(lambda) && lambda >= 0.0, "amplitude model: lambda must be >= 0");
  require(theta0 > 0.0, "amplitude model: theta0 must be positive");
  IntensityModel m;
  m.family_ = Family::amplitude;
  m.theta0_ = theta0;
  m.n_ = n;
  m.lambda_ = lambda;
  m.base_ = base;
  m.period_ = base.period;
  m.structure_ = DerivStructure::periodic;
  m.name_ = family_name(m.family_);
  const double mn = base.min_value();
  require(theta0 * mn + lambda > 0.0 &&
              (theta0 + m.delta_theta_max_) * mn + lambda > 0.0,
          "amplitude model: intensity floor is not positive over the theta range");
  return m;
}

IntensityModel IntensityModel::phase(double theta0, double n, double lambda,
                                     const BaseSignal& base) {
  validate_common(theta0, n);
  require(finite(lambda) && lambda >= 0.0, "phase model: lambda must be >= 0");
  IntensityModel m;
  m.family_ = Family::phase;
  m.theta0_ = theta0;
  m.n_ = n;
  m.lambda_ = lambda;
  m.base_ = base;
  m.period_ = base.period;
  m.structure_ = DerivStructure::periodic;
  m.name_ = family_name(m.family_);
  require(base.min_value() + lambda > 0.0,
          "phase model: intensity floor is not positive");
  return m;
}

IntensityModel IntensityModel::frequency(double theta0, double n, double lambda,
                                         const BaseSignal& base) {
  validate_common(theta0, n);
  require(finite(lambda) && lambda >= 0.0, "frequency model: lambda must be >= 0");
  require(theta0 > 0.0, "frequency model: theta0 must be positive");
  IntensityModel m;
  m.family_ = Family::frequency;
  m.theta0_ = theta0;
  m.n_ = n;
  m.lambda_ = lambda;
  m.base_ = base;
  m.period_ = base.period / theta0;
  m.structure_ = DerivStructure::x_power_periodic;
  m.name_ = family_name(m.family_);
  require(base.min_value() + lambda > 0.0,
          "frequency model: intensity floor is not positive");
  return m;
}

IntensityModel IntensityModel::exp_sine(double theta0, double n) {
  validate_common(theta0, n);
  require(theta0 > 0.0, "exp-sine model: theta0 must be positive");
  IntensityModel m;
  m.family_ = Family::exp_sine;
  m.theta0_ = theta0;
  m.n_ = n;
  m.period_ = kTwoPi / theta0;
  m.structure_ = DerivStructure::x_power_periodic;
  m.name_ = family_name(m.family_);
  return m;
}

IntensityModel IntensityModel::exp_sine_periods(double theta0, int periods) {
  require(periods > 0, "exp-sine model: period count must be positive");
  require(finite(theta0) && theta0 > 0.0, "exp-sine model: theta0 must be positive");
  return exp_sine(theta0, periods * kTwoPi / theta0);
}

IntensityModel IntensityModel::custom(const CustomIntensity& def, double theta0,
                                      double n) {
  validate_common(theta0, n);
  require(static_cast<bool>(def.deriv), "custom model: derivative hook is required");
  require(static_cast<bool>(def.majorant), "custom model: majorant hook is required");
  require(def.max_deriv >= 1 && def.max_deriv <= 4,
          "custom model: max_deriv must be 1..4");
  if (def.period) require(*def.period > 0.0, "custom model: period must be positive");
  IntensityModel m;
  m.family_ = Family::custom;
  m.theta0_ = theta0;
  m.n_ = n;
  m.period_ = def.period;
  m.structure_ = def.structure;
  m.custom_ = def;
  m.name_ = def.name.empty() ? family_name(m.family_) : def.name;
  return m;
}

int IntensityModel::max_deriv() const {
  return family_ == Family::custom ? custom_.max_deriv : 4;
}

bool IntensityModel::period_theta_independent() const {
  if (!period_) return false;
  switch (family_) {
    case Family::amplitude:
    case Family::phase:
      return true;
    case Family::custom:
      return custom_.period_theta_independent;
    default:
      return false;
  }
}

IntensityModel IntensityModel::with_domain_length(double n) const {
  require(std::isfinite(n) && n > 0.0, "model: window length must be positive");
  IntensityModel m = *this;
  m.n_ = n;
  return m;
}

void IntensityModel::set_delta_theta_max(double d) {
  require(finite(d) && d > 0.0, "model: delta_theta_max must be positive");
  delta_theta_max_ = d;
}

void IntensityModel::set_eps_n(double eps) {
  require(finite(eps) && eps > 0.0, "model: eps_n must be positive");
  eps_override_ = eps;
}

double IntensityModel::eval(int j, double theta, double x) const {
  require(j >= 0 && j <= 4, "model: derivative order must be 0..4");
  switch (family_) {
    case Family::homogeneous:
      return j == 0 ? theta : (j == 1 ? 1.0 : 0.0);
    case Family::amplitude: {
      if (j == 0) return theta * base_.eval(0, x) + lambda_;
      return j == 1 ? base_.eval(0, x) : 0.0;
    }
    case Family::phase: {
      const double v = base_.eval(j, theta + x);
      return j == 0 ? v + lambda_ : v;
    }
    case Family::frequency: {
      if (j == 0) return base_.eval(0, theta * x) + lambda_;
      return ipow(x, j) * base_.eval(j, theta * x);
    }
    case Family::exp_sine: {
      const double t = theta * x;
      const double s = std::sin(t);
      const double E = std::exp(s);
      if (j == 0) return E;
      const double c = std::cos(t);
      switch (j) {
        case 1: return x * c * E;
        case 2: return x * x * (c * c - s) * E;
        case 3: return x * x * x * c * (c * c - 3.0 * s - 1.0) * E;
        default: {
          const double c2 = c * c, s2 = s * s;
          return ipow(x, 4) * (c2 * c2 - 6.0 * c2 * s - 4.0 * c2 + 3.0 * s2 + s) * E;
        }
      }
    }
    case Family::custom: {
      require(j <= custom_.max_deriv,
              "custom model: derivative order exceeds max_deriv");
      return custom_.deriv(j, theta, x);
    }
  }
  throw invariant_error("model: unreachable family");
}

double IntensityModel::majorant(double theta) const {
  switch (family_) {
    case Family::homogeneous:
      require(theta > 0.0, "majorant: homogeneous intensity needs theta > 0");
      return theta;
    case Family::amplitude:
      require(theta > 0.0, "majorant: amplitude intensity needs theta > 0");
      return theta * base_.max_value() + lambda_;
    case Family::phase:
      return base_.max_value() + lambda_;
    case Family::frequency:
      return base_.max_value() + lambda_;
    case Family::exp_sine:
      return std::exp(1.0);
    case Family::custom:
      return custom_.majorant(theta);
  }
  throw invariant_error("model: unreachable family");
}

int IntensityModel::x_power(int j) const {
  require(structure_ != DerivStructure::none,
          "model: derivative structure is not declared");
  if (structure_ == DerivStructure::periodic || j == 0) return 0;
  return j;
}

double IntensityModel::periodic_part(int j, double x) const {
  const int p = x_power(j);
  if (p == 0) return eval(j, theta0_, x);
  switch (family_) {
    case Family::frequency:
      return base_.eval(j, theta0_ * x);
    case Family::exp_sine: {
      const double t = theta0_ * x;
      const double s = std::sin(t);
      const double c = std::cos(t);
      const double E = std::exp(s);
      switch (j) {
        case 1: return c * E;
        case 2: return (c * c - s) * E;
        case 3: return c * (c * c - 3.0 * s - 1.0) * E;
        default: {
          const double c2 = c * c, s2 = s * s;
          return (c2 * c2 - 6.0 * c2 * s - 4.0 * c2 + 3.0 * s2 + s) * E;
        }
      }
    }
    default:
      // Quadrature grids keep nodes interior, so x = 0 never reaches here.
      require(x != 0.0, "model: periodic part of a custom family needs x != 0");
      return eval(j, theta0_, x) / ipow(x, p);
  }
}

double IntensityModel::envelope(int j, double x) const {
  require(j >= 0 && j <= 4, "model: envelope order must be 0..4");
  switch (family_) {
    case Family::homogeneous:
      return j == 0 ? theta0_ : (j == 1 ? 1.0 : 0.0);
    case Family::amplitude: {
      const double B = base_.eval(0, x);
      if (j == 0) return (B >= 0.0 ? theta0_ : theta0_ + delta_theta_max_) * B + lambda_;
      return j == 1 ? std::abs(B) : 0.0;
    }
    case Family::phase: {
      if (j == 0) return base_.min_value() + lambda_;
      return base_.max_abs_deriv(j);
    }
    case Family::frequency: {
      if (j == 0) return base_.min_value() + lambda_;
      return ipow(x, j) * base_.max_abs_deriv(j);
    }
    case Family::exp_sine: {
      // Coefficient bounds on the trig polynomials multiplying exp(sin).
      static constexpr double kCoef[5] = {1.0, 1.0, 2.0, 5.0, 15.0};
      if (j == 0) return std::exp(-1.0);
      return kCoef[j] * std::exp(1.0) * ipow(x, j);
    }
    case Family::custom:
      require(static_cast<bool>(custom_.envelope),
              "custom model: no envelopes are defined");
      return custom_.envelope(j, x);
  }
  throw invariant_error("model: unreachable family");
}

EnvelopeReport validate_envelopes(const IntensityModel& model, int x_points,
                                  int theta_points) {
  require(x_points >= 2 && theta_points >= 2,
          "validate_envelopes: need at least 2 grid points per axis");
  EnvelopeReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double n = model.domain_length();
  const double t0 = model.theta0();
  const double dt = model.delta_theta_max() / (theta_points - 1);
  const double dx = n / (x_points - 1);
  const int jmax = model.max_deriv();
  for (int it = 0; it < theta_points; ++it) {
    const double theta = t0 + it * dt;
    for (int ix = 0; ix < x_points; ++ix) {
      const double x = ix * dx;
      for (int j = 0; j <= jmax; ++j) {
        const double f = model.envelope(j, x);
        const double v = model.eval(j, theta, x);
        const double margin = j == 0 ? v - f : f - std::abs(v);
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_j = j;
          rep.worst_theta = theta;
          rep.worst_x = x;
        }
        if (margin < -1e-9 * (std::abs(f) + 1.0)) rep.ok = false;
      }
    }
  }
  return rep;
}

DerivativeReport check_derivatives(const IntensityModel& model, double rel_tol,
                                   int x_points, double step) {
  require(x_points >= 2, "check_derivatives: need at least 2 grid points");
  require(step > 0.0, "check_derivatives: step must be positive");
  const int jmax = model.max_deriv();
  DerivativeReport rep;
  const double n = model.domain_length();
  const double t0 = model.theta0();
  // Midpoint grid: an endpoint grid whose stride divides the period of a
  // periodic model samples every derivative at the same phase, which can
  // collapse the error scale below.
  const double dx = n / x_points;
  for (int j = 1; j <= jmax; ++j) {
    // Scale errors by the largest derivative magnitude seen on the grid, so
    // the check stays meaningful when |S^(j)| grows like x^j.  The stencil
    // below also carries a rounding residue of order eps * |S^(j-1)| / h,
    // which must be allowed for when S^(j) vanishes identically.
    double scale = 0.0;
    double scale_prev = 0.0;
    for (int ix = 0; ix < x_points; ++ix) {
      scale = std::max(scale, std::abs(model.eval(j, t0, (ix + 0.5) * dx)));
      scale_prev =
          std::max(scale_prev, std::abs(model.eval(j - 1, t0, (ix + 0.5) * dx)));
    }
    scale = std::max(scale, 1e-300);
    const double h = step;
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() *
                            scale_prev / (12.0 * h);
    for (int ix = 0; ix < x_points; ++ix) {
      const double x = (ix + 0.5) * dx;
      const double an = model.eval(j, t0, x);
      // 5-point central difference of the (j-1)-th derivative in theta.
      const double fd = (-model.eval(j - 1, t0 + 2 * h, x) +
                         8.0 * model.eval(j - 1, t0 + h, x) -
                         8.0 * model.eval(j - 1, t0 - h, x) +
                         model.eval(j - 1, t0 - 2 * h, x)) /
                        (12.0 * h);
      const double rel =
          std::max(0.0, std::abs(fd - an) - roundoff) / scale;
      if (rel > rep.worst_rel_error) {
        rep.worst_rel_error = rel;
        rep.worst_j = j;
        rep.worst_x = x;
      }
    }
  }
  rep.ok = rep.worst_rel_error <= rel_tol;
  return rep;
}

namespace {

std::map<std::string, CustomIntensity>& registry() {
  static std::map<std::string, CustomIntensity> reg;
  return reg;
}

// theta^2-scaled offset cosine with a dark current: S = theta^2 B(x) + lambda,
// B(x) = 2 + cos(2 pi x).  Second theta-derivative is nonzero, third vanishes.
CustomIntensity make_power_cosine() {
  CustomIntensity def;
  def.name = "power-cosine";
  def.max_deriv = 4;
  def.period = 1.0;
  def.period_theta_independent = true;
  def.structure = DerivStructure::periodic;
  auto B = [](double x) { return 2.0 + std::cos(kTwoPi * x); };
  def.deriv = [B](int j, double theta, double x) -> double {
    switch (j) {
      case 0: return theta * theta * B(x) + 0.5;
      case 1: return 2.0 * theta * B(x);
      case 2: return 2.0 * B(x);
      default: return 0.0;
    }
  };
  def.majorant = [B](double theta) { return theta * theta * 3.0 + 0.5; };
  // Envelopes assume theta in [1, 2] (theta0 = 1 with the default range).
  def.envelope = [B](int j, double x) -> double {
    switch (j) {
      case 0: return B(x) + 0.5;
      case 1: return 4.0 * B(x);
      case 2: return 2.0 * B(x);
      default: return 0.0;
    }
  };
  return def;
}

// Identically zero intensity: a sampler edge-case surrogate whose every
// realization is empty.  Sampling and counting work; moment integrals do
// not (the Fisher information vanishes), so inference on it is rejected.
CustomIntensity make_zero() {
  CustomIntensity def;
  def.name = "zero";
  def.max_deriv = 4;
  def.period = 1.0;
  def.period_theta_independent = true;
  def.structure = DerivStructure::periodic;
  def.deriv = [](int, double, double) { return 0.0; };
  def.majorant = [](double) { return 0.0; };
  def.envelope = [](int, double) { return 0.0; };
  return def;
}

void ensure_builtin_customs() {
  static bool done = [] {
    registry().emplace("power-cosine", make_power_cosine());
    registry().emplace("zero", make_zero());
    return true;
  }();
  (void)done;
}

}  // namespace

void register_custom_intensity(const CustomIntensity& def) {
  require(!def.name.empty(), "custom model: registry name must be non-empty");
  ensure_builtin_customs();
  registry()[def.name] = def;
}

bool custom_intensity_registered(const std::string& name) {
  ensure_builtin_customs();
  return registry().count(name) != 0;
}

IntensityModel make_custom_intensity(const std::string& name, double theta0,
                                     double n) {
  ensure_builtin_customs();
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::ostringstream os;
    os << "custom model: no registered intensity named '" << name << "'";
    throw config_error(os.str());
  }
  return IntensityModel::custom(it->second, theta0, n);
}

}  // namespace poissonht
