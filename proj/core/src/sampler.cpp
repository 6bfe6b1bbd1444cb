#include "poissonht/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poissonht/errors.hpp"

namespace poissonht {

Realization sample(const IntensityModel& model, double theta,
                   const SeedSpec& seed) {
  if (!std::isfinite(theta))
    throw config_error("sample: theta must be finite");
  const double s_max = model.majorant(theta);
  if (!(std::isfinite(s_max) && s_max >= 0.0))
    throw config_error("sample: model majorant is not a finite bound");

  Realization out;
  out.domain = model.domain_length();
  out.theta_used = theta;
  out.seed_used =
      rng::stream_seed(seed.master_seed, seed.replication_index, 0);
  if (s_max == 0.0) return out;

  std::mt19937_64 gen(out.seed_used);
  const double tol = 1e-12 * s_max;
  double t = 0.0;
  for (;;) {
    t += rng::exponential(gen, s_max);
    if (t >= out.domain) break;
    const double accept = rng::uniform01(gen);
    const double s = model.eval(0, theta, t);
    if (s < 0.0) {
      std::ostringstream os;
      os << "sample: intensity negative at x = " << t;
      throw invariant_error(os.str());
    }
    if (s > s_max + tol) {
      std::ostringstream os;
      os << "sample: intensity " << s << " exceeds majorant " << s_max
         << " at x = " << t;
      throw invariant_error(os.str());
    }
    if (accept * s_max < s) out.points.push_back(t);
  }
  return out;
}

long long count(const Realization& realization, double sub_lower,
                double sub_upper) {
  if (!(sub_lower <= sub_upper))
    throw config_error("count: interval bounds out of order");
  if (sub_lower < 0.0 || sub_upper > realization.domain)
    throw config_error("count: interval outside the realization domain");
  const auto& p = realization.points;
  const auto lo = std::lower_bound(p.begin(), p.end(), sub_lower);
  const auto hi = std::lower_bound(lo, p.end(), sub_upper);
  return static_cast<long long>(hi - lo);
}

}  // namespace poissonht
