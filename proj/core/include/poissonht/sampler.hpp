#pragma once

// Realizations of the point process on [0, n] by thinning: candidates from a
// homogeneous process at the model's majorant rate, kept with probability
// S(theta, x) / majorant.  Only an intensity upper bound is needed, so the
// same sampler serves every family.

#include <cstdint>
#include <vector>

#include "poissonht/intensity.hpp"
#include "poissonht/rng.hpp"

namespace poissonht {

struct Realization {
  std::vector<double> points;  // sorted ascending, all in [0, domain]
  double domain = 0.0;
  double theta_used = 0.0;
  std::uint64_t seed_used = 0;  // derived stream seed actually fed to the engine
};

// Deterministic for fixed (model, theta, seed): consumes exactly two draws
// per candidate.  Raises invariant_error if the intensity goes negative or
// exceeds the majorant at a candidate point.
Realization sample(const IntensityModel& model, double theta,
                   const SeedSpec& seed);

// Number of points in the half-open interval [sub_lower, sub_upper), which
// must lie within the realization's domain.
long long count(const Realization& realization, double sub_lower,
                double sub_upper);

}  // namespace poissonht
