#include "poissonht/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "poissonht/errors.hpp"
#include "poissonht/intensity.hpp"
#include "poissonht/rng.hpp"
#include "support/oracles.hpp"

namespace poissonht {
namespace {

IntensityModel amplitude_model(double n) {
  return IntensityModel::amplitude(1.0, n, 0.5,
                                   BaseSignal::offset_cosine(2.0, 1.0, 1.0));
}

TEST(Sampler, DeterministicForFixedSeed) {
  const auto m = amplitude_model(50.0);
  const Realization a = sample(m, 1.0, SeedSpec{42, 7});
  const Realization b = sample(m, 1.0, SeedSpec{42, 7});
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i], b.points[i]) << "i=" << i;
  }
  const Realization c = sample(m, 1.0, SeedSpec{42, 8});
  EXPECT_NE(a.points, c.points);
  EXPECT_EQ(a.seed_used, rng::stream_seed(42, 7));
  EXPECT_EQ(a.theta_used, 1.0);
  EXPECT_EQ(a.domain, 50.0);
}

TEST(Sampler, PointsAreSortedAndInDomain) {
  const auto m = amplitude_model(100.0);
  const Realization r = sample(m, 1.0, SeedSpec{1234, 0});
  EXPECT_TRUE(std::is_sorted(r.points.begin(), r.points.end()));
  ASSERT_FALSE(r.points.empty());
  EXPECT_GE(r.points.front(), 0.0);
  EXPECT_LE(r.points.back(), 100.0);
}

TEST(Sampler, MeanCountMatchesIntensityMass) {
  // Homogeneous theta = 1 over [0, 1000]: counts are Poisson(1000).
  const auto hom = IntensityModel::homogeneous(1.0, 1000.0);
  const int reps = 2000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    sum += static_cast<double>(sample(hom, 1.0, SeedSpec{99, static_cast<std::uint64_t>(i)}).points.size());
  }
  const double mean = sum / reps;
  const double se = std::sqrt(1000.0 / reps);
  EXPECT_NEAR(mean, 1000.0, 4.0 * se);

  // Amplitude over [0, 100]: mass = theta * int B + lambda n = 250.
  const auto amp = amplitude_model(100.0);
  sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    sum += static_cast<double>(sample(amp, 1.0, SeedSpec{7, static_cast<std::uint64_t>(i)}).points.size());
  }
  EXPECT_NEAR(sum / reps, 250.0, 4.0 * std::sqrt(250.0 / reps));
}

TEST(Sampler, DisjointWindowsAreUncorrelated) {
  const auto hom = IntensityModel::homogeneous(1.0, 100.0);
  const int reps = 2000;
  std::vector<double> left(reps), right(reps);
  for (int i = 0; i < reps; ++i) {
    const Realization r = sample(hom, 1.0, SeedSpec{555, static_cast<std::uint64_t>(i)});
    left[i] = static_cast<double>(count(r, 0.0, 50.0));
    right[i] = static_cast<double>(count(r, 50.0, 100.0));
  }
  double ml = 0.0, mr = 0.0;
  for (int i = 0; i < reps; ++i) {
    ml += left[i];
    mr += right[i];
  }
  ml /= reps;
  mr /= reps;
  double cov = 0.0, vl = 0.0, vr = 0.0;
  for (int i = 0; i < reps; ++i) {
    cov += (left[i] - ml) * (right[i] - mr);
    vl += (left[i] - ml) * (left[i] - ml);
    vr += (right[i] - mr) * (right[i] - mr);
  }
  const double corr = cov / std::sqrt(vl * vr);
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(reps)));
}

TEST(Sampler, CountsFollowThePoissonLaw) {
  // Quick GOF at the 0.001 level; the acceptance suite repeats this at
  // larger scale.
  const auto hom = IntensityModel::homogeneous(1.0, 10.0);
  const int reps = 20000;
  const double mean = 10.0;
  std::vector<long long> hist(26, 0);
  for (int i = 0; i < reps; ++i) {
    const auto sz = sample(hom, 1.0, SeedSpec{2024, static_cast<std::uint64_t>(i)}).points.size();
    hist[std::min<std::size_t>(sz, hist.size() - 1)] += 1;
  }
  // Merge cells below an expected count of five into the open tail.
  std::vector<long long> observed;
  std::vector<double> probs;
  double tail_prob = 1.0;
  long long tail_count = reps;
  for (std::size_t k = 0; k + 1 < hist.size(); ++k) {
    const double p = testing::poisson_pmf(mean, static_cast<long long>(k));
    if (p * reps >= 5.0) {
      observed.push_back(hist[k]);
      probs.push_back(p);
      tail_prob -= p;
      tail_count -= hist[k];
    }
  }
  observed.push_back(tail_count);
  probs.push_back(tail_prob);
  const double stat = testing::chi_square_statistic(observed, probs, reps);
  const double crit = testing::chi_square_quantile(
      static_cast<double>(observed.size() - 1), 0.999);
  EXPECT_LT(stat, crit);
}

TEST(Sampler, ZeroIntensityYieldsEmptyRealization) {
  const auto zero = make_custom_intensity("zero", 1.0, 100.0);
  const Realization r = sample(zero, 1.0, SeedSpec{5, 0});
  EXPECT_TRUE(r.points.empty());
  EXPECT_EQ(r.domain, 100.0);
}

TEST(Sampler, RejectsNonsenseInputs) {
  const auto m = amplitude_model(10.0);
  EXPECT_THROW(sample(m, std::nan(""), SeedSpec{1, 0}), config_error);

  CustomIntensity lying;
  lying.name = "sampler-lying-majorant";
  lying.max_deriv = 1;
  lying.deriv = [](int j, double, double) { return j == 0 ? 2.0 : 0.0; };
  lying.majorant = [](double) { return 1.0; };  // below the true intensity
  register_custom_intensity(lying);
  const auto bad = make_custom_intensity("sampler-lying-majorant", 1.0, 10.0);
  EXPECT_THROW(sample(bad, 1.0, SeedSpec{1, 0}), invariant_error);

  CustomIntensity negative;
  negative.name = "sampler-negative";
  negative.max_deriv = 1;
  negative.deriv = [](int j, double, double x) {
    return j == 0 ? std::cos(x) : 0.0;
  };
  negative.majorant = [](double) { return 1.0; };
  register_custom_intensity(negative);
  const auto neg = make_custom_intensity("sampler-negative", 1.0, 10.0);
  EXPECT_THROW(sample(neg, 1.0, SeedSpec{1, 0}), invariant_error);
}

TEST(CountOperator, HalfOpenWindows) {
  Realization r;
  r.domain = 10.0;
  r.points = {1.0, 2.0, 2.0, 3.0, 9.5};
  EXPECT_EQ(count(r, 0.0, 10.0), 5);
  EXPECT_EQ(count(r, 2.0, 3.0), 2);   // right endpoint excluded
  EXPECT_EQ(count(r, 3.0, 9.5), 1);
  EXPECT_EQ(count(r, 4.0, 4.0), 0);
  EXPECT_THROW(count(r, 5.0, 4.0), config_error);
  EXPECT_THROW(count(r, -1.0, 4.0), config_error);
  EXPECT_THROW(count(r, 0.0, 11.0), config_error);
}

TEST(SeedStreams, MixerSeparatesNeighbours) {
  const auto a = rng::stream_seed(1, 0);
  const auto b = rng::stream_seed(1, 1);
  const auto c = rng::stream_seed(2, 0);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(b, c);
  EXPECT_NE(rng::stream_seed(1, 0, 0), rng::stream_seed(1, 0, 1));
}

}  // namespace
}  // namespace poissonht
