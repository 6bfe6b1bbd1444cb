#include "poissonht/gauss.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "poissonht/errors.hpp"
#include "support/oracles.hpp"

namespace poissonht {
namespace {

TEST(NormalPdf, StandardValues) {
  EXPECT_NEAR(normal_pdf(0.0), 0.3989422804014327, 1e-15);
  EXPECT_DOUBLE_EQ(normal_pdf(1.5), normal_pdf(-1.5));
  EXPECT_NEAR(normal_pdf(1.0), 0.24197072451914337, 1e-15);
}

TEST(NormalCdf, StandardValues) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  for (double x : {-3.0, -1.0, -0.25, 0.5, 2.5}) {
    EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-15) << "x=" << x;
  }
  EXPECT_LT(normal_cdf(-10.0), 1e-22);
}

TEST(NormalQuantile, MatchesBisectionOracle) {
  for (double p : {1e-6, 0.001, 0.025, 0.05, 0.1, 0.5, 0.9, 0.975, 0.999}) {
    EXPECT_NEAR(normal_quantile(p), testing::normal_quantile_bisect(p), 1e-12)
        << "p=" << p;
  }
}

TEST(NormalQuantile, RoundTripsCdf) {
  for (double p : {0.01, 0.05, 0.5, 0.95, 0.99}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14) << "p=" << p;
  }
}

TEST(NormalQuantile, FrozenUpperFivePercentPoint) {
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-12);
}

TEST(NormalQuantile, RejectsBoundaryProbabilities) {
  EXPECT_THROW(normal_quantile(0.0), config_error);
  EXPECT_THROW(normal_quantile(1.0), config_error);
  EXPECT_THROW(normal_quantile(-0.1), config_error);
}

}  // namespace
}  // namespace poissonht
