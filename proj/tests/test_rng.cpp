#include "parest/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

namespace parest {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, DerivedStreamsDiffer) {
  Rng a = Rng::derive(7, 0);
  Rng b = Rng::derive(7, 1);
  int equal = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  EXPECT_EQ(equal, 0);
}

TEST(Rng, DeriveIsDeterministic) {
  Rng a = Rng::derive(123, 456);
  Rng b = Rng::derive(123, 456);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalStandardMean) {
  Rng rng(2);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += rng.normal(0.0, 1.0);
  EXPECT_NEAR(sum / n, 0.0, 0.005);
}

TEST(Rng, NormalVariance) {
  Rng rng(3);
  const int n = 1000000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(5.0, 2.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(sum2 / n - mean * mean, 4.0, 0.05);
}

TEST(Rng, NormalRejectsBadSigma) {
  Rng rng(4);
  EXPECT_THROW(rng.normal(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(rng.normal(0.0, -1.0), std::invalid_argument);
  EXPECT_THROW(rng.normal(0.0, std::nan("")), std::invalid_argument);
}

TEST(Rng, ExponentialMean) {
  Rng rng(5);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential(2.0);
  EXPECT_NEAR(sum / n, 2.0, 0.01);
}

TEST(Rng, ExponentialTailSmallScaleNeverExceedsCap) {
  // P(x > 20 | beta = 0.5) = exp(-40) < 1e-17.
  Rng rng(6);
  for (int i = 0; i < 1000000; ++i) {
    ASSERT_LE(rng.exponential(0.5), 20.0);
  }
}

TEST(Rng, ExponentialTailMatchesSurvivalFunction) {
  // P(x > 20 | beta = 2) = exp(-10) ~ 4.54e-5.
  Rng rng(7);
  const int n = 10000000;
  int over = 0;
  for (int i = 0; i < n; ++i) {
    if (rng.exponential(2.0) > 20.0) ++over;
  }
  const double rate = static_cast<double>(over) / n;
  const double expected = std::exp(-10.0);
  EXPECT_NEAR(rate, expected, 0.15 * expected + 3.0 / n);
}

TEST(Rng, ExponentialRejectsBadScale) {
  Rng rng(8);
  EXPECT_THROW(rng.exponential(0.0), std::invalid_argument);
  EXPECT_THROW(rng.exponential(-2.0), std::invalid_argument);
}

TEST(Rng, BetaUniformCase) {
  Rng rng(9);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(1.0, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 0.002);
}

TEST(Rng, BetaSymmetricHalfShapes) {
  Rng rng(10);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(0.5, 0.5);
  EXPECT_NEAR(sum / n, 0.5, 0.002);
}

TEST(Rng, BetaAsymmetricMean) {
  Rng rng(11);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(2.0, 5.0);
  EXPECT_NEAR(sum / n, 2.0 / 7.0, 0.002);
}

TEST(Rng, BetaStaysInOpenUnitInterval) {
  Rng rng(12);
  for (int i = 0; i < 200000; ++i) {
    const double x = rng.beta(0.3, 0.7);
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

TEST(Rng, BetaRejectsNonPositiveShape) {
  Rng rng(13);
  EXPECT_THROW(rng.beta(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(rng.beta(1.0, -0.5), std::invalid_argument);
}

}  // namespace
}  // namespace parest
