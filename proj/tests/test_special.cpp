#include <gtest/gtest.h>

#include <cmath>

#include "pcts/errors.hpp"
#include "pcts/random.hpp"
#include "pcts/special.hpp"

using namespace pcts;

namespace {

// Term-by-term summation in long double.
double cdf_by_summation(double lambda, long n) {
  long double term = std::exp(-static_cast<long double>(lambda));
  long double s = term;
  for (long k = 1; k <= n; ++k) {
    term *= lambda / k;
    s += term;
  }
  return static_cast<double>(s);
}

}  // namespace

TEST(PoissonCdf, EmptySumAndSingleTerm) {
  EXPECT_EQ(poisson_cdf(1.0, -1), 0.0);
  EXPECT_NEAR(poisson_cdf(1.0, 0), std::exp(-1.0), 1e-15);
}

TEST(PoissonCdf, MatchesSummation) {
  EXPECT_NEAR(poisson_cdf(2.0, 3), cdf_by_summation(2.0, 3), 1e-12);
  EXPECT_NEAR(poisson_cdf(2.0, 3), 0.85712346049854704866, 1e-14);
  for (double lambda : {0.1, 0.7, 4.0, 17.0, 29.0}) {
    for (long n = 0; n < 60; n += 3) {
      EXPECT_NEAR(poisson_cdf(lambda, n), cdf_by_summation(lambda, n), 1e-12);
    }
  }
}

TEST(PoissonCdf, IncompleteGammaBranch) {
  EXPECT_NEAR(poisson_cdf(50.0, 40), 0.086070000117960956957, 1e-13);
  EXPECT_NEAR(poisson_sf(100.0, 150) / 1.2330944191600357493e-6, 1.0, 1e-10);
  EXPECT_NEAR(poisson_sf(10.0, 30) / 7.9837946599111854586e-8, 1.0, 1e-10);
}

TEST(PoissonCdf, RejectsBadLambda) {
  EXPECT_THROW(poisson_cdf(0.0, 1), DomainError);
  EXPECT_THROW(poisson_cdf(-1.0, 1), DomainError);
  EXPECT_THROW(poisson_cdf(std::nan(""), 1), DomainError);
  EXPECT_THROW(poisson_cdf(kInf, 1), DomainError);
}

TEST(PoissonQuantile, Examples) {
  EXPECT_EQ(poisson_quantile(1.0, 0.0), 0);
  EXPECT_EQ(poisson_quantile(1.0, 0.5), 1);
  long n = 0;
  while (cdf_by_summation(5.0, n) < 0.999) ++n;
  EXPECT_EQ(poisson_quantile(5.0, 0.999), n);
  EXPECT_THROW(poisson_quantile(1.0, 1.0), DomainError);
  EXPECT_THROW(poisson_quantile(1.0, -0.1), DomainError);
}

TEST(PoissonQuantile, RightContinuousAtAtoms) {
  for (double lambda : {0.3, 2.0, 12.0, 45.0}) {
    for (long n = 0; n < 40; ++n) {
      const double u = poisson_cdf(lambda, n);
      if (u >= 1.0) break;
      EXPECT_EQ(poisson_quantile(lambda, u), n) << lambda << " " << n;
    }
  }
}

TEST(PoissonQuantile, TailSumRepresentation) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double lambda = 0.05 + 20.0 * rng.uniform();
    const double u = rng.uniform();
    long count = 0;
    for (long k = 1; k < 200; ++k) count += cdf_by_summation(lambda, k - 1) < u ? 1 : 0;
    const long q = poisson_quantile(lambda, u);
    EXPECT_EQ(q, count);
    EXPECT_GE(poisson_cdf(lambda, q), u);
  }
}

TEST(PoissonCutpoint, TailAccuracy) {
  EXPECT_EQ(poisson_cutpoint(1.0, -1), -kInf);
  EXPECT_NEAR(poisson_cutpoint(1.0, 20), 9.292396704368494002, 1e-8);
  EXPECT_TRUE(std::isfinite(poisson_cutpoint(1.0, 30)));
}

TEST(Normal, Basics) {
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  EXPECT_EQ(normal_quantile(0.0), -kInf);
  EXPECT_EQ(normal_quantile(1.0), kInf);
  EXPECT_NEAR(normal_quantile(0.975), 1.9599639845400542355, 1e-12);
  EXPECT_NEAR(normal_cdf(normal_quantile(0.975)), 0.975, 1e-9);
  EXPECT_NEAR(normal_quantile(1e-300), -37.0470962993612, 1e-9);
  EXPECT_NEAR(normal_quantile(1e-20), -9.262340089798409, 1e-10);
  EXPECT_THROW(normal_quantile(1.5), DomainError);
  EXPECT_THROW(normal_quantile(-0.5), DomainError);
}

TEST(Normal, RoundTripAndSymmetry) {
  for (double e = -15; e <= -0.5; e += 0.25) {
    const double u = std::pow(10.0, e);
    EXPECT_NEAR(normal_cdf(normal_quantile(u)), u, 1e-12);
    EXPECT_NEAR(normal_cdf(normal_quantile(1.0 - u)), 1.0 - u, 1e-12);
  }
  for (double z = -8; z <= 8; z += 0.37) {
    EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
  }
}

TEST(Normal, IntervalMassFarTail) {
  const double m = normal_interval_mass(20.0, 21.0);
  EXPECT_GT(m, 0.0);
  EXPECT_NEAR(m / (normal_cdf(-20.0) - normal_cdf(-21.0)), 1.0, 1e-10);
}

TEST(Bessel, Values) {
  EXPECT_EQ(bessel_i(0, 0.0), 1.0);
  EXPECT_EQ(bessel_i(1, 0.0), 0.0);
  // 40-term series
  long double s = 0.0L, term = 1.0L;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) term *= 4.0L / (k * k);
    s += term;
  }
  EXPECT_NEAR(bessel_i(0, 4.0), static_cast<double>(s), 1e-10);
  EXPECT_NEAR(bessel_i(0, 4.0), 11.301921952136330496, 1e-10);
  EXPECT_NEAR(bessel_i(1, 4.0), 9.7594651537044499095, 1e-10);
  EXPECT_NEAR(bessel_i_scaled(0, 50.0), 0.05656162664745419253, 1e-14);
  EXPECT_NEAR(bessel_i_scaled(1, 50.0), 0.055993123892895399644, 1e-14);
  EXPECT_NEAR(bessel_i_scaled(0, 29.5), 0.073768617278728589512, 1e-14);
  EXPECT_NEAR(bessel_i_scaled(1, 30.5), 0.071339539285262003724, 1e-14);
  EXPECT_TRUE(std::isfinite(bessel_i_scaled(0, 4e4)));
  EXPECT_THROW(bessel_i(2, 1.0), DomainError);
}

TEST(TruncatedNormal, Examples) {
  EXPECT_NEAR(truncated_normal_sample(0.0, 1.0, {}, 0.5), 0.0, 1e-15);
  for (double u = 1e-9; u < 1.0; u += 0.0137) {
    EXPECT_GT(truncated_normal_sample(0.0, 1.0, {0.0, kInf}, u), 0.0);
  }
  Rng rng(5);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = truncated_normal_sample(0.0, 1.0, {-1.0, 1.0}, rng.uniform());
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(n));
}

TEST(TruncatedNormal, StrictlyIncreasingAndInside) {
  for (const Interval iv : {Interval{-1.0, 2.0}, Interval{6.0, 7.0}, Interval{-kInf, -9.0},
                            Interval{12.0, kInf}}) {
    double prev = -kInf;
    for (int i = 1; i < 1000; ++i) {
      const double z = truncated_normal_sample(0.3, 1.0, iv, i / 1000.0);
      EXPECT_GT(z, prev);
      EXPECT_GT(z, iv.lo);
      EXPECT_LE(z, iv.hi);
      prev = z;
    }
  }
}

TEST(TruncatedNormal, DegenerateInterval) {
  try {
    truncated_normal_sample(0.0, 1.0, {50.0, 50.0}, 0.5);
    FAIL();
  } catch (const DegenerateIntervalError& e) {
    EXPECT_EQ(e.lo(), 50.0);
    EXPECT_EQ(e.hi(), 50.0);
  }
}

TEST(TruncatedNormal, Mean) {
  EXPECT_NEAR(truncated_normal_mean(0.0, 1.0, {-1.0, 2.0}), 0.22963717909132896862, 1e-13);
  EXPECT_NEAR(truncated_normal_mean(0.0, 1.0, {8.0, kInf}), 8.1213681122361126807, 1e-9);
}
