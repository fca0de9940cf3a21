#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pcts/copula_link.hpp"
#include "pcts/errors.hpp"
#include "pcts/random.hpp"
#include "pcts/special.hpp"

using namespace pcts;

namespace {

struct GaussLegendre {
  std::vector<double> x, w;
};

// Nodes on [-1, 1] by Newton iteration on P_n.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre g{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.x[i] = z;
    g.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

double std_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double he(int k, double x) {
  double h0 = 1.0, h1 = x;
  if (k == 0) return h0;
  for (int j = 2; j <= k; ++j) {
    const double h2 = x * h1 - (j - 1) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// E[G(Z) He_k(Z)] / k! with G(z) = F^{-1}(Phi(z)) integrated cell by cell:
// G equals n on (c_{n-1}, c_n].
double g_by_quadrature(double lambda, int k) {
  static const GaussLegendre gl = gauss_legendre(40);
  double total = 0.0;
  double lo = poisson_cutpoint(lambda, 0);
  for (long n = 1; n < 400; ++n) {
    double hi = poisson_cutpoint(lambda, n);
    const bool last = !std::isfinite(hi) || poisson_sf(lambda, n) < 1e-300;
    if (last) hi = std::max(lo + 1.0, 40.0);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double cell = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      const double z = mid + half * gl.x[i];
      cell += gl.w[i] * he(k, z) * std_pdf(z);
    }
    total += n * half * cell;
    if (last) break;
    lo = hi;
  }
  return total / std::tgamma(k + 1.0);
}

struct BatchStat {
  double mean;
  double se;
};

// Mean and standard error from `batches` equal batches of a statistic.
template <typename F>
BatchStat batch_means(int batches, F&& batch_value) {
  std::vector<double> v(batches);
  double s = 0.0;
  for (int b = 0; b < batches; ++b) s += v[b] = batch_value(b);
  const double mean = s / batches;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (batches - 1) / batches)};
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Hermite, Polynomials) {
  EXPECT_EQ(hermite_poly(0, 3.7), 1.0);
  EXPECT_EQ(hermite_poly(2, 2.0), 3.0);
  const double x = 1.3;
  EXPECT_NEAR(hermite_poly(5, x), std::pow(x, 5) - 10 * std::pow(x, 3) + 15 * x, 1e-12);
  EXPECT_NEAR(hermite_poly(8, x),
              std::pow(x, 8) - 28 * std::pow(x, 6) + 210 * std::pow(x, 4) - 420 * x * x + 105,
              1e-9);
  const Eigen::VectorXd all = hermite_polys(8, x);
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(all(k), hermite_poly(k, x), 1e-12);
}

TEST(Hermite, CoefficientsMatchQuadrature) {
  for (double lambda : {0.3, 1.0, 2.0, 10.0}) {
    const HermiteExpansion e = hermite_coefficients(lambda, 12);
    for (int k = 1; k <= 12; ++k) {
      EXPECT_NEAR(e.g(k - 1), g_by_quadrature(lambda, k), 1e-6) << lambda << " k=" << k;
    }
  }
}

TEST(Hermite, FirstCoefficientMonteCarlo) {
  const HermiteExpansion e = hermite_coefficients(1.0, 5);
  Rng rng(99);
  const BatchStat s = batch_means(100, [&](int) {
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double z = rng.normal();
      acc += poisson_quantile(1.0, normal_cdf(z)) * z;
    }
    return acc / 10000;
  });
  EXPECT_LT(std::abs(e.g(0) - s.mean), 3.0 * s.se);
}

TEST(Hermite, LinkCoefficients) {
  for (double lambda : {0.1, 1.0, 10.0}) {
    const HermiteExpansion e = hermite_coefficients(lambda, 30);
    EXPECT_TRUE((e.eta.array() >= 0.0).all());
    EXPECT_LE(e.eta.sum(), 1.0 + 1e-12);
    EXPECT_GE(e.tail_mass, -1e-8);
    for (int k = 1; k <= 30; ++k) {
      EXPECT_NEAR(e.eta(k - 1), std::tgamma(k + 1.0) * e.g(k - 1) * e.g(k - 1) / lambda, 1e-12);
    }
    EXPECT_LE(hermite_coefficients(lambda, 50).tail_mass, e.tail_mass);
  }
  EXPECT_NEAR(hermite_coefficients(10.0, 30).eta(0), 0.9858690782201263, 1e-9);
  EXPECT_THROW(hermite_coefficients(1.0, 51), DomainError);
  EXPECT_THROW(hermite_coefficients(1.0, 0), DomainError);
}

TEST(Link, Values) {
  for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
    const HermiteExpansion e = hermite_coefficients(lambda, 30);
    EXPECT_EQ(link(e, 0.0), 0.0);
    EXPECT_NEAR(link(e, 1.0), 1.0 - e.tail_mass, 1e-12);
    EXPECT_NEAR(link(e, -1.0), neg_bound(lambda), 2e-2) << lambda;
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double u = i / 100.0;
      EXPECT_LE(std::abs(link(e, u)), u + 1e-15);
      EXPECT_LE(std::abs(link(e, -u)), u + 1e-15);
      EXPECT_GT(link(e, u), prev);
      prev = link(e, u);
    }
  }
  const HermiteExpansion e = hermite_coefficients(1.0);
  EXPECT_THROW(link(e, 1.01), DomainError);
}

TEST(NegBound, AntitheticMonteCarlo) {
  for (double lambda : {0.5, 1.0, 5.0}) {
    Rng rng(static_cast<std::uint64_t>(lambda * 1000));
    const BatchStat s = batch_means(100, [&](int) {
      std::vector<double> x(10000), y(10000);
      for (int i = 0; i < 10000; ++i) {
        const double z = rng.normal();
        x[i] = poisson_quantile(lambda, normal_cdf(z));
        y[i] = poisson_quantile(lambda, normal_cdf(-z));
      }
      return correlation(x, y);
    });
    EXPECT_LT(std::abs(neg_bound(lambda) - s.mean), 3.0 * s.se) << lambda;
  }
}

TEST(NegBound, ShapeOfCurve) {
  EXPECT_LT(neg_bound(50.0), -0.95);
  double prev = neg_bound(0.01);
  bool rises = false;
  for (int i = 2; i <= 1000; ++i) {
    const double v = neg_bound(0.01 * i);
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 0.0);
    EXPECT_LE(std::abs(v - prev), 0.05);
    if (i <= 300 && v > prev) rises = true;
    prev = v;
  }
  EXPECT_TRUE(rises);
}

TEST(Kappa, Values) {
  EXPECT_NEAR(kappa(1.0), 0.47622238819739130131, 1e-10);
  long double tail = 0.0L;
  for (long n = 1; n < 200; ++n) {
    const double s = poisson_sf(3.7, n - 1);
    tail += static_cast<long double>(s) * s;
  }
  EXPECT_NEAR(kappa(3.7), static_cast<double>(tail), 1e-10);
  EXPECT_LT(kappa(1e-6), 1e-5);
  for (double lambda = 0.01; lambda < 2000; lambda *= 1.7) {
    EXPECT_LT(kappa(lambda), lambda);
    EXPECT_GT(kappa(lambda), 0.0);
  }
}

TEST(MinExpect, Values) {
  for (double lambda : {0.2, 1.0, 7.5}) {
    EXPECT_NEAR(min_expect_heterogeneous(lambda, lambda), kappa(lambda), 1e-10);
  }
  EXPECT_EQ(min_expect_heterogeneous(1.0, 2.0), min_expect_heterogeneous(2.0, 1.0));
  EXPECT_NEAR(min_expect_heterogeneous(1.0, 2.0), 0.73240925248214757054, 1e-12);
  Rng rng(3);
  const BatchStat s = batch_means(100, [&](int) {
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) acc += std::min(rng.poisson(1.0), rng.poisson(2.0));
    return acc / 10000;
  });
  EXPECT_LT(std::abs(min_expect_heterogeneous(1.0, 2.0) - s.mean), 3.0 * s.se);
}

TEST(SuperBound, OrderingAndSign) {
  for (int i = 1; i <= 100; ++i) {
    const double lambda = 0.1 * i;
    const SuperBound b = super_neg_bound(lambda);
    EXPECT_LE(b.value, 0.0);
    EXPECT_GE(b.value, neg_bound(lambda) - 1e-12) << lambda;
    EXPECT_GT(b.p_star, 0.0);
    EXPECT_LT(b.p_star, 1.0);
    const CorrelationBound c = correlation_bound(lambda);
    EXPECT_EQ(c.super_nb, b.value);
    EXPECT_LE(c.nb, c.super_nb);
  }
}

TEST(SuperBound, AntiCorrelatedBernoulliPairs) {
  // p = 1/2 with B' = 1 - B gives gamma_B = -1/4.
  const double lambda = 1.5;
  const double expected = -0.25 * kappa(2.0 * lambda) / lambda;
  Rng rng(21);
  const BatchStat s = batch_means(100, [&](int) {
    std::vector<double> x(10000), y(10000);
    for (int i = 0; i < 10000; ++i) {
      const long n1 = rng.poisson(2.0 * lambda);
      const long n2 = rng.poisson(2.0 * lambda);
      std::vector<int> b(std::max(n1, n2));
      for (auto& v : b) v = rng.bernoulli(0.5);
      double sx = 0, sy = 0;
      for (long k = 0; k < n1; ++k) sx += b[k];
      for (long k = 0; k < n2; ++k) sy += 1 - b[k];
      x[i] = sx;
      y[i] = sy;
    }
    return correlation(x, y);
  });
  EXPECT_LT(std::abs(expected - s.mean), 3.0 * s.se);
}
