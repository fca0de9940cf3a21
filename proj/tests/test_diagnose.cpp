#include <gtest/gtest.h>

#include <cmath>

#include "pcts/diagnose.hpp"
#include "pcts/errors.hpp"
#include "pcts/random.hpp"
#include "stat_oracles.hpp"

using namespace pcts;

namespace {

double std_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double std_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double poisson_cdf_sum(double lambda, long n) {
  double s = 0.0;
  for (long k = 0; k <= n; ++k) s += oracle::poisson_pmf(lambda, k);
  return std::min(s, 1.0);
}

double std_quantile(double u) {
  if (u <= 0.0) return -INFINITY;
  if (u >= 1.0) return INFINITY;
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

LatentAR ar1(double phi) { return LatentAR(Eigen::VectorXd::Constant(1, phi)); }

PitPredictive exact_pit(const CountVector& x, double lambda) {
  PitPredictive p{Eigen::VectorXd(x.size()), Eigen::VectorXd(x.size())};
  for (long t = 0; t < x.size(); ++t) {
    p.lower(t) = x(t) > 0 ? poisson_cdf_sum(lambda, x(t) - 1) : 0.0;
    p.upper(t) = poisson_cdf_sum(lambda, x(t));
  }
  return p;
}

}  // namespace

TEST(Residuals, TruncatedNormalMean) {
  const double lambda = 2.0;
  CountSeries s;
  s.x = (CountVector(3) << 1, 0, 5).finished();
  const ResidualSeries r = latent_residuals(s, constant_mean(lambda, 3), LatentAR());
  for (int t = 0; t < 3; ++t) {
    const double a = s.x(t) > 0 ? std_quantile(poisson_cdf_sum(lambda, s.x(t) - 1)) : -INFINITY;
    const double b = std_quantile(poisson_cdf_sum(lambda, s.x(t)));
    const double pa = std::isfinite(a) ? std_pdf(a) : 0.0;
    EXPECT_NEAR(r.zhat(t), (pa - std_pdf(b)) / (std_cdf(b) - std_cdf(a)), 1e-8);
    EXPECT_GT(r.zhat(t), a);
    EXPECT_LT(r.zhat(t), b);
    EXPECT_EQ(r.rhat(t), r.zhat(t));
    EXPECT_FALSE(r.missing[t]);
  }
}

TEST(Residuals, MonteCarloConditionalMean) {
  // E[Z | X = 1] at lambda = 2 by rejection sampling.
  Rng rng(17);
  double acc = 0.0;
  long hits = 0;
  const double a = std_quantile(poisson_cdf_sum(2.0, 0)), b = std_quantile(poisson_cdf_sum(2.0, 1));
  std::vector<double> kept;
  while (hits < 200000) {
    const double z = rng.normal();
    if (z > a && z <= b) {
      acc += z;
      kept.push_back(z);
      ++hits;
    }
  }
  CountSeries s;
  s.x = CountVector::Constant(1, 1);
  const double zhat = latent_residuals(s, constant_mean(2.0, 1), LatentAR()).zhat(0);
  EXPECT_LT(std::abs(zhat - acc / hits), 3.0 * oracle::sample_sd(kept) / std::sqrt(hits));
}

TEST(Residuals, Ar1Filtering) {
  const CountSeries s = gen_copula(Eigen::VectorXd::Constant(50, 3.0), ar1(0.4), 3);
  const ResidualSeries r = latent_residuals(s, constant_mean(3.0, 50), ar1(0.4));
  EXPECT_TRUE(std::isnan(r.rhat(0)));
  for (int t = 1; t < 50; ++t) EXPECT_NEAR(r.rhat(t), r.zhat(t) - 0.4 * r.zhat(t - 1), 1e-14);
  EXPECT_THROW(latent_residuals(s, constant_mean(3.0, 49), ar1(0.4)), DomainError);
}

TEST(Residuals, UnderflowMarkedMissing) {
  CountSeries s;
  s.x = (CountVector(2) << 1, 400).finished();
  const ResidualSeries r = latent_residuals(s, constant_mean(1.0, 2), LatentAR());
  EXPECT_FALSE(r.missing[0]);
  EXPECT_TRUE(r.missing[1]);
  EXPECT_TRUE(std::isnan(r.zhat(1)));
}

TEST(ResidualAcf, BandCalibration) {
  // Under white noise about 5% of sample autocorrelations leave the band.
  long outside = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng(derive_seed(5, rep));
    Eigen::VectorXd z(500);
    for (auto& v : z) v = rng.normal();
    const AcfTable a = residual_acf(z, 20);
    EXPECT_EQ(a.acf(0), 1.0);
    EXPECT_EQ(a.pacf(0), 1.0);
    EXPECT_NEAR(a.band, 1.96 / std::sqrt(500.0), 1e-15);
    EXPECT_NEAR(a.pacf(1), a.acf(1), 1e-14);
    for (int h = 1; h <= 20; ++h) {
      outside += std::abs(a.acf(h)) > a.band;
      ++total;
    }
  }
  const double rate = static_cast<double>(outside) / total;
  EXPECT_GT(rate, 0.03);
  EXPECT_LT(rate, 0.07);
}

TEST(ResidualAcf, Ar1Pacf) {
  Rng rng(6);
  const Eigen::VectorXd z = simulate_latent(ar1(0.7), 20000, rng);
  const AcfTable a = residual_acf(z, 5);
  EXPECT_NEAR(a.pacf(1), 0.7, 0.03);
  for (int h = 2; h <= 5; ++h) EXPECT_LT(std::abs(a.pacf(h)), 3.0 / std::sqrt(20000.0));
}

TEST(ResidualAcf, Errors) {
  EXPECT_THROW(residual_acf(Eigen::VectorXd::Constant(50, 2.0), 5), DomainError);
  EXPECT_THROW(residual_acf(Eigen::VectorXd::LinSpaced(10, 0, 1), 2), DomainError);
  Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(30, 0, 1);
  z(3) = std::nan("");
  EXPECT_EQ(residual_acf(z, 2).n, 29);
}

TEST(Pit, ExactForWhiteNoise) {
  const CountSeries s = gen_copula(Eigen::VectorXd::Constant(60, 2.5), LatentAR(), 11);
  const PitPredictive p =
      pit_predictive(s.x, Eigen::VectorXd::Constant(60, 2.5), LatentAR(), ParticleSystem::make(60, 5, 1));
  const PitPredictive e = exact_pit(s.x, 2.5);
  EXPECT_LT((p.lower - e.lower).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.upper - e.upper).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pit, FirstStepIsMarginal) {
  const CountSeries s = gen_copula(Eigen::VectorXd::Constant(30, 2.5), ar1(0.6), 12);
  const PitPredictive p =
      pit_predictive(s.x, Eigen::VectorXd::Constant(30, 2.5), ar1(0.6), ParticleSystem::make(30, 200, 1));
  const PitPredictive e = exact_pit(s.x, 2.5);
  EXPECT_NEAR(p.upper(0), e.upper(0), 1e-12);
  EXPECT_NEAR(p.lower(0), e.lower(0), 1e-12);
  for (long t = 0; t < 30; ++t) {
    EXPECT_LE(p.lower(t), p.upper(t));
    EXPECT_GE(p.lower(t), 0.0);
    EXPECT_LE(p.upper(t), 1.0);
  }
}

TEST(Pit, HistogramInvariants) {
  const CountSeries s = gen_copula(Eigen::VectorXd::Constant(200, 1.5), LatentAR(), 13);
  const PitPredictive p = exact_pit(s.x, 1.5);
  const Eigen::VectorXd f = pit_mean_cdf(p, 100);
  EXPECT_EQ(f(0), 0.0);
  EXPECT_EQ(f(100), 1.0);
  for (int i = 1; i <= 100; ++i) EXPECT_GE(f(i), f(i - 1));
  const Eigen::VectorXd bins = pit_bins(p);
  ASSERT_EQ(bins.size(), kPitBins);
  EXPECT_NEAR(bins.sum(), 1.0, 1e-12);
  EXPECT_TRUE((bins.array() >= 0.0).all());
  for (int i = 0; i < kPitBins; ++i) EXPECT_NEAR(bins(i), f(10 * (i + 1)) - f(10 * i), 1e-12);

  // A continuous variable (atoms of width 1/n) gives F_t(u) = u exactly
  // when its PIT values sit on bin midpoints.
  PitPredictive u{Eigen::VectorXd(10), Eigen::VectorXd(10)};
  for (int i = 0; i < 10; ++i) {
    u.lower(i) = 0.1 * i;
    u.upper(i) = 0.1 * (i + 1);
  }
  EXPECT_NEAR(q_statistic(pit_bins(u)), 0.0, 1e-15);
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(kPitBins);
  spike(0) = 1.0;
  EXPECT_NEAR(q_statistic(spike), 0.18, 1e-15);
}

TEST(PitSummary, DeterministicAcrossThreads) {
  const CountSeries s = gen_copula(Eigen::VectorXd::Constant(60, 2.0), ar1(0.5), 14);
  const FittedCopula fit{constant_mean(2.0, 60), ar1(0.5)};
  PitConfig cfg;
  cfg.particles = 50;
  cfg.b_sims = 20;
  const PitSummary a = pit_summary(s, fit, cfg);
  cfg.threads = 4;
  const PitSummary b = pit_summary(s, fit, cfg);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.fbar, b.fbar);
  EXPECT_EQ(a.b_sims, 20);
  EXPECT_FALSE(a.warning.empty());
  EXPECT_GE(a.p_value, 0.0);
  EXPECT_LE(a.p_value, 1.0);
  EXPECT_THROW(pit_summary(s, FittedCopula{constant_mean(2.0, 59), ar1(0.5)}, cfg), DomainError);
}

TEST(PitSummary, DetectsOverdispersion) {
  // Negative binomial counts with mean 3 and variance 12 judged against a
  // Poisson(3) white-noise model.
  Rng rng(15);
  CountSeries s;
  s.x.resize(300);
  for (long t = 0; t < 300; ++t) {
    const double g = -std::log(rng.uniform()) * 3.0;  // Gamma(1, 3)
    s.x(t) = rng.poisson(std::max(g, 1e-12));
  }
  PitConfig cfg;
  cfg.particles = 10;
  cfg.b_sims = 100;
  const PitSummary r = pit_summary(s, FittedCopula{constant_mean(3.0, 300), LatentAR()}, cfg);
  EXPECT_TRUE(r.warning.empty());
  EXPECT_LT(r.p_value, 0.05);
}
