#include <cmath>
#include <vector>

#include "ghk_kernel.hpp"
#include "pcts/errors.hpp"
#include "pcts/fit.hpp"
#include "pcts/parallel.hpp"
#include "pcts/random.hpp"
#include "pcts/special.hpp"

namespace pcts {

ParticleSystem ParticleSystem::make(long n, long m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw DomainError("particle system needs n >= 1 and m >= 1");
  ParticleSystem ps;
  ps.crn.resize(n, m);
  for (long k = 0; k < m; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    for (long t = 0; t < n; ++t) ps.crn(t, k) = rng.uniform();
  }
  return ps;
}

Cutpoints copula_cutpoints(const CountVector& x, const Eigen::VectorXd& lambda_path) {
  if (x.size() != lambda_path.size()) {
    throw DomainError("cutpoints: series and mean path lengths differ");
  }
  Cutpoints c{Eigen::VectorXd(x.size()), Eigen::VectorXd(x.size())};
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    if (x(t) < 0) throw DomainError("cutpoints: counts must be nonnegative");
    c.lo(t) = poisson_cutpoint(lambda_path(t), static_cast<long>(x(t)) - 1);
    c.hi(t) = poisson_cutpoint(lambda_path(t), static_cast<long>(x(t)));
  }
  return c;
}

Eigen::VectorXd ghk_log_weights(const CountVector& x, const Eigen::VectorXd& lambda_path,
                                const LatentAR& latent, const ParticleSystem& particles,
                                int threads) {
  const long n = x.size();
  const long m = particles.particles();
  if (particles.length() < n) {
    throw DomainError("particle reservoir is shorter than the series");
  }
  const Cutpoints cut = copula_cutpoints(x, lambda_path);
  const detail::FlatPredictor predictor(latent);
  const int r = predictor.order();
  Eigen::VectorXd logw(m);

  if (r == 0) {
    // Independent latent: every particle carries the same exact weight.
    double total = 0.0;
    for (long t = 0; t < n; ++t) {
      total += std::log(normal_interval_mass(cut.lo(t), cut.hi(t)));
    }
    logw.setConstant(total);
    return logw;
  }

  parallel_for(m, threads, [&](long begin, long end) {
    std::vector<double> hist(r, 0.0);
    for (long k = begin; k < end; ++k) {
      int count = 0;
      double acc = 0.0;
      for (long t = 0; t < n; ++t) {
        const double mean = predictor.mean(hist.data(), count);
        const double sd = predictor.sd(count);
        const double alpha = (cut.lo(t) - mean) / sd;
        const double beta = (cut.hi(t) - mean) / sd;
        if (t + 1 == n) {
          const double mass = normal_interval_mass(alpha, beta);
          acc = mass > 0.0 ? acc + std::log(mass) : -kInf;
          break;
        }
        const TruncatedDraw draw = truncated_standard_draw(alpha, beta, particles.crn(t, k));
        if (!(draw.mass > 0.0)) {
          acc = -kInf;
          break;
        }
        acc += std::log(draw.mass);
        predictor.push(hist.data(), count, mean + sd * draw.z);
      }
      logw(k) = acc;
    }
  });
  return logw;
}

double ghk_loglik(const CountVector& x, const Eigen::VectorXd& lambda_path,
                  const LatentAR& latent, const ParticleSystem& particles,
                  int threads) {
  const Eigen::VectorXd logw = ghk_log_weights(x, lambda_path, latent, particles, threads);
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) return -kInf;
  const double mean = (logw.array() - top).exp().mean();
  return top + std::log(mean);
}

double ghk_loglik(const CountSeries& series, const MeanModel& mean,
                  const LatentAR& latent, const ParticleSystem& particles,
                  int threads) {
  return ghk_loglik(series.x, mean.lambda(), latent, particles, threads);
}

}  // namespace pcts
