#include "pcts/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ghk_kernel.hpp"
#include "pcts/errors.hpp"
#include "pcts/parallel.hpp"
#include "pcts/random.hpp"
#include "pcts/special.hpp"

namespace pcts {

ResidualSeries latent_residuals(const CountSeries& series, const MeanModel& mean,
                                const LatentAR& latent) {
  const long n = series.size();
  if (mean.size() != n) throw DomainError("latent_residuals: mean model and series lengths differ");
  const Cutpoints cut = copula_cutpoints(series.x, mean.lambda());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ResidualSeries out{Eigen::VectorXd(n), Eigen::VectorXd::Constant(n, nan),
                     std::vector<bool>(n, false)};
  for (long t = 0; t < n; ++t) {
    try {
      out.zhat(t) = truncated_normal_mean(0.0, 1.0, {cut.lo(t), cut.hi(t)});
    } catch (const DegenerateIntervalError&) {
      out.zhat(t) = nan;
      out.missing[t] = true;
    }
  }
  const Eigen::VectorXd& phi = latent.phi();
  for (long t = latent.order(); t < n; ++t) {
    double r = out.zhat(t);
    for (int k = 0; k < latent.order(); ++k) r -= phi(k) * out.zhat(t - 1 - k);
    out.rhat(t) = r;
  }
  return out;
}

AcfTable residual_acf(const Eigen::VectorXd& residuals, int max_lag) {
  std::vector<double> v;
  v.reserve(residuals.size());
  for (double r : residuals) {
    if (std::isfinite(r)) v.push_back(r);
  }
  const long n = static_cast<long>(v.size());
  if (n < 20) throw DomainError("residual_acf: need at least 20 residuals");
  if (max_lag < 0 || max_lag >= n) throw DomainError("residual_acf: lag out of range");
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), n);
  const Eigen::VectorXd c = x.array() - x.mean();
  const double c0 = c.squaredNorm();
  if (!(c0 > 0.0)) throw DomainError("residual_acf: residuals have zero variance");

  AcfTable out;
  out.n = n;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  out.acf.resize(max_lag + 1);
  for (int h = 0; h <= max_lag; ++h) {
    out.acf(h) = c.head(n - h).dot(c.tail(n - h)) / c0;
  }
  out.pacf.resize(max_lag + 1);
  out.pacf(0) = 1.0;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(max_lag + 1);
  double v_err = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = out.acf(k);
    for (int j = 1; j < k; ++j) num -= a(j) * out.acf(k - j);
    const double kk = num / v_err;
    Eigen::VectorXd next = a;
    next(k) = kk;
    for (int j = 1; j < k; ++j) next(j) = a(j) - kk * a(k - j);
    a = next;
    v_err *= 1.0 - kk * kk;
    out.pacf(k) = kk;
  }
  return out;
}

PitPredictive pit_predictive(const CountVector& x, const Eigen::VectorXd& lambda_path,
                             const LatentAR& latent, const ParticleSystem& particles) {
  const long n = x.size();
  const Cutpoints cut = copula_cutpoints(x, lambda_path);
  PitPredictive out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const int r = latent.order();
  if (r == 0) {
    for (long t = 0; t < n; ++t) {
      out.lower(t) = poisson_cdf(lambda_path(t), static_cast<long>(x(t)) - 1);
      out.upper(t) = poisson_cdf(lambda_path(t), static_cast<long>(x(t)));
    }
    return out;
  }
  if (particles.length() < n) throw DomainError("particle reservoir is shorter than the series");

  const long m = particles.particles();
  const detail::FlatPredictor predictor(latent);
  std::vector<double> hist(static_cast<std::size_t>(m * r), 0.0);
  Eigen::VectorXd logw = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w(m);
  int count = 0;
  for (long t = 0; t < n; ++t) {
    double top = logw.maxCoeff();
    if (!std::isfinite(top)) {
      logw.setZero();
      top = 0.0;
    }
    w = (logw.array() - top).exp();
    w /= w.sum();
    const double sd = predictor.sd(count);
    double lower = 0.0;
    double upper = 0.0;
    for (long k = 0; k < m; ++k) {
      double* h = hist.data() + k * r;
      const double mean = predictor.mean(h, count);
      const double alpha = (cut.lo(t) - mean) / sd;
      const double beta = (cut.hi(t) - mean) / sd;
      lower += w(k) * normal_cdf(alpha);
      upper += w(k) * normal_cdf(beta);
      if (t + 1 == n) continue;
      const TruncatedDraw draw = truncated_standard_draw(alpha, beta, particles.crn(t, k));
      if (!(draw.mass > 0.0)) {
        logw(k) = -kInf;
        continue;
      }
      logw(k) += std::log(draw.mass);
      int c = count;
      predictor.push(h, c, mean + sd * draw.z);
    }
    count = std::min(count + 1, r);
    out.lower(t) = std::clamp(lower, 0.0, 1.0);
    out.upper(t) = std::clamp(upper, out.lower(t), 1.0);
  }
  return out;
}

Eigen::VectorXd pit_mean_cdf(const PitPredictive& pred, int grid_size) {
  if (grid_size < 1) throw DomainError("pit grid size must be >= 1");
  const long n = pred.lower.size();
  if (n < 1) throw DomainError("pit: empty series");
  Eigen::VectorXd fbar = Eigen::VectorXd::Zero(grid_size + 1);
  for (int i = 0; i <= grid_size; ++i) {
    const double u = static_cast<double>(i) / grid_size;
    double s = 0.0;
    for (long t = 0; t < n; ++t) {
      const double lo = pred.lower(t);
      const double hi = pred.upper(t);
      if (u >= hi) {
        s += 1.0;
      } else if (u > lo) {
        s += (u - lo) / (hi - lo);
      }
    }
    fbar(i) = s / n;
  }
  fbar(0) = 0.0;
  fbar(grid_size) = 1.0;
  return fbar;
}

Eigen::VectorXd pit_bins(const PitPredictive& pred) {
  const Eigen::VectorXd f = pit_mean_cdf(pred, kPitBins);
  return f.tail(kPitBins) - f.head(kPitBins);
}

double q_statistic(const Eigen::VectorXd& bins) {
  return (bins.array() - 1.0 / static_cast<double>(bins.size())).abs().mean();
}

PitSummary pit_summary(const CountSeries& series, const FittedCopula& fitted,
                       const PitConfig& config) {
  const long n = series.size();
  if (fitted.mean.size() != n) {
    throw DomainError("pit_summary: fitted model length does not match the series");
  }
  if (config.b_sims < 1) throw DomainError("pit_summary: b_sims must be >= 1");
  if (config.particles < 1) throw DomainError("pit_summary: particles must be >= 1");

  const ParticleSystem particles =
      ParticleSystem::make(n, config.particles, derive_seed(config.seed, 0));
  const PitPredictive pred =
      pit_predictive(series.x, fitted.mean.lambda(), fitted.latent, particles);

  PitSummary out;
  out.fbar = pit_mean_cdf(pred, config.grid_size);
  out.bins = pit_bins(pred);
  out.q = q_statistic(out.bins);
  out.b_sims = config.b_sims;
  if (config.b_sims < 100) {
    out.warning = "b_sims < 100: the simulated p-value is coarse";
  }

  const std::uint64_t boot_seed = derive_seed(config.seed, 1);
  std::vector<double> q_sim(config.b_sims);
  parallel_for(config.b_sims, config.threads, [&](long begin, long end) {
    for (long b = begin; b < end; ++b) {
      const CountSeries sim =
          gen_copula(fitted.mean, fitted.latent, derive_seed(boot_seed, b));
      const FittedCopula model = config.refit ? config.refit(sim) : fitted;
      const PitPredictive p =
          pit_predictive(sim.x, model.mean.lambda(), model.latent, particles);
      q_sim[b] = q_statistic(pit_bins(p));
    }
  });
  const long exceed = std::count_if(q_sim.begin(), q_sim.end(),
                                    [&](double q) { return q >= out.q; });
  out.p_value = static_cast<double>(exceed) / config.b_sims;
  return out;
}

FittedCopula fitted_copula(const FitResult& fit, const MeanModel& mean_template) {
  if (mean_template.size() != fit.n) {
    throw DomainError("fitted model length does not match the data");
  }
  return {mean_template.with_params(fit.theta_hat), LatentAR(fit.eta_hat)};
}

}  // namespace pcts
