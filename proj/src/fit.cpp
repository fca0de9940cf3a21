#include "pcts/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcts/copula_link.hpp"
#include "pcts/errors.hpp"
#include "pcts/special.hpp"

namespace pcts {
namespace {

constexpr double kRejected = std::numeric_limits<double>::infinity();

void check_design(const CountSeries& series, const MeanModel& mean) {
  if (series.size() < 1) throw DomainError("cannot fit an empty series");
  if (mean.covariates.rows() != series.size()) {
    std::ostringstream os;
    os << "mean model has " << mean.covariates.rows() << " rows but the series has "
       << series.size() << " observations";
    throw DomainError(os.str());
  }
  if ((series.x.array() < 0).any()) throw DomainError("counts must be nonnegative");
}

Eigen::MatrixXd design_matrix(const MeanModel& mean) {
  Eigen::MatrixXd d(mean.size(), mean.covariates.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(mean.covariates.cols()) = mean.covariates;
  return d;
}

std::vector<std::string> theta_names(const MeanModel& mean) {
  std::vector<std::string> names{"mu"};
  for (Eigen::Index j = 0; j < mean.covariates.cols(); ++j) {
    if (j < static_cast<Eigen::Index>(mean.covariate_names.size())) {
      names.push_back(mean.covariate_names[j]);
    } else {
      names.push_back("beta" + std::to_string(j + 1));
    }
  }
  return names;
}

// Finite-difference step per parameter: max(1e-4 s_i, 1e-3 |x_i|) where s_i
// shrinks the floor for covariates measured on a large scale.
Eigen::VectorXd hessian_steps(const Eigen::VectorXd& x, const MeanModel& mean) {
  Eigen::VectorXd h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double scale = 1.0;
    if (i >= 1 && i <= mean.covariates.cols()) {
      const double rms = std::sqrt(mean.covariates.col(i - 1).squaredNorm() /
                                   std::max<double>(1.0, mean.covariates.rows()));
      scale = 1.0 / std::max(1.0, rms);
    }
    h(i) = std::max(1e-4 * scale, 1e-3 * std::abs(x(i)));
  }
  return h;
}

// Standard errors from the inverse Hessian of a negative log-likelihood.
Eigen::VectorXd standard_errors(const Eigen::MatrixXd& hess, std::string& diagnostic) {
  Eigen::VectorXd se =
      Eigen::VectorXd::Constant(hess.rows(), std::numeric_limits<double>::quiet_NaN());
  if (!hess.allFinite()) {
    diagnostic = "Hessian has non-finite entries; standard errors unavailable";
    return se;
  }
  const Eigen::MatrixXd sym = 0.5 * (hess + hess.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    diagnostic = "Hessian is not positive definite; standard errors unavailable";
    return se;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(sym.rows(), sym.cols()));
  return cov.diagonal().cwiseSqrt();
}

struct GhkObjective {
  const CountSeries& series;
  const MeanModel& mean;
  const ParticleSystem& particles;
  int threads;

  double operator()(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const {
    const Eigen::VectorXd lambda = mean.with_params(theta).lambda();
    if (!lambda.allFinite() || !(lambda.array() > 0.0).all()) return kRejected;
    try {
      const LatentAR latent(phi);
      const double ll = ghk_loglik(series.x, lambda, latent, particles, threads);
      return std::isfinite(ll) ? -ll : kRejected;
    } catch (const ModelError&) {
      return kRejected;
    }
  }
};

FitResult finish_ghk(const CountSeries& series, const MeanModel& mean,
                     const Eigen::VectorXd& theta, const Eigen::VectorXd& phi,
                     bool free_phi, const OptimizeResult& opt, const GhkConfig& config,
                     const ParticleSystem& fit_particles) {
  FitResult out;
  out.theta_names = theta_names(mean);
  out.theta_hat = theta;
  out.eta_hat = free_phi ? phi : Eigen::VectorXd();
  out.converged = opt.converged;
  out.evaluations = opt.evaluations;
  out.n = series.size();

  const ParticleSystem final_particles =
      config.final_particles == fit_particles.particles()
          ? fit_particles
          : ParticleSystem::make(series.size(), config.final_particles,
                                 derive_seed(config.seed, 0xF17A1ULL));
  const GhkObjective objective{series, mean, final_particles, config.threads};
  out.loglik = -objective(theta, phi);
  const InformationCriteria ic =
      information_criteria(out.loglik, out.free_parameters(), out.n);
  out.aic = ic.aic;
  out.bic = ic.bic;

  const Eigen::Index q = theta.size();
  Eigen::VectorXd natural(q + (free_phi ? phi.size() : 0));
  natural.head(q) = theta;
  if (free_phi) natural.tail(phi.size()) = phi;
  out.se = Eigen::VectorXd::Constant(natural.size(), std::numeric_limits<double>::quiet_NaN());
  if (config.standard_errors) {
    const Objective f = [&](const Eigen::VectorXd& v) {
      return objective(v.head(q), free_phi ? Eigen::VectorXd(v.tail(phi.size())) : phi);
    };
    const Eigen::MatrixXd hess = numerical_hessian(f, natural, hessian_steps(natural, mean));
    out.se = standard_errors(hess, out.diagnostic);
  }
  if (!out.converged) {
    out.diagnostic += out.diagnostic.empty() ? "" : "; ";
    out.diagnostic += "optimizer did not converge";
  }
  return out;
}

}  // namespace

SampleMeanEstimate sample_mean_estimate(const CountSeries& series,
                                        const std::function<double(long)>& rho) {
  const long n = series.size();
  if (n < 1) throw DomainError("sample_mean_estimate: empty series");
  SampleMeanEstimate out;
  out.lambda_hat = series.as_double().mean();
  double s = 0.0;
  for (long j = 1; j < n; ++j) {
    s += (1.0 - static_cast<double>(j) / n) * rho(j);
  }
  out.variance = out.lambda_hat / n * (1.0 + 2.0 * s);
  return out;
}

Eigen::MatrixXd super_covariance_matrix(const Eigen::VectorXd& lambda_path, double p,
                                        const Eigen::VectorXd& gamma_b) {
  const long n = lambda_path.size();
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("super_covariance_matrix: p must lie in (0, 1]");
  if (gamma_b.size() < n) {
    throw DomainError("super_covariance_matrix: gamma_B must cover lags 0..n-1");
  }
  // Row t of `tails` is P(N_t > k), k = 0..K-1, so E[min(N_t, N_s)] is the
  // inner product of rows t and s.
  std::vector<Eigen::VectorXd> rows(n);
  Eigen::Index width = 0;
  for (long t = 0; t < n; ++t) {
    rows[t] = poisson_survival_sequence(lambda_path(t) / p, 1e-16);
    width = std::max(width, rows[t].size());
  }
  Eigen::MatrixXd tails = Eigen::MatrixXd::Zero(n, width);
  for (long t = 0; t < n; ++t) tails.row(t).head(rows[t].size()) = rows[t].transpose();
  Eigen::MatrixXd cov = tails * tails.transpose();
  for (long t = 0; t < n; ++t) {
    for (long s = 0; s < n; ++s) {
      cov(t, s) = t == s ? lambda_path(t) : cov(t, s) * gamma_b(std::abs(t - s));
    }
  }
  return cov;
}

Eigen::MatrixXd super_covariance_matrix(const MeanModel& mean, double p,
                                        const Eigen::VectorXd& gamma_b) {
  return super_covariance_matrix(mean.lambda(), p, gamma_b);
}

Eigen::VectorXd linear_predictions(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lambda_path,
                                   const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd centered = x - lambda_path;
  return x - prediction_errors(cov, centered);
}

InformationCriteria information_criteria(double loglik, int k, long n) {
  if (n < 1) throw DomainError("information_criteria: n must be >= 1");
  return {-2.0 * loglik + 2.0 * k,
          -2.0 * loglik + k * std::log(static_cast<double>(n))};
}

GlmFit poisson_glm(const CountVector& x, const MeanModel& mean_template) {
  if (mean_template.covariates.rows() != x.size()) {
    throw DomainError("poisson_glm: design and series lengths differ");
  }
  const Eigen::MatrixXd d = design_matrix(mean_template);
  const Eigen::VectorXd y = x.cast<double>();
  auto loglik = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = d * theta;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      ll += y(t) * eta(t) - std::exp(eta(t)) - std::lgamma(y(t) + 1.0);
    }
    return ll;
  };
  GlmFit out;
  out.theta = Eigen::VectorXd::Zero(d.cols());
  out.theta(0) = std::log(y.mean() + 0.1);
  double ll = loglik(out.theta);
  Eigen::MatrixXd info;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd mu = (d * out.theta).array().exp().matrix();
    info = d.transpose() * mu.asDiagonal() * d;
    const Eigen::VectorXd step = info.ldlt().solve(d.transpose() * (y - mu));
    double a = 1.0;
    Eigen::VectorXd next = out.theta + step;
    double ll_next = loglik(next);
    while (!(ll_next >= ll - 1e-12) && a > 1e-8) {
      a *= 0.5;
      next = out.theta + a * step;
      ll_next = loglik(next);
    }
    out.theta = next;
    ll = ll_next;
    if ((a * step).cwiseAbs().maxCoeff() < 1e-10) {
      out.converged = true;
      break;
    }
  }
  const Eigen::VectorXd mu = (d * out.theta).array().exp().matrix();
  info = d.transpose() * mu.asDiagonal() * d;
  out.se = info.inverse().diagonal().cwiseSqrt();
  out.loglik = ll;
  return out;
}

FitResult fit_linear_prediction(const CountSeries& series,
                                const MeanModel& mean_template, double p,
                                const Eigen::VectorXd& gamma_b,
                                const OptimizerConfig& optimizer) {
  check_design(series, mean_template);
  const Eigen::VectorXd x = series.as_double();
  const GlmFit start = poisson_glm(series.x, mean_template);

  const Objective sse = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd lambda = mean_template.with_params(theta).lambda();
    if (!lambda.allFinite() || !(lambda.array() > 0.0).all()) return kRejected;
    const Eigen::MatrixXd cov = super_covariance_matrix(lambda, p, gamma_b);
    try {
      return prediction_errors(cov, x - lambda).squaredNorm();
    } catch (const FactorizationError& e) {
      std::ostringstream os;
      os << "linear prediction system is singular at time index " << e.pivot() + 1
         << ": " << e.what();
      throw FactorizationError(os.str(), e.pivot());
    }
  };

  const Eigen::VectorXd step = (2.0 * start.se).cwiseMax(1e-6);
  const OptimizeResult opt = minimize(sse, start.theta, step, optimizer);

  FitResult out;
  out.theta_names = theta_names(mean_template);
  out.theta_hat = opt.x;
  out.sse = opt.value;
  out.converged = opt.converged;
  out.evaluations = opt.evaluations;
  out.n = series.size();
  out.se = Eigen::VectorXd::Constant(opt.x.size(), std::numeric_limits<double>::quiet_NaN());
  out.diagnostic = "standard errors are not produced by linear prediction";
  if (!out.converged) out.diagnostic += "; optimizer did not converge";
  return out;
}

FitResult fit_ghk(const CountSeries& series, const MeanModel& mean_template,
                  int latent_order, const OptimizerConfig& optimizer,
                  const GhkConfig& config) {
  check_design(series, mean_template);
  if (latent_order < 0) throw DomainError("latent order must be >= 0");
  if (config.particles < 1 || config.final_particles < 1) {
    throw DomainError("particle counts must be positive");
  }
  const GlmFit start = poisson_glm(series.x, mean_template);
  const ParticleSystem particles =
      ParticleSystem::make(series.size(), config.particles, config.seed);
  const GhkObjective objective{series, mean_template, particles, config.threads};
  const Eigen::Index q = start.theta.size();

  // Coordinates: (theta, atanh(partial autocorrelations)).
  auto to_phi = [&](const Eigen::VectorXd& v) {
    return phi_from_pacf(v.tail(latent_order).array().tanh().matrix());
  };
  const Objective f = [&](const Eigen::VectorXd& v) {
    return objective(v.head(q), to_phi(v));
  };
  Eigen::VectorXd x0(q + latent_order);
  x0.head(q) = start.theta;
  x0.tail(latent_order).setZero();
  Eigen::VectorXd step(x0.size());
  step.head(q) = (2.0 * start.se).cwiseMax(1e-6);
  step.tail(latent_order).setConstant(0.3);

  const OptimizeResult opt = minimize(f, x0, step, optimizer);
  return finish_ghk(series, mean_template, opt.x.head(q), to_phi(opt.x), true, opt,
                    config, particles);
}

FitResult fit_ghk_fixed_latent(const CountSeries& series,
                               const MeanModel& mean_template,
                               const LatentAR& latent,
                               const OptimizerConfig& optimizer,
                               const GhkConfig& config) {
  check_design(series, mean_template);
  const GlmFit start = poisson_glm(series.x, mean_template);
  const ParticleSystem particles =
      ParticleSystem::make(series.size(), config.particles, config.seed);
  const GhkObjective objective{series, mean_template, particles, config.threads};
  const Objective f = [&](const Eigen::VectorXd& theta) {
    return objective(theta, latent.phi());
  };
  const OptimizeResult opt =
      minimize(f, start.theta, (2.0 * start.se).cwiseMax(1e-6), optimizer);
  return finish_ghk(series, mean_template, opt.x, latent.phi(), false, opt, config,
                    particles);
}

}  // namespace pcts
