#pragma once

// Parameter estimation: sample-mean estimator, linear-prediction least
// squares for superpositioned series, and the GHK particle likelihood with
// common random numbers for Gaussian copula series.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pcts/generate.hpp"
#include "pcts/latent_ar.hpp"
#include "pcts/optimize.hpp"

namespace pcts {

// ---------------------------------------------------------------------------
// Stationary sample mean

struct SampleMeanEstimate {
  double lambda_hat = 0.0;
  double variance = 0.0;
};

/// lambda_hat = mean(x) and Var = (lambda_hat / n) [1 + 2 sum_{j<n} (1 - j/n)
/// rho(j)] with rho the model autocorrelation function.
SampleMeanEstimate sample_mean_estimate(const CountSeries& series,
                                        const std::function<double(long)>& rho);

// ---------------------------------------------------------------------------
// Superposition linear prediction

/// Gamma_X(t, s) = E[min(N_t, N_s)] gamma_B(|t - s|) off the diagonal with
/// N_t ~ Poisson(lambda_t / p) independent, and Gamma_X(t, t) = lambda_t.
/// gamma_b holds lags 0..n-1 (entry 0 is unused).
Eigen::MatrixXd super_covariance_matrix(const Eigen::VectorXd& lambda_path, double p,
                                        const Eigen::VectorXd& gamma_b);
Eigen::MatrixXd super_covariance_matrix(const MeanModel& mean, double p,
                                        const Eigen::VectorXd& gamma_b);

/// One-step linear predictions X_hat_t = lambda_t + sum_{j<t} w_{j,t}
/// (X_j - lambda_j) for every t.
Eigen::VectorXd linear_predictions(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lambda_path,
                                   const Eigen::MatrixXd& cov);

// ---------------------------------------------------------------------------
// Results

struct FitResult {
  std::vector<std::string> theta_names;  // "mu", covariate names
  Eigen::VectorXd theta_hat;             // (mu, beta)
  Eigen::VectorXd eta_hat;               // (phi_1 .. phi_r)
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double sse = std::numeric_limits<double>::quiet_NaN();
  /// Standard errors for (theta, eta); NaN entries when unavailable.
  Eigen::VectorXd se;
  double aic = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int evaluations = 0;
  long n = 0;
  std::string diagnostic;

  int free_parameters() const {
    return static_cast<int>(theta_hat.size() + eta_hat.size());
  }
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// aic = -2 loglik + 2k, bic = -2 loglik + k log n.
InformationCriteria information_criteria(double loglik, int k, long n);

/// Fits mu and beta by minimising sum_t (X_t - X_hat_t)^2 with the
/// dependence (p, gamma_B) held fixed. `mean_template` supplies the design;
/// its coefficients are ignored.
FitResult fit_linear_prediction(const CountSeries& series,
                                const MeanModel& mean_template, double p,
                                const Eigen::VectorXd& gamma_b,
                                const OptimizerConfig& optimizer);

// ---------------------------------------------------------------------------
// Poisson GLM (independence) fit, used for starting values

struct GlmFit {
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  double loglik = 0.0;
  bool converged = false;
};

GlmFit poisson_glm(const CountVector& x, const MeanModel& mean_template);

// ---------------------------------------------------------------------------
// GHK particle likelihood

/// Frozen uniform reservoir for m particle paths over n time points.
struct ParticleSystem {
  Eigen::MatrixXd crn;  // n x m, entries in (0, 1)

  long particles() const { return static_cast<long>(crn.cols()); }
  long length() const { return static_cast<long>(crn.rows()); }

  static ParticleSystem make(long n, long m, std::uint64_t seed);
};

/// Cutpoints a_t = Phi^{-1}(F(x_t - 1)), b_t = Phi^{-1}(F(x_t)).
struct Cutpoints {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};
Cutpoints copula_cutpoints(const CountVector& x, const Eigen::VectorXd& lambda_path);

/// log of m^{-1} sum_k w_n^{(k)}; -inf when every particle weight vanishes.
/// Particle paths are evaluated on `threads` workers; the result does not
/// depend on the thread count.
double ghk_loglik(const CountVector& x, const Eigen::VectorXd& lambda_path,
                  const LatentAR& latent, const ParticleSystem& particles,
                  int threads = 1);
double ghk_loglik(const CountSeries& series, const MeanModel& mean,
                  const LatentAR& latent, const ParticleSystem& particles,
                  int threads = 1);

/// Per-particle log weights log w_n^{(k)}.
Eigen::VectorXd ghk_log_weights(const CountVector& x, const Eigen::VectorXd& lambda_path,
                                const LatentAR& latent, const ParticleSystem& particles,
                                int threads = 1);

struct GhkConfig {
  long particles = 1000;        // used inside the optimiser
  long final_particles = 100000;  // final likelihood and Hessian
  std::uint64_t seed = 1;
  int threads = 1;
  bool standard_errors = true;
};

/// Maximises the GHK likelihood jointly over (mu, beta, phi) with frozen
/// CRNs. phi is searched through tanh-transformed partial autocorrelations,
/// so every candidate is causal. Standard errors come from a central
/// difference Hessian of the final-particle objective in (mu, beta, phi).
FitResult fit_ghk(const CountSeries& series, const MeanModel& mean_template,
                  int latent_order, const OptimizerConfig& optimizer,
                  const GhkConfig& config);

/// Like fit_ghk but with phi held fixed; only (mu, beta) are estimated.
FitResult fit_ghk_fixed_latent(const CountSeries& series,
                               const MeanModel& mean_template,
                               const LatentAR& latent,
                               const OptimizerConfig& optimizer,
                               const GhkConfig& config);

}  // namespace pcts
