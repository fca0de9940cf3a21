#pragma once

// Exact samplers for count series with Poisson(lambda) or Poisson(lambda_t)
// marginals: discrete autoregression, integer autoregressions (INAR(1),
// CINAR(r)), superposition of renewal or clipped-Gaussian Bernoulli chains,
// and the Gaussian copula transform.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pcts/latent_ar.hpp"

namespace pcts {

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Log-link regression for the Poisson mean:
/// lambda_t = exp(mu + covariates.row(t) * beta).
struct MeanModel {
  double mu = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariates;  // n x q, rows aligned with time
  std::vector<std::string> covariate_names;

  long size() const { return static_cast<long>(covariates.rows()); }
  Eigen::VectorXd lambda() const;
  /// Same design, different coefficients (mu, beta...).
  MeanModel with_params(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd params() const;
};

/// Intercept-only mean model with lambda_t = lambda for n steps.
MeanModel constant_mean(double lambda, long n);

/// Trend column t = 1..n.
Eigen::VectorXd trend_column(long n);

/// Lifetime law on {1, ..., L_max}; pmf(i) = P(L = i + 1).
struct RenewalLifetime {
  Eigen::VectorXd pmf;
  double mean() const;
};

/// Validates a lifetime pmf: nonnegative, sums to one within 1e-12,
/// aperiodic support. Throws ModelError otherwise.
RenewalLifetime make_lifetime(const Eigen::VectorXd& pmf);

/// Renewal probabilities u_0..u_H of the non-delayed process:
/// u_0 = 1, u_h = sum_j P(L = j) u_{h-j}.
Eigen::VectorXd renewal_probabilities(const RenewalLifetime& lifetime, int max_lag);

/// gamma_B(h) = (u_h - 1/mu_L) / mu_L for the stationary renewal chain.
Eigen::VectorXd renewal_acvf(const RenewalLifetime& lifetime, int max_lag);

/// gamma_B(h) = arcsin(rho_Z(h)) / (2 pi) for chains clipped at zero.
Eigen::VectorXd clipped_acvf(const LatentAR& latent, int max_lag);

struct CountSeries {
  CountVector x;
  Eigen::MatrixXd covariates;  // may be empty
  std::vector<std::string> covariate_names;
  std::string generator;
  std::uint64_t seed = 0;

  long size() const { return static_cast<long>(x.size()); }
  Eigen::VectorXd as_double() const { return x.cast<double>(); }
};

CountSeries gen_dar1(double lambda, double p, long n, std::uint64_t seed);

CountSeries gen_inar1(double lambda, double alpha, long n, std::uint64_t seed);

/// CINAR(r): each step thins one lag chosen by a Mult(1; phi) draw.
/// The first r values are IID Poisson(lambda); `burn_in` extra steps are
/// simulated and discarded before recording.
CountSeries gen_cinar(double lambda, double alpha, const Eigen::VectorXd& phi,
                      long n, std::uint64_t seed, long burn_in = 0);

/// Superposition of stationary delayed renewal chains, p = 1 / mu_L,
/// N_t ~ Poisson(lambda_t / p).
CountSeries gen_super_renewal(const Eigen::VectorXd& lambda_path,
                              const RenewalLifetime& lifetime,
                              std::uint64_t seed);

/// Superposition of chains B = 1{Z > 0} clipped from IID copies of the
/// latent AR, p = 1/2.
CountSeries gen_super_clipped(const Eigen::VectorXd& lambda_path,
                              const LatentAR& latent, std::uint64_t seed);

/// X_t = F_{lambda_t}^{-1}(Phi(Z_t)).
CountSeries gen_copula(const Eigen::VectorXd& lambda_path, const LatentAR& latent,
                       std::uint64_t seed);
CountSeries gen_copula(const MeanModel& mean, const LatentAR& latent,
                       std::uint64_t seed);

/// Copula transform of a given latent path.
CountVector copula_transform(const Eigen::VectorXd& lambda_path,
                             const Eigen::VectorXd& z);

}  // namespace pcts
