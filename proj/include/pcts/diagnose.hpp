#pragma once

// Post-fit diagnostics for copula count models: latent residuals, residual
// ACF/PACF, nonrandomized PIT histogram and the Q uniformity test.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcts/fit.hpp"
#include "pcts/generate.hpp"
#include "pcts/latent_ar.hpp"

namespace pcts {

struct ResidualSeries {
  Eigen::VectorXd zhat;  // E[Z_t | X_t]
  Eigen::VectorXd rhat;  // zhat filtered by the AR polynomial; NaN for t <= r
  std::vector<bool> missing;
};

/// `mean` carries the fitted coefficients. Cells whose probability
/// underflows are flagged missing and their zhat/rhat set to NaN.
ResidualSeries latent_residuals(const CountSeries& series, const MeanModel& mean,
                                const LatentAR& latent);

struct AcfTable {
  Eigen::VectorXd acf;   // lags 0..H
  Eigen::VectorXd pacf;  // lags 0..H, pacf(0) = 1
  double band = 0.0;     // 1.96 / sqrt(n)
  long n = 0;
};

/// Sample ACF and Durbin-Levinson PACF of the finite entries of
/// `residuals`. Needs at least 20 of them and nonzero variance.
AcfTable residual_acf(const Eigen::VectorXd& residuals, int max_lag);

inline constexpr int kPitBins = 10;

struct PitSummary {
  Eigen::VectorXd fbar;  // mean PIT CDF at u = i / grid_size
  Eigen::VectorXd bins;  // kPitBins proportions
  double q = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  int b_sims = 0;
  std::string warning;
};

/// P_t(x_t - 1) and P_t(x_t) under the one-step predictive distribution.
struct PitPredictive {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Weighted-particle predictive CDF values. Exact for a white-noise latent.
PitPredictive pit_predictive(const CountVector& x, const Eigen::VectorXd& lambda_path,
                             const LatentAR& latent, const ParticleSystem& particles);

/// Mean of the piecewise-linear PIT CDFs on u = i / grid_size, i = 0..grid_size.
Eigen::VectorXd pit_mean_cdf(const PitPredictive& pred, int grid_size);

/// Ten-bin histogram proportions and Q = (1/10) sum |f_i - 1/10|.
Eigen::VectorXd pit_bins(const PitPredictive& pred);
double q_statistic(const Eigen::VectorXd& bins);

struct FittedCopula {
  MeanModel mean;
  LatentAR latent;
};

struct PitConfig {
  long particles = 1000;
  int grid_size = 100;
  int b_sims = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  /// When set, each bootstrap series is refitted before its PIT is computed.
  std::function<FittedCopula(const CountSeries&)> refit;
};

/// Q statistic with a parametric-bootstrap p-value at the fitted model.
PitSummary pit_summary(const CountSeries& series, const FittedCopula& fitted,
                       const PitConfig& config);

/// Fitted copula model from a GHK fit and the design it was fitted with.
FittedCopula fitted_copula(const FitResult& fit, const MeanModel& mean_template);

}  // namespace pcts
