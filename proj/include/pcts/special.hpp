#pragma once

// Scalar special functions: Poisson and standard normal distribution
// functions, modified Bessel functions of order 0 and 1, and truncated
// normal sampling by inversion.

#include <limits>

namespace pcts {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open interval (lo, hi] on the extended real line.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
};

// ---------------------------------------------------------------------------
// Incomplete gamma

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate when
/// Q is small.
double regularized_gamma_q(double a, double x);

// ---------------------------------------------------------------------------
// Poisson

/// log P(N = n) for N ~ Poisson(lambda); -inf for n < 0.
double poisson_log_pmf(double lambda, long n);
double poisson_pmf(double lambda, long n);

/// F_lambda(n) = P(N <= n). Zero for n < 0. Direct summation for
/// lambda <= 30, incomplete gamma beyond.
double poisson_cdf(double lambda, long n);

/// P(N > n), computed without cancellation in the upper tail.
double poisson_sf(double lambda, long n);

/// inf{t : F_lambda(t) >= u} for 0 <= u < 1.
long poisson_quantile(double lambda, double u);

/// Phi^{-1}(F_lambda(n)) with the conventions Phi^{-1}(0) = -inf and
/// Phi^{-1}(1) = +inf. Upper-tail cutpoints go through the survival
/// function so they stay finite and accurate far beyond Phi^{-1}(1 - 1e-16).
double poisson_cutpoint(double lambda, long n);

// ---------------------------------------------------------------------------
// Standard normal

double normal_pdf(double z);
double normal_cdf(double z);

/// Inverse of normal_cdf. Arguments are clamped to [1e-300, 1 - 1e-16];
/// exactly 0 and 1 map to -inf and +inf.
double normal_quantile(double u);

/// Phi(hi) - Phi(lo), evaluated on the side of zero that avoids
/// cancellation.
double normal_interval_mass(double lo, double hi);

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind

/// I_j(x) for j in {0, 1}. Overflows to +inf for large x; prefer the
/// scaled form.
double bessel_i(int j, double x);

/// exp(-x) I_j(x) for j in {0, 1}, finite for all x >= 0.
double bessel_i_scaled(int j, double x);

// ---------------------------------------------------------------------------
// Truncated normal

/// Mass of (alpha, beta] under N(0, 1) together with the inverse-CDF draw
/// at u from the standard normal restricted to that interval. z is NaN when
/// the mass underflows to zero.
struct TruncatedDraw {
  double mass = 0.0;
  double z = 0.0;
};
TruncatedDraw truncated_standard_draw(double alpha, double beta, double u);

/// Inverse-CDF draw from N(mean, sd^2) restricted to `interval`, driven by
/// the uniform variate u in (0, 1). Strictly increasing in u.
/// Throws DegenerateIntervalError if the interval carries no mass.
double truncated_normal_sample(double mean, double sd, Interval interval,
                               double u);

/// E[Z | lo < Z <= hi] for Z ~ N(mean, sd^2).
double truncated_normal_mean(double mean, double sd, Interval interval);

}  // namespace pcts
