#pragma once

// Hermite calculus for the Gaussian copula transform G = F_lambda^{-1} o Phi
// and the correlation bounds attainable by Poisson pairs.

#include <Eigen/Dense>

namespace pcts {

/// Probabilists' Hermite polynomial He_k(x).
double hermite_poly(int k, double x);

/// All of He_0(x) .. He_{k_max}(x) in one pass of the three-term recursion.
Eigen::VectorXd hermite_polys(int k_max, double x);

/// Hermite expansion of G(z) = F_lambda^{-1}(Phi(z)) truncated at order K.
/// g(k-1) holds g_k and eta(k-1) holds eta_k = k! g_k^2 / lambda.
struct HermiteExpansion {
  double lambda = 1.0;
  Eigen::VectorXd g;
  Eigen::VectorXd eta;
  int order = 0;
  double tail_mass = 1.0;  // 1 - sum eta_k
};

inline constexpr int kDefaultHermiteOrder = 30;
inline constexpr int kMaxHermiteOrder = 50;

/// Computes g_k = (1/k!) sum_n phi(c_n) He_{k-1}(c_n) with
/// c_n = Phi^{-1}(F_lambda(n)). Throws DomainError for K outside [1, 50].
HermiteExpansion hermite_coefficients(double lambda,
                                      int order = kDefaultHermiteOrder);

/// L(u) = sum_{k<=K} eta_k u^k for |u| <= 1.
double link(const HermiteExpansion& expansion, double u);

/// Most negative correlation between two Poisson(lambda) variables,
/// attained by the antithetic pair F^{-1}(U), F^{-1}(1 - U).
double neg_bound(double lambda);

/// E[min(N, N')] for independent N, N' ~ Poisson(lambda), via scaled
/// Bessel functions.
double kappa(double lambda);

/// E[min(N1, N2)] for independent Poisson(lambda1), Poisson(lambda2):
/// sum_{n>=1} P(N1 >= n) P(N2 >= n).
double min_expect_heterogeneous(double lambda1, double lambda2);

/// Survival sequence s(k) = P(N > k), k = 0, 1, ..., stopping at the first
/// index where s(k) < tol.
Eigen::VectorXd poisson_survival_sequence(double lambda, double tol = 1e-17);

struct SuperBound {
  double value = 0.0;
  double p_star = 0.0;
};

/// Grid search over p in {0.001, ..., 0.999} for the most negative lag
/// correlation -p^2 kappa(lambda/p)/lambda of a superpositioned series.
SuperBound super_neg_bound(double lambda);

struct CorrelationBound {
  double lambda = 0.0;
  double nb = 0.0;
  double super_nb = 0.0;
  double p_star = 0.0;
};

CorrelationBound correlation_bound(double lambda);

}  // namespace pcts
