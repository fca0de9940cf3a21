#include "pcts/copula_link.hpp"

#include <cmath>
#include <sstream>

#include "pcts/errors.hpp"
#include "pcts/special.hpp"

namespace pcts {

double hermite_poly(int k, double x) {
  if (k < 0) throw DomainError("hermite_poly: order must be >= 0");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int j = 2; j <= k; ++j) {
    const double next = x * cur - (j - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Eigen::VectorXd hermite_polys(int k_max, double x) {
  Eigen::VectorXd h(k_max + 1);
  h(0) = 1.0;
  if (k_max >= 1) h(1) = x;
  for (int j = 2; j <= k_max; ++j) h(j) = x * h(j - 1) - (j - 1) * h(j - 2);
  return h;
}

HermiteExpansion hermite_coefficients(double lambda, int order) {
  if (order < 1 || order > kMaxHermiteOrder) {
    std::ostringstream os;
    os << "Hermite truncation order must lie in [1, " << kMaxHermiteOrder
       << "], got " << order;
    throw DomainError(os.str());
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("hermite_coefficients: lambda must be positive");
  }

  // E[G(Z) He_k(Z)] = sum_n E[1{Z >= c_n} He_k(Z)] = sum_n phi(c_n) He_{k-1}(c_n)
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(order);
  for (long n = 0;; ++n) {
    const double c = poisson_cutpoint(lambda, n);
    if (!std::isfinite(c)) {
      if (c > 0.0) break;
      continue;
    }
    const double density = normal_pdf(c);
    if (density == 0.0) {
      if (c > 0.0) break;
      continue;
    }
    acc += density * hermite_polys(order - 1, c);
  }

  HermiteExpansion out;
  out.lambda = lambda;
  out.order = order;
  out.g.resize(order);
  out.eta.resize(order);
  double factorial = 1.0;
  for (int k = 1; k <= order; ++k) {
    factorial *= k;
    out.g(k - 1) = acc(k - 1) / factorial;
    out.eta(k - 1) = factorial * out.g(k - 1) * out.g(k - 1) / lambda;
  }
  out.tail_mass = 1.0 - out.eta.sum();
  return out;
}

double link(const HermiteExpansion& expansion, double u) {
  if (!(std::abs(u) <= 1.0)) {
    std::ostringstream os;
    os << "link: |u| must be <= 1, got " << u;
    throw DomainError(os.str());
  }
  // Horner on u * (eta_1 + eta_2 u + ...); exact zero at u = 0.
  double acc = 0.0;
  for (int k = expansion.order; k >= 1; --k) acc = acc * u + expansion.eta(k - 1);
  return acc * u;
}

Eigen::VectorXd poisson_survival_sequence(double lambda, double tol) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("poisson_survival_sequence: lambda must be positive");
  }
  long top = static_cast<long>(lambda + 15.0 * std::sqrt(lambda) + 40.0);
  while (poisson_sf(lambda, top) >= tol) top += 20;
  // Accumulate from the top so every entry keeps full relative precision.
  Eigen::VectorXd s(top + 1);
  s(top) = poisson_sf(lambda, top);
  for (long k = top; k >= 1; --k) s(k - 1) = s(k) + poisson_pmf(lambda, k);
  long len = 0;
  while (len <= top && s(len) >= tol) ++len;
  return s.head(len);
}

double neg_bound(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("neg_bound: lambda must be positive");
  }
  // sum_{k,l} (1 - c_l - c_k) 1[c_l + c_k < 1] with 1 - c_l taken from the
  // survival function; indices with c >= 1 - 1e-12 cannot contribute.
  const Eigen::VectorXd sf = poisson_survival_sequence(lambda, 1e-12);
  const long n = sf.size();
  double total = 0.0;
  for (long k = 0; k < n; ++k) {
    const double ck = 1.0 - sf(k);
    for (long l = 0; l < n && sf(l) > ck; ++l) total += sf(l) - ck;
  }
  return (total - lambda * lambda) / lambda;
}

double kappa(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("kappa: lambda must be positive");
  }
  // Closed form loses relative precision to cancellation as lambda -> 0.
  if (lambda < 0.05) return min_expect_heterogeneous(lambda, lambda);
  const double x = 2.0 * lambda;
  return lambda * (1.0 - (bessel_i_scaled(0, x) + bessel_i_scaled(1, x)));
}

double min_expect_heterogeneous(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw DomainError("min_expect_heterogeneous: means must be positive");
  }
  const Eigen::VectorXd s1 = poisson_survival_sequence(lambda1, 1e-14);
  const Eigen::VectorXd s2 = poisson_survival_sequence(lambda2, 1e-14);
  // Terms beyond the shorter sequence have one factor below 1e-14.
  const long n = std::min(s1.size(), s2.size());
  return s1.head(n).dot(s2.head(n));
}

SuperBound super_neg_bound(double lambda) {
  SuperBound best{kInf, 0.0};
  for (int i = 1; i <= 999; ++i) {
    const double p = i / 1000.0;
    const double v = -p * p * kappa(lambda / p) / lambda;
    if (v < best.value) best = {v, p};
  }
  return best;
}

CorrelationBound correlation_bound(double lambda) {
  const SuperBound sb = super_neg_bound(lambda);
  return {lambda, neg_bound(lambda), sb.value, sb.p_star};
}

}  // namespace pcts
