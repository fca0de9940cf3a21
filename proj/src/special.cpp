#include "pcts/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pcts/errors.hpp"

namespace pcts {
namespace {

constexpr double kDirectSumLimit = 30.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    std::ostringstream os;
    os << "Poisson mean must be positive and finite, got " << lambda;
    throw DomainError(os.str());
  }
}

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps * 0.5) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Sum of Poisson terms k = 0..n, small lambda only.
double direct_cdf(double lambda, long n) {
  double term = std::exp(-lambda);
  double sum = term;
  for (long k = 1; k <= n; ++k) {
    term *= lambda / static_cast<double>(k);
    sum += term;
    if (k > lambda && term < sum * 1e-18) break;
  }
  return std::min(sum, 1.0);
}

// Sum of Poisson terms k > n, small lambda only.
double direct_sf(double lambda, long n) {
  double term = std::exp(poisson_log_pmf(lambda, n + 1));
  double sum = term;
  for (long k = n + 2;; ++k) {
    term *= lambda / static_cast<double>(k);
    sum += term;
    if (term <= sum * 1e-18 || term == 0.0) break;
  }
  return std::min(sum, 1.0);
}

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("regularized_gamma_p: bad args");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("regularized_gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double poisson_log_pmf(double lambda, long n) {
  check_lambda(lambda);
  if (n < 0) return -kInf;
  const double k = static_cast<double>(n);
  return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

double poisson_pmf(double lambda, long n) {
  return std::exp(poisson_log_pmf(lambda, n));
}

double poisson_cdf(double lambda, long n) {
  check_lambda(lambda);
  if (n < 0) return 0.0;
  if (lambda <= kDirectSumLimit) return direct_cdf(lambda, n);
  // F(n) = Q(n + 1, lambda); pick the side of the split that is small.
  const double a = static_cast<double>(n) + 1.0;
  if (lambda < a + 1.0) return 1.0 - gamma_p_series(a, lambda);
  return gamma_q_fraction(a, lambda);
}

double poisson_sf(double lambda, long n) {
  check_lambda(lambda);
  if (n < 0) return 1.0;
  if (lambda <= kDirectSumLimit) {
    if (static_cast<double>(n) < lambda) return 1.0 - direct_cdf(lambda, n);
    return direct_sf(lambda, n);
  }
  const double a = static_cast<double>(n) + 1.0;
  if (lambda < a + 1.0) return gamma_p_series(a, lambda);
  return 1.0 - gamma_q_fraction(a, lambda);
}

long poisson_quantile(double lambda, double u) {
  check_lambda(lambda);
  if (!(u >= 0.0) || !(u < 1.0)) {
    std::ostringstream os;
    os << "poisson_quantile: u must lie in [0, 1), got " << u;
    throw DomainError(os.str());
  }
  if (poisson_cdf(lambda, 0) >= u) return 0;
  // Invariant: F(lo) < u <= F(hi).
  long lo = 0;
  long hi = std::max<long>(static_cast<long>(std::floor(lambda)), 1);
  while (poisson_cdf(lambda, hi) < u) {
    lo = hi;
    hi = 2 * hi + 1;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (poisson_cdf(lambda, mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double poisson_cutpoint(double lambda, long n) {
  if (n < 0) return -kInf;
  const double cdf = poisson_cdf(lambda, n);
  if (cdf <= 0.5) return normal_quantile(cdf);
  const double sf = poisson_sf(lambda, n);
  if (sf <= 0.0) return kInf;
  return -normal_quantile(sf);
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
  if (std::isnan(z)) return z;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream os;
    os << "normal_quantile: argument outside [0, 1]: " << u;
    throw DomainError(os.str());
  }
  if (u == 0.0) return -kInf;
  if (u == 1.0) return kInf;
  return ppnd16(std::clamp(u, 1e-300, 1.0 - 1e-16));
}

double normal_interval_mass(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  // Upper half: use the reflected lower tail to avoid 1 - 1 cancellation.
  if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

double bessel_i_scaled(int j, double x) {
  if (j != 0 && j != 1) throw DomainError("bessel_i: order must be 0 or 1");
  if (x < 0.0 || std::isnan(x)) throw DomainError("bessel_i: x must be >= 0");
  if (x == 0.0) return j == 0 ? 1.0 : 0.0;
  if (x < 30.0) return std::exp(-x) * bessel_i(j, x);
  // Hankel asymptotic expansion, truncated at its smallest term.
  const double mu = 4.0 * j * j;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_i(int j, double x) {
  if (j != 0 && j != 1) throw DomainError("bessel_i: order must be 0 or 1");
  if (x < 0.0 || std::isnan(x)) throw DomainError("bessel_i: x must be >= 0");
  if (x >= 30.0) return std::exp(x) * bessel_i_scaled(j, x);
  const double half = 0.5 * x;
  const double q = half * half;
  double term = j == 0 ? 1.0 : half;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= q / (static_cast<double>(n) * static_cast<double>(n + j));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

TruncatedDraw truncated_standard_draw(double alpha, double beta, double u) {
  TruncatedDraw out;
  if (!(beta > alpha)) {
    out.z = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double z;
  if (alpha > 0.0) {
    // Mirror to (-beta, -alpha) and use 1 - u so the map stays increasing.
    const double base = normal_cdf(-beta);
    out.mass = normal_cdf(-alpha) - base;
    if (!(out.mass > 0.0)) {
      out.z = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    z = -normal_quantile(std::min(base + (1.0 - u) * out.mass, 1.0));
  } else {
    const double base = normal_cdf(alpha);
    out.mass = normal_cdf(beta) - base;
    if (!(out.mass > 0.0)) {
      out.z = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    z = normal_quantile(std::min(base + u * out.mass, 1.0));
  }
  out.z = std::clamp(z, std::nextafter(alpha, kInf), std::nextafter(beta, -kInf));
  return out;
}

double truncated_normal_sample(double mean, double sd, Interval interval,
                               double u) {
  if (!(sd > 0.0)) throw DomainError("truncated_normal_sample: sd must be > 0");
  const double alpha = (interval.lo - mean) / sd;
  const double beta = (interval.hi - mean) / sd;
  const TruncatedDraw draw = truncated_standard_draw(alpha, beta, u);
  if (!(draw.mass > 0.0)) {
    std::ostringstream os;
    os << "truncated normal interval (" << interval.lo << ", " << interval.hi
       << "] has zero mass under N(" << mean << ", " << sd * sd << ")";
    throw DegenerateIntervalError(os.str(), interval.lo, interval.hi);
  }
  return mean + sd * draw.z;
}

double truncated_normal_mean(double mean, double sd, Interval interval) {
  if (!(sd > 0.0)) throw DomainError("truncated_normal_mean: sd must be > 0");
  const double alpha = (interval.lo - mean) / sd;
  const double beta = (interval.hi - mean) / sd;
  const double mass = normal_interval_mass(alpha, beta);
  if (!(mass > 0.0)) {
    throw DegenerateIntervalError("truncated_normal_mean: zero-mass interval",
                                  interval.lo, interval.hi);
  }
  const double pa = std::isfinite(alpha) ? normal_pdf(alpha) : 0.0;
  const double pb = std::isfinite(beta) ? normal_pdf(beta) : 0.0;
  return mean + sd * (pa - pb) / mass;
}

}  // namespace pcts
