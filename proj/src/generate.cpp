#include "pcts/generate.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pcts/errors.hpp"
#include "pcts/random.hpp"
#include "pcts/special.hpp"

namespace pcts {
namespace {

void check_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << name << " must lie in (0, 1), got " << p;
    throw DomainError(os.str());
  }
}

void check_length(long n) {
  if (n < 1) throw DomainError("series length must be >= 1");
}

void check_path(const Eigen::VectorXd& lambda_path) {
  check_length(lambda_path.size());
  if (!(lambda_path.array() > 0.0).all() || !lambda_path.allFinite()) {
    throw DomainError("Poisson mean path must be positive and finite");
  }
}

// Sums the first N_t of a lazily grown set of Bernoulli chains. `make_chain`
// builds chain i (0-based) as a 0/1 vector of the full length n; chain i is a
// pure function of (seed, i) so lazy growth does not perturb any stream.
template <typename ChainMaker>
CountVector superpose(const Eigen::VectorXd& lambda_path, double p,
                      std::uint64_t seed, ChainMaker make_chain) {
  const long n = lambda_path.size();
  Rng counts(derive_seed(seed, 0));
  std::vector<std::vector<std::uint8_t>> chains;
  CountVector x(n);
  for (long t = 0; t < n; ++t) {
    const long nt = counts.poisson(lambda_path(t) / p);
    while (static_cast<long>(chains.size()) < nt) {
      Rng chain_rng(derive_seed(seed, chains.size() + 1));
      chains.push_back(make_chain(n, chain_rng));
    }
    std::int64_t s = 0;
    for (long i = 0; i < nt; ++i) s += chains[i][t];
    x(t) = s;
  }
  return x;
}

}  // namespace

Eigen::VectorXd MeanModel::lambda() const {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(size(), mu);
  if (beta.size() > 0) eta += covariates * beta;
  return eta.array().exp().matrix();
}

MeanModel MeanModel::with_params(const Eigen::VectorXd& theta) const {
  if (theta.size() != beta.size() + 1) {
    throw DomainError("mean model parameter vector has the wrong length");
  }
  MeanModel m = *this;
  m.mu = theta(0);
  m.beta = theta.tail(beta.size());
  return m;
}

Eigen::VectorXd MeanModel::params() const {
  Eigen::VectorXd theta(beta.size() + 1);
  theta(0) = mu;
  theta.tail(beta.size()) = beta;
  return theta;
}

MeanModel constant_mean(double lambda, long n) {
  if (!(lambda > 0.0)) throw DomainError("constant_mean: lambda must be > 0");
  MeanModel m;
  m.mu = std::log(lambda);
  m.covariates.resize(n, 0);
  return m;
}

Eigen::VectorXd trend_column(long n) {
  return Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
}

double RenewalLifetime::mean() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < pmf.size(); ++i) m += (i + 1) * pmf(i);
  return m;
}

RenewalLifetime make_lifetime(const Eigen::VectorXd& pmf) {
  if (pmf.size() == 0) throw ModelError("lifetime pmf is empty");
  if ((pmf.array() < 0.0).any() || !pmf.allFinite()) {
    throw ModelError("lifetime pmf has negative or non-finite entries");
  }
  if (std::abs(pmf.sum() - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "lifetime pmf sums to " << pmf.sum() << ", expected 1";
    throw ModelError(os.str());
  }
  long g = 0;
  for (Eigen::Index i = 0; i < pmf.size(); ++i) {
    if (pmf(i) > 0.0) g = std::gcd(g, static_cast<long>(i + 1));
  }
  if (g != 1) {
    std::ostringstream os;
    os << "lifetime support is periodic with period " << g;
    throw ModelError(os.str());
  }
  return RenewalLifetime{pmf};
}

Eigen::VectorXd renewal_probabilities(const RenewalLifetime& lifetime,
                                      int max_lag) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(max_lag + 1);
  u(0) = 1.0;
  const int lmax = static_cast<int>(lifetime.pmf.size());
  for (int h = 1; h <= max_lag; ++h) {
    double s = 0.0;
    for (int j = 1; j <= std::min(h, lmax); ++j) s += lifetime.pmf(j - 1) * u(h - j);
    u(h) = s;
  }
  return u;
}

Eigen::VectorXd renewal_acvf(const RenewalLifetime& lifetime, int max_lag) {
  const double p = 1.0 / lifetime.mean();
  return (p * (renewal_probabilities(lifetime, max_lag).array() - p)).matrix();
}

Eigen::VectorXd clipped_acvf(const LatentAR& latent, int max_lag) {
  return (latent.acf_vector(max_lag).array().asin() / (2.0 * std::numbers::pi))
      .matrix();
}

CountSeries gen_dar1(double lambda, double p, long n, std::uint64_t seed) {
  check_probability(p, "DAR(1) mixing probability");
  check_length(n);
  Rng rng(seed);
  CountSeries out{CountVector(n), {}, {}, "dar1", seed};
  out.x(0) = rng.poisson(lambda);
  for (long t = 1; t < n; ++t) {
    const bool keep = rng.bernoulli(p);
    const long fresh = rng.poisson(lambda);
    out.x(t) = keep ? out.x(t - 1) : fresh;
  }
  return out;
}

CountSeries gen_inar1(double lambda, double alpha, long n, std::uint64_t seed) {
  check_probability(alpha, "INAR(1) thinning probability");
  check_length(n);
  Rng rng(seed);
  const double innovation = lambda * (1.0 - alpha);
  CountSeries out{CountVector(n), {}, {}, "inar1", seed};
  out.x(0) = rng.poisson(lambda);
  for (long t = 1; t < n; ++t) {
    const long survivors = rng.thin(out.x(t - 1), alpha);
    out.x(t) = survivors + rng.poisson(innovation);
  }
  return out;
}

CountSeries gen_cinar(double lambda, double alpha, const Eigen::VectorXd& phi,
                      long n, std::uint64_t seed, long burn_in) {
  check_probability(alpha, "CINAR thinning probability");
  check_length(n);
  if (phi.size() == 0 || (phi.array() < 0.0).any() ||
      std::abs(phi.sum() - 1.0) > 1e-12) {
    throw DomainError("CINAR decision probabilities must be nonnegative and sum to 1");
  }
  if (burn_in < 0) throw DomainError("burn-in must be >= 0");
  const long r = phi.size();
  const long total = n + burn_in;
  Rng rng(seed);
  const double innovation = lambda * (1.0 - alpha);
  std::vector<std::int64_t> x(std::max(total, r));
  for (long t = 0; t < std::min(r, total); ++t) x[t] = rng.poisson(lambda);
  for (long t = r; t < total; ++t) {
    // Mult(1; phi): pick lag j with probability phi_j. No draw when r = 1,
    // so the path coincides with gen_inar1 under the same seed.
    long j = 0;
    if (r > 1) {
      const double u = rng.uniform();
      double cum = phi(0);
      while (u >= cum && j + 1 < r) cum += phi(++j);
    }
    const long survivors = rng.thin(x[t - 1 - j], alpha);
    x[t] = survivors + rng.poisson(innovation);
  }
  CountSeries out{CountVector(n), {}, {}, "cinar", seed};
  for (long t = 0; t < n; ++t) out.x(t) = x[burn_in + t];
  return out;
}

CountSeries gen_super_renewal(const Eigen::VectorXd& lambda_path,
                              const RenewalLifetime& lifetime,
                              std::uint64_t seed) {
  check_path(lambda_path);
  const double mu = lifetime.mean();
  const long lmax = lifetime.pmf.size();
  // Delay law P(L0 = k) = P(L > k) / mu_L, k = 0..lmax-1.
  Eigen::VectorXd delay(lmax);
  double tail = 1.0;
  for (long k = 0; k < lmax; ++k) {
    tail -= k == 0 ? 0.0 : lifetime.pmf(k - 1);
    delay(k) = std::max(tail, 0.0) / mu;
  }
  auto draw = [](const Eigen::VectorXd& pmf, Rng& rng) {
    const double u = rng.uniform() * pmf.sum();
    double cum = 0.0;
    for (Eigen::Index k = 0; k < pmf.size(); ++k) {
      cum += pmf(k);
      if (u < cum) return static_cast<long>(k);
    }
    return static_cast<long>(pmf.size() - 1);
  };
  auto make_chain = [&](long n, Rng& rng) {
    std::vector<std::uint8_t> b(n, 0);
    long s = draw(delay, rng);
    while (s < n) {
      b[s] = 1;
      s += draw(lifetime.pmf, rng) + 1;
    }
    return b;
  };
  CountSeries out;
  out.x = superpose(lambda_path, 1.0 / mu, seed, make_chain);
  out.generator = "super-renewal";
  out.seed = seed;
  return out;
}

CountSeries gen_super_clipped(const Eigen::VectorXd& lambda_path,
                              const LatentAR& latent, std::uint64_t seed) {
  check_path(lambda_path);
  auto make_chain = [&](long n, Rng& rng) {
    const Eigen::VectorXd z = simulate_latent(latent, n, rng);
    std::vector<std::uint8_t> b(n);
    for (long t = 0; t < n; ++t) b[t] = z(t) > 0.0 ? 1 : 0;
    return b;
  };
  CountSeries out;
  out.x = superpose(lambda_path, 0.5, seed, make_chain);
  out.generator = "super-clipped";
  out.seed = seed;
  return out;
}

CountVector copula_transform(const Eigen::VectorXd& lambda_path,
                             const Eigen::VectorXd& z) {
  if (lambda_path.size() != z.size()) {
    throw DomainError("copula_transform: length mismatch");
  }
  constexpr double kBelowOne = 1.0 - 0x1.0p-53;
  CountVector x(z.size());
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    x(t) = poisson_quantile(lambda_path(t), std::min(normal_cdf(z(t)), kBelowOne));
  }
  return x;
}

CountSeries gen_copula(const Eigen::VectorXd& lambda_path, const LatentAR& latent,
                       std::uint64_t seed) {
  check_path(lambda_path);
  Rng rng(seed);
  const Eigen::VectorXd z = simulate_latent(latent, lambda_path.size(), rng);
  CountSeries out;
  out.x = copula_transform(lambda_path, z);
  out.generator = "copula";
  out.seed = seed;
  return out;
}

CountSeries gen_copula(const MeanModel& mean, const LatentAR& latent,
                       std::uint64_t seed) {
  CountSeries out = gen_copula(mean.lambda(), latent, seed);
  out.covariates = mean.covariates;
  out.covariate_names = mean.covariate_names;
  return out;
}

}  // namespace pcts
