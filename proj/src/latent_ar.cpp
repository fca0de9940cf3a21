#include "pcts/latent_ar.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace pcts {

Eigen::VectorXcd ar_polynomial_roots(const Eigen::VectorXd& phi) {
  const Eigen::Index r = phi.size();
  if (r == 0) return {};
  // Companion matrix of z^r - phi_1 z^{r-1} - ... - phi_r; its eigenvalues
  // are the reciprocals of the roots of 1 - phi_1 z - ... - phi_r z^r.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(r, r);
  companion.row(0) = phi.transpose();
  if (r > 1) companion.bottomLeftCorner(r - 1, r - 1).setIdentity();
  Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false)
                             .eigenvalues();
  Eigen::VectorXcd roots(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    roots(i) = std::abs(eig(i)) == 0.0
                   ? std::complex<double>(kInf, 0.0)
                   : std::complex<double>(1.0, 0.0) / eig(i);
  }
  return roots;
}

Eigen::VectorXd phi_from_pacf(const Eigen::VectorXd& pacf) {
  const Eigen::Index r = pacf.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    Eigen::VectorXd next = phi;
    next(k) = pacf(k);
    for (Eigen::Index j = 0; j < k; ++j) next(j) = phi(j) - pacf(k) * phi(k - 1 - j);
    phi = next;
  }
  return phi;
}

Eigen::VectorXd pacf_from_phi(const Eigen::VectorXd& phi) {
  const Eigen::Index r = phi.size();
  Eigen::VectorXd pacf(r);
  Eigen::VectorXd cur = phi;
  for (Eigen::Index k = r - 1; k >= 0; --k) {
    const double a = cur(k);
    pacf(k) = a;
    if (std::abs(a) >= 1.0) {
      throw ModelError("pacf_from_phi: coefficients are not causal");
    }
    Eigen::VectorXd prev(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      prev(j) = (cur(j) + a * cur(k - 1 - j)) / (1.0 - a * a);
    }
    cur = prev;
  }
  return pacf;
}

LatentAR::LatentAR(Eigen::VectorXd phi) : phi_(std::move(phi)) {
  const int r = order();
  if (!phi_.allFinite()) throw ModelError("AR coefficients must be finite");
  if (r > 0) {
    const Eigen::VectorXcd roots = ar_polynomial_roots(phi_);
    std::ostringstream bad;
    bool causal = true;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
      if (std::abs(roots(i)) <= 1.0 + 1e-10) {
        causal = false;
        bad << " " << roots(i);
      }
    }
    if (!causal) {
      throw ModelError("AR polynomial has roots on or inside the unit circle:" +
                       bad.str());
    }
  }

  // Yule-Walker: rho(k) = sum_j phi_j rho(|k - j|), k = 1..r, rho(0) = 1.
  rho_ = Eigen::VectorXd::Ones(r + 1);
  if (r > 0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(r, r);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(r);
    for (int k = 1; k <= r; ++k) {
      for (int j = 1; j <= r; ++j) {
        const int lag = std::abs(k - j);
        if (lag == 0) {
          b(k - 1) += phi_(j - 1);
        } else {
          a(k - 1, lag - 1) -= phi_(j - 1);
        }
      }
    }
    rho_.tail(r) = a.partialPivLu().solve(b);
  }
  const double var = 1.0 - (r > 0 ? phi_.dot(rho_.tail(r)) : 0.0);
  if (!(var > 0.0)) throw ModelError("AR innovation variance is not positive");
  sigma_eps_ = std::sqrt(var);

  // Durbin-Levinson on rho for orders 0..r.
  dl_coef_.assign(r + 1, Eigen::VectorXd());
  dl_sd_.resize(r + 1);
  double v = 1.0;
  dl_sd_(0) = 1.0;
  for (int k = 1; k <= r; ++k) {
    const Eigen::VectorXd& prev = dl_coef_[k - 1];
    double num = rho_(k);
    for (int j = 1; j < k; ++j) num -= prev(j - 1) * rho_(k - j);
    const double pk = num / v;
    Eigen::VectorXd cur(k);
    for (int j = 1; j < k; ++j) cur(j - 1) = prev(j - 1) - pk * prev(k - j - 1);
    cur(k - 1) = pk;
    v *= 1.0 - pk * pk;
    dl_coef_[k] = cur;
    dl_sd_(k) = std::sqrt(v);
  }
  if (r > 0) {
    // Identical in exact arithmetic; pin the steady state to the model.
    dl_coef_[r] = phi_;
    dl_sd_(r) = sigma_eps_;
  }
}

double LatentAR::acf(int h) const {
  h = std::abs(h);
  const int r = order();
  if (h <= r) return rho_(h);
  Eigen::VectorXd window = rho_;  // rho(h - r) .. rho(h - 1) after shifting
  double value = 0.0;
  for (int lag = r + 1; lag <= h; ++lag) {
    value = 0.0;
    for (int j = 1; j <= r; ++j) value += phi_(j - 1) * window(r + 1 - j);
    for (int i = 0; i < r; ++i) window(i) = window(i + 1);
    window(r) = value;
  }
  return r == 0 ? 0.0 : value;
}

Eigen::VectorXd LatentAR::acf_vector(int max_lag) const {
  const int r = order();
  Eigen::VectorXd out(max_lag + 1);
  for (int h = 0; h <= max_lag; ++h) {
    if (h <= r) {
      out(h) = rho_(h);
    } else {
      double v = 0.0;
      for (int j = 1; j <= r; ++j) v += phi_(j - 1) * out(h - j);
      out(h) = v;
    }
  }
  return out;
}

PredictionState initial_state(const LatentAR& model) {
  PredictionState s;
  s.t = 1;
  s.zhat = 0.0;
  s.r = 1.0;
  s.history.reserve(model.order());
  return s;
}

PredictionState one_step(const LatentAR& model, const PredictionState& state,
                         double z_new) {
  const int r = model.order();
  PredictionState next;
  next.t = state.t + 1;
  next.history.reserve(r);
  if (r > 0) {
    next.history.push_back(z_new);
    const std::size_t keep = std::min<std::size_t>(state.history.size(), r - 1);
    next.history.insert(next.history.end(), state.history.begin(),
                        state.history.begin() + keep);
  }
  const int k = static_cast<int>(next.history.size());  // min(t, r)
  const Eigen::VectorXd& coef = model.startup_coefficients()[k];
  double mean = 0.0;
  for (int j = 0; j < k; ++j) mean += coef(j) * next.history[j];
  next.zhat = mean;
  next.r = model.startup_sd()(k);
  return next;
}

Eigen::VectorXd simulate_latent(const LatentAR& model, long n, Rng& rng) {
  Eigen::VectorXd z(n);
  PredictionState s = initial_state(model);
  for (long t = 0; t < n; ++t) {
    z(t) = s.zhat + s.r * rng.normal();
    s = one_step(model, s, z(t));
  }
  return z;
}

}  // namespace pcts
