#pragma once

// Causal AR(r) kernel for the latent standardized Gaussian process.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pcts/errors.hpp"
#include "pcts/random.hpp"

namespace pcts {

/// Causal AR(r) with innovation variance chosen so that Var(Z_t) = 1.
///
/// Besides the coefficients it keeps the Durbin-Levinson tables for orders
/// 0..r: `startup_coefficients()[k]` predicts Z_{k+1} from Z_k, ..., Z_1
/// (most recent first) and `startup_sd()[k]` is the matching root mean
/// squared error. For k = r these coincide with phi and sigma_eps.
class LatentAR {
 public:
  LatentAR() : LatentAR(Eigen::VectorXd()) {}
  /// Throws ModelError naming the offending roots if phi is not causal.
  explicit LatentAR(Eigen::VectorXd phi);

  const Eigen::VectorXd& phi() const { return phi_; }
  int order() const { return static_cast<int>(phi_.size()); }
  double sigma_eps() const { return sigma_eps_; }

  /// rho_Z(h) for h >= 0.
  double acf(int h) const;
  /// rho_Z(0..max_lag).
  Eigen::VectorXd acf_vector(int max_lag) const;

  const std::vector<Eigen::VectorXd>& startup_coefficients() const {
    return dl_coef_;
  }
  const Eigen::VectorXd& startup_sd() const { return dl_sd_; }

 private:
  Eigen::VectorXd phi_;
  Eigen::VectorXd rho_;  // rho(0..r)
  double sigma_eps_ = 1.0;
  std::vector<Eigen::VectorXd> dl_coef_;
  Eigen::VectorXd dl_sd_;
};

inline LatentAR make_latent_ar(const Eigen::VectorXd& phi) {
  return LatentAR(phi);
}

/// Roots of 1 - phi_1 z - ... - phi_r z^r.
Eigen::VectorXcd ar_polynomial_roots(const Eigen::VectorXd& phi);

/// Levinson map from partial autocorrelations in (-1, 1)^r to causal AR
/// coefficients, and its inverse (step-down recursion).
Eigen::VectorXd phi_from_pacf(const Eigen::VectorXd& pacf);
Eigen::VectorXd pacf_from_phi(const Eigen::VectorXd& phi);

/// One-step prediction state: mean and standard deviation of Z_{t} given
/// Z_1..Z_{t-1}, plus the retained history (most recent first, at most r
/// values).
struct PredictionState {
  int t = 1;
  double zhat = 0.0;
  double r = 1.0;
  std::vector<double> history;
};

PredictionState initial_state(const LatentAR& model);

/// Absorbs the realised value of Z_t and returns the predictor for
/// Z_{t+1}.
PredictionState one_step(const LatentAR& model, const PredictionState& state,
                         double z_new);

/// Exactly stationary path of length n (first values drawn from their joint
/// stationary law through the prediction recursion, no burn-in).
Eigen::VectorXd simulate_latent(const LatentAR& model, long n, Rng& rng);

// ---------------------------------------------------------------------------
// Cholesky solves for nonstationary prediction systems

/// Lower-triangular Cholesky factor of a symmetric positive-definite
/// matrix. Throws FactorizationError carrying the failing pivot index when
/// a squared pivot falls below 1e-12 (relative to the diagonal scale when
/// that exceeds one).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
cholesky_lower(const Eigen::MatrixBase<Derived>& cov) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n) throw DomainError("cholesky: matrix must be square");
  const Scalar threshold =
      Scalar(1e-12) *
      std::max<Scalar>(Scalar(1), cov.diagonal().cwiseAbs().maxCoeff());
  Eigen::LLT<Matrix> llt(cov);
  Matrix l;
  if (llt.info() == Eigen::Success) {
    l = llt.matrixL();
    Eigen::Index j;
    if (l.diagonal().cwiseAbs2().minCoeff(&j) > threshold) return l;
  }
  // Unblocked pass to locate the first failing pivot.
  l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar pivot = cov(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) {
      std::ostringstream os;
      os << "covariance matrix is not positive definite: pivot " << j
         << " equals " << pivot;
      throw FactorizationError(os.str(), static_cast<long>(j));
    }
    l(j, j) = std::sqrt(pivot);
    if (j + 1 < n) {
      l.col(j).tail(n - j - 1) =
          (cov.col(j).tail(n - j - 1) -
           l.bottomRows(n - j - 1).leftCols(j) * l.row(j).head(j).transpose()) /
          l(j, j);
    }
  }
  return l;
}

/// Solves cov * w = target by Cholesky factorization followed by forward
/// and backward substitution.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> cholesky_predictors(
    const Eigen::MatrixBase<DerivedA>& cov,
    const Eigen::MatrixBase<DerivedB>& target) {
  if (target.size() != cov.rows()) {
    throw DomainError("cholesky_predictors: dimension mismatch");
  }
  using Vector = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>;
  const auto l = cholesky_lower(cov);
  const Vector y = l.template triangularView<Eigen::Lower>().solve(target);
  return l.transpose().template triangularView<Eigen::Upper>().solve(y);
}

/// One-step prediction errors of a zero-mean series with covariance `cov`:
/// entry t is y_t minus its best linear predictor from y_1..y_{t-1}. Reads
/// every nested prediction system off a single Cholesky factor, since the
/// leading t x t block of the factor is the factor of the leading block.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> prediction_errors(
    const Eigen::MatrixBase<DerivedA>& cov,
    const Eigen::MatrixBase<DerivedB>& centered) {
  using Vector = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>;
  const auto l = cholesky_lower(cov);
  const Vector e = l.template triangularView<Eigen::Lower>().solve(centered);
  return (l.diagonal().array() * e.array()).matrix();
}

}  // namespace pcts
