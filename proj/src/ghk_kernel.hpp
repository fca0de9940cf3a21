#pragma once

// Allocation-free one-step predictor shared by the GHK likelihood and the
// particle PIT pass.

#include <vector>

#include "pcts/latent_ar.hpp"

namespace pcts::detail {

class FlatPredictor {
 public:
  explicit FlatPredictor(const LatentAR& latent) : r_(latent.order()) {
    coef_.assign(static_cast<std::size_t>((r_ + 1) * std::max(r_, 1)), 0.0);
    sd_.resize(r_ + 1);
    for (int k = 0; k <= r_; ++k) {
      const Eigen::VectorXd& c = latent.startup_coefficients()[k];
      for (int j = 0; j < k; ++j) coef_[k * r_ + j] = c(j);
      sd_[k] = latent.startup_sd()(k);
    }
  }

  int order() const { return r_; }

  /// `hist` holds the latest `count` = min(t - 1, r) values, most recent
  /// first.
  double mean(const double* hist, int count) const {
    const double* c = coef_.data() + count * r_;
    double m = 0.0;
    for (int j = 0; j < count; ++j) m += c[j] * hist[j];
    return m;
  }
  double sd(int count) const { return sd_[count]; }

  /// Pushes z to the front of the history window.
  void push(double* hist, int& count, double z) const {
    if (r_ == 0) return;
    const int keep = count < r_ ? count : r_ - 1;
    for (int j = keep; j > 0; --j) hist[j] = hist[j - 1];
    hist[0] = z;
    if (count < r_) ++count;
  }

 private:
  int r_;
  std::vector<double> coef_;
  std::vector<double> sd_;
};

}  // namespace pcts::detail
