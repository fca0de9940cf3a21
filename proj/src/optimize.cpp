#include "pcts/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pcts/errors.hpp"

namespace pcts {
namespace {

constexpr double kHuge = std::numeric_limits<double>::infinity();

struct Counted {
  const Objective& f;
  int evaluations = 0;
  double operator()(const Eigen::VectorXd& x) {
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : kHuge;
  }
};

// One Nelder-Mead descent from a fresh simplex around x0.
bool nelder_mead_pass(Counted& f, Eigen::VectorXd& best, double& best_value,
                      const Eigen::VectorXd& step, const OptimizerConfig& cfg) {
  const Eigen::Index d = best.size();
  std::vector<Eigen::VectorXd> simplex(d + 1, best);
  std::vector<double> values(d + 1);
  values[0] = best_value;
  for (Eigen::Index i = 0; i < d; ++i) {
    simplex[i + 1](i) += step(i);
    values[i + 1] = f(simplex[i + 1]);
  }
  std::vector<int> order(d + 1);

  while (f.evaluations < cfg.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    const int lo = order.front();
    const int hi = order.back();
    const int second = order[d - 1];

    double extent = 0.0;
    for (Eigen::Index i = 0; i <= d; ++i) {
      extent = std::max(extent, ((simplex[i] - simplex[lo]).cwiseAbs().array() /
                                 step.cwiseAbs().array())
                                    .maxCoeff());
    }
    const double spread = values[hi] - values[lo];
    if (std::isfinite(spread) &&
        spread <= cfg.f_tol * (1.0 + std::abs(values[lo])) && extent <= cfg.x_tol) {
      best = simplex[lo];
      best_value = values[lo];
      return true;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (i != hi) centroid += simplex[i];
    }
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[hi]);
    const double fr = f(reflected);
    if (fr < values[lo]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[hi]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[hi] = expanded;
        values[hi] = fe;
      } else {
        simplex[hi] = reflected;
        values[hi] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[hi] = reflected;
      values[hi] = fr;
      continue;
    }
    const bool outside = fr < values[hi];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[hi] - centroid));
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[hi])) {
      simplex[hi] = contracted;
      values[hi] = fc;
      continue;
    }
    // Shrink towards the best vertex.
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (i == lo) continue;
      simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
      values[i] = f(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  best = simplex[it - values.begin()];
  best_value = *it;
  return false;
}

Eigen::VectorXd gradient(Counted& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h(i);
    const double fp = f(xp);
    xp(i) = x(i) - h(i);
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h(i));
  }
  return g;
}

}  // namespace

OptimizerMethod parse_optimizer_method(const std::string& name) {
  if (name == "nelder-mead" || name == "nm") return OptimizerMethod::kNelderMead;
  if (name == "bfgs") return OptimizerMethod::kBfgs;
  throw DomainError("unknown optimizer '" + name + "' (expected nelder-mead or bfgs)");
}

std::string to_string(OptimizerMethod method) {
  return method == OptimizerMethod::kBfgs ? "bfgs" : "nelder-mead";
}

OptimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& step,
                           const OptimizerConfig& config) {
  Counted counted{f};
  Eigen::VectorXd best = x0;
  double best_value = counted(best);
  bool converged = nelder_mead_pass(counted, best, best_value, step, config);
  // Restart from the reported optimum; a collapsed simplex can stall short
  // of the minimum.
  for (int r = 0; converged && r < config.restarts; ++r) {
    const double before = best_value;
    converged = nelder_mead_pass(counted, best, best_value, step, config);
    if (before - best_value <= config.f_tol * (1.0 + std::abs(best_value))) break;
  }
  return {best, best_value, converged, counted.evaluations};
}

OptimizeResult bfgs(const Objective& f, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& step, const OptimizerConfig& config) {
  Counted counted{f};
  const Eigen::Index d = x0.size();
  const Eigen::VectorXd h = (step.cwiseAbs() * 1e-3).cwiseMax(1e-7);
  Eigen::VectorXd x = x0;
  double fx = counted(x);
  Eigen::VectorXd g = gradient(counted, x, h);
  // Initial inverse Hessian scaled to the supplied step sizes.
  Eigen::MatrixXd inv = step.cwiseAbs2().asDiagonal();
  bool converged = false;
  while (counted.evaluations < config.max_evaluations) {
    if (g.cwiseAbs().maxCoeff() < config.g_tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      inv = step.cwiseAbs2().asDiagonal();
      dir = -inv * g;
      slope = g.dot(dir);
    }
    double a = 1.0;
    double fn = kHuge;
    Eigen::VectorXd xn;
    while (a > 1e-12) {
      xn = x + a * dir;
      fn = counted(xn);
      if (fn <= fx + 1e-4 * a * slope) break;
      a *= 0.5;
    }
    if (!(fn < fx)) {
      converged = std::abs(slope) < config.f_tol * (1.0 + std::abs(fx));
      break;
    }
    const Eigen::VectorXd gn = gradient(counted, xn, h);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
      inv = (id - rho * s * y.transpose()) * inv * (id - rho * y * s.transpose()) +
            rho * s * s.transpose();
    }
    const double change = fx - fn;
    x = xn;
    fx = fn;
    g = gn;
    if (change <= config.f_tol * (1.0 + std::abs(fx)) * 1e-3 &&
        g.cwiseAbs().maxCoeff() < 1e3 * config.g_tol) {
      converged = true;
      break;
    }
  }
  return {x, fx, converged, counted.evaluations};
}

OptimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& step,
                        const OptimizerConfig& config) {
  if (x0.size() == 0) return {x0, f(x0), true, 1};
  if (config.method == OptimizerMethod::kBfgs) return bfgs(f, x0, step, config);
  return nelder_mead(f, x0, step, config);
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& h) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd hess(d, d);
  const double f0 = f(x);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    xp(i) = x(i) + h(i);
    const double fp = f(xp);
    xp(i) = x(i) - h(i);
    const double fm = f(xp);
    xp(i) = x(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      auto at = [&](double si, double sj) {
        Eigen::VectorXd z = x;
        z(i) += si * h(i);
        z(j) += sj * h(j);
        return f(z);
      };
      const double v =
          (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h(i) * h(j));
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

}  // namespace pcts
