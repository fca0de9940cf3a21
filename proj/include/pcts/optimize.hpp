#pragma once

// Derivative-free and quasi-Newton minimisers plus finite-difference
// Hessians for the estimation routines.

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pcts {

using Objective = std::function<double(const Eigen::VectorXd&)>;

enum class OptimizerMethod { kNelderMead, kBfgs };

OptimizerMethod parse_optimizer_method(const std::string& name);
std::string to_string(OptimizerMethod method);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::kNelderMead;
  int max_evaluations = 4000;
  /// Nelder-Mead: stop when the simplex values spread by less than
  /// f_tol * (1 + |f_best|) and its vertices lie within x_tol initial steps.
  double f_tol = 1e-9;
  double x_tol = 1e-4;
  /// BFGS: stop once the sup-norm of the gradient falls below g_tol.
  double g_tol = 1e-6;
  int restarts = 1;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Non-finite objective values are treated as +inf (rejected points).
OptimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& step,
                           const OptimizerConfig& config);

OptimizeResult bfgs(const Objective& f, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& step, const OptimizerConfig& config);

/// Dispatches on config.method. `step` sets the initial simplex for
/// Nelder-Mead and the finite-difference scale for BFGS.
OptimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& step,
                        const OptimizerConfig& config);

/// Central-difference Hessian with per-coordinate steps h.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& h);

}  // namespace pcts
