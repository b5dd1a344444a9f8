#pragma once

// Unconstrained minimizers for smooth energies on R^n.

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace ldg {

/// Returns f(x) and, when grad != nullptr, writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct OptimOptions {
  double grad_tol = 1e-6;  // absolute 2-norm of the gradient
  int max_iter = 20000;
  int memory = 12;         // L-BFGS history
  double fd_step = 1e-6;   // Hessian-vector product step (trust region)
  int cg_max_iter = 200;
  bool verbose = false;
  // Called after every accepted step with (iteration, f, |g|).
  std::function<void(int, double, double)> monitor;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0;
  double grad_norm = 0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // f never increased across accepted steps
  std::string message;
};

OptimResult minimize_lbfgs(const Objective& fun, Eigen::VectorXd x0, const OptimOptions& opt = {});

/// Steihaug trust-region Newton-CG with finite-difference Hessian-vector products.
OptimResult minimize_trust_region(const Objective& fun, Eigen::VectorXd x0, const OptimOptions& opt = {});

}  // namespace ldg
