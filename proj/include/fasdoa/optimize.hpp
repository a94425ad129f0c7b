#pragma once

#include <functional>

#include <Eigen/Dense>

namespace fasdoa {

struct BoxOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-9;   // on the projected gradient, relative to max(1, |f|)
  double function_tolerance = 1e-13;  // relative decrease treated as stalled
  double fd_step = 1e-7;              // central-difference step when no gradient is given
};

struct BoxResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using GradientFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd central_difference_gradient(const ScalarFunction& f, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                            double step);

// Projected BFGS on the box [lower, upper] with an Armijo backtracking search.
// `gradient` may be empty, in which case central differences are used.
BoxResult minimize_box(const ScalarFunction& f, const GradientFunction& gradient, Eigen::VectorXd x0,
                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const BoxOptions& options = {});

// Golden-section maximization of a unimodal-on-bracket function.
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double tol,
                               double* best_value = nullptr);

}  // namespace fasdoa
