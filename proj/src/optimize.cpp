#include "fasdoa/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace fasdoa {

Eigen::VectorXd central_difference_gradient(const ScalarFunction& f, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                            double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = std::min(x(i) + step, upper(i));
    const double lo = std::max(x(i) - step, lower(i));
    probe(i) = hi;
    const double fh = f(probe);
    probe(i) = lo;
    const double fl = f(probe);
    probe(i) = x(i);
    g(i) = hi > lo ? (fh - fl) / (hi - lo) : 0.0;
  }
  return g;
}

namespace {

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

BoxResult minimize_box(const ScalarFunction& f, const GradientFunction& gradient, Eigen::VectorXd x0,
                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const BoxOptions& options) {
  const auto n = x0.size();
  auto grad = [&](const Eigen::VectorXd& x) {
    return gradient ? gradient(x) : central_difference_gradient(f, x, lower, upper, options.fd_step);
  };

  BoxResult r;
  r.x = project(std::move(x0), lower, upper);
  r.f = f(r.x);
  Eigen::VectorXd g = grad(r.x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool fresh_h = true;
  int stalls = 0;

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    // Variables pinned at a bound with the gradient pushing outward stay fixed.
    Eigen::VectorXd free = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((r.x(i) <= lower(i) && g(i) > 0.0) || (r.x(i) >= upper(i) && g(i) < 0.0)) free(i) = 0.0;
    }
    const Eigen::VectorXd pg = r.x - project(r.x - g, lower, upper);
    if (pg.cwiseAbs().maxCoeff() <= options.gradient_tolerance * std::max(1.0, std::abs(r.f))) {
      r.converged = true;
      break;
    }

    Eigen::VectorXd d = -(free.asDiagonal() * h * free.asDiagonal() * g);
    if (g.dot(d) >= 0.0) {
      h.setIdentity();
      fresh_h = true;
      d = -(free.asDiagonal() * g);
    }
    double alpha = 1.0;
    if (fresh_h) {
      const double dn = d.cwiseAbs().maxCoeff();
      const double span = (upper - lower).cwiseAbs().maxCoeff();
      if (dn > 0.0 && std::isfinite(span) && span > 0.0) alpha = std::min(1.0, 0.1 * span / dn);
    }

    Eigen::VectorXd x_new;
    double f_new = r.f;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = project(r.x + alpha * d, lower, upper);
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= r.f + 1e-4 * g.dot(x_new - r.x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!fresh_h) {
        h.setIdentity();
        fresh_h = true;
        continue;
      }
      r.converged = true;  // no descent available at working precision
      break;
    }

    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_h) h *= sy / y.dot(y);
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i_n = Eigen::MatrixXd::Identity(n, n);
      h = (i_n - rho * s * y.transpose()) * h * (i_n - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh_h = false;
    }

    const double decrease = r.f - f_new;
    r.x = x_new;
    r.f = f_new;
    g = g_new;
    if (decrease <= options.function_tolerance * std::max(1.0, std::abs(r.f))) {
      if (++stalls >= 3) {
        r.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  return r;
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double tol,
                               double* best_value) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = fc > fd ? c : d;
  if (best_value) *best_value = std::max(fc, fd);
  return x;
}

}  // namespace fasdoa
