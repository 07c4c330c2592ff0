#ifndef GPCC_OPTIMIZE_HPP_
#define GPCC_OPTIMIZE_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

namespace gpcc {

using Objective = std::function<double(const Eigen::VectorXd &)>;

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct BfgsOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-6;
  double value_tol = 1e-10;
  double step_tol = 1e-10;
  double fd_step = 1e-5;
};

namespace detail {

inline double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

inline Eigen::VectorXd central_gradient(const Objective &f,
                                        const Eigen::VectorXd &x, double fx,
                                        double h, int &evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = finite_or_inf(f(xp));
    xp[i] = x[i] - hi;
    const double fm = finite_or_inf(f(xp));
    xp[i] = x[i];
    evals += 2;
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * hi);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / hi;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / hi;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

} // namespace detail

/// Unconstrained BFGS with central-difference gradients and a backtracking
/// Armijo line search. Non-finite objective values count as +inf.
inline MinimizeResult minimize_bfgs(const Objective &f, Eigen::VectorXd x0,
                                    const BfgsOptions &opts = {}) {
  MinimizeResult r;
  const auto n = x0.size();
  r.x = std::move(x0);
  r.value = detail::finite_or_inf(f(r.x));
  r.evaluations = 1;
  if (!std::isfinite(r.value)) {
    return r;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g =
      detail::central_gradient(f, r.x, r.value, opts.fd_step, r.evaluations);
  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      H.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
    }
    double t = 1.0;
    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      x_new = r.x + t * p;
      f_new = detail::finite_or_inf(f(x_new));
      ++r.evaluations;
      if (f_new <= r.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Line search stalled: either converged to numerical precision or the
      // quasi-Newton direction is poor. Retry once along steepest descent.
      if (H.isIdentity()) {
        r.converged = true;
        break;
      }
      H.setIdentity();
      continue;
    }
    const Eigen::VectorXd s = x_new - r.x;
    const double df = r.value - f_new;
    const Eigen::VectorXd g_new =
        detail::central_gradient(f, x_new, f_new, opts.fd_step, r.evaluations);
    const Eigen::VectorXd y = g_new - g;
    r.x = x_new;
    r.value = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    if (df < opts.value_tol * (1.0 + std::abs(r.value)) ||
        s.lpNorm<Eigen::Infinity>() < opts.step_tol) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

/// Runs BFGS from each start and keeps the best result.
inline MinimizeResult
minimize_multistart(const Objective &f, const std::vector<Eigen::VectorXd> &starts,
                    const BfgsOptions &opts = {}) {
  MinimizeResult best;
  for (const auto &s : starts) {
    auto r = minimize_bfgs(f, s, opts);
    if (best.x.size() == 0 || r.value < best.value) {
      best = std::move(r);
    }
  }
  return best;
}

/// 1-D bounded minimization (Brent).
template <typename F>
std::pair<double, double> minimize_scalar(F f, double lo, double hi,
                                          int bits = 40) {
  boost::uintmax_t iters = 200;
  auto wrapped = [&](double x) { return detail::finite_or_inf(f(x)); };
  return boost::math::tools::brent_find_minima(wrapped, lo, hi, bits, iters);
}

} // namespace gpcc

#endif // GPCC_OPTIMIZE_HPP_
