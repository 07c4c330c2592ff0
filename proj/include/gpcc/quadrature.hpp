#ifndef GPCC_QUADRATURE_HPP_
#define GPCC_QUADRATURE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gpcc/errors.hpp"
#include "gpcc/special.hpp"

namespace gpcc {

/// Zeroth to second moments of N(f | mean, var) * exp(loglik(f)), normalized
/// by the zeroth moment.
struct TiltedMoments {
  double log_z = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct QuadratureOptions {
  double half_width = 10.0; // in cavity standard deviations
  double rel_tol = 1e-7;
  int max_depth = 6;
  int fallback_points = 2001;
};

namespace detail {

// Simultaneous 61-point Kronrod / 30-point Gauss sums of (w, w s, w s^2).
struct KronrodRule {
  std::array<double, 61> nodes{};
  std::array<double, 61> kronrod_weights{};
  std::array<double, 61> gauss_weights{}; // zero where the node is not Gauss

  KronrodRule() {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    using G = boost::math::quadrature::gauss<double, 30>;
    const auto &a = GK::abscissa();
    const auto &w = GK::weights();
    const auto &gw = G::weights();
    nodes[30] = 0.0;
    kronrod_weights[30] = w[0];
    for (std::size_t i = 1; i < a.size(); ++i) {
      nodes[30 + i] = a[i];
      nodes[30 - i] = -a[i];
      kronrod_weights[30 + i] = kronrod_weights[30 - i] = w[i];
      if (i % 2 == 1) {
        gauss_weights[30 + i] = gauss_weights[30 - i] = gw[(i - 1) / 2];
      }
    }
  }

  static const KronrodRule &instance() {
    static const KronrodRule rule;
    return rule;
  }
};

struct MomentSums {
  std::array<double, 3> kronrod{};
  double gauss0 = 0.0;
};

template <typename LogWeight>
MomentSums kronrod_interval(const LogWeight &log_weight, double a, double b,
                            double shift) {
  const auto &rule = KronrodRule::instance();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  MomentSums out;
  for (std::size_t i = 0; i < 61; ++i) {
    const double s = c + h * rule.nodes[i];
    const double lw = log_weight(s);
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      std::ostringstream msg;
      msg << "non-finite integrand at standardized point " << s
          << " in interval [" << a << ", " << b << "]";
      throw NumericError(msg.str());
    }
    const double w = std::exp(lw - shift);
    const double kw = rule.kronrod_weights[i] * w;
    out.kronrod[0] += kw;
    out.kronrod[1] += kw * s;
    out.kronrod[2] += kw * s * s;
    out.gauss0 += rule.gauss_weights[i] * w;
  }
  for (auto &m : out.kronrod) {
    m *= h;
  }
  out.gauss0 *= h;
  return out;
}

template <typename LogWeight>
void adaptive_moments(const LogWeight &log_weight, double a, double b,
                      double shift, double tol, int depth,
                      std::array<double, 3> &acc, bool &converged) {
  const auto sums = kronrod_interval(log_weight, a, b, shift);
  const double err = std::abs(sums.kronrod[0] - sums.gauss0);
  if (err <= tol || depth <= 0) {
    if (err > tol) {
      converged = false;
    }
    for (int i = 0; i < 3; ++i) {
      acc[i] += sums.kronrod[i];
    }
    return;
  }
  const double mid = 0.5 * (a + b);
  adaptive_moments(log_weight, a, mid, shift, 0.5 * tol, depth - 1, acc,
                   converged);
  adaptive_moments(log_weight, mid, b, shift, 0.5 * tol, depth - 1, acc,
                   converged);
}

} // namespace detail

/// Moments of the tilted distribution cavity(f) * exp(loglik(f)). Integration
/// runs in the standardized variable s = (f - mean) / sd over
/// [-half_width, half_width] with an adaptive 61-point Gauss-Kronrod rule,
/// falling back to a dense trapezoid rule when the adaptive rule does not
/// reach tolerance.
template <typename LogLik>
TiltedMoments tilted_moments(double cavity_mean, double cavity_var,
                             const LogLik &loglik,
                             const QuadratureOptions &opts = {}) {
  const double sd = std::sqrt(cavity_var);
  auto log_weight = [&](double s) {
    return normal_log_pdf(s) + loglik(cavity_mean + sd * s);
  };
  const double a = -opts.half_width;
  const double b = opts.half_width;

  // Shift by the largest log-weight on the base rule to avoid overflow.
  double shift = -std::numeric_limits<double>::infinity();
  {
    const auto &rule = detail::KronrodRule::instance();
    for (double node : rule.nodes) {
      shift = std::max(shift, log_weight(b * node));
    }
    if (!std::isfinite(shift)) {
      throw NumericError("tilted distribution has no mass on [" +
                         std::to_string(cavity_mean + a * sd) + ", " +
                         std::to_string(cavity_mean + b * sd) + "]");
    }
  }

  std::array<double, 3> m{0.0, 0.0, 0.0};
  bool converged = true;
  const auto base = detail::kronrod_interval(log_weight, a, b, shift);
  const double tol = opts.rel_tol * std::abs(base.kronrod[0]);
  if (std::abs(base.kronrod[0] - base.gauss0) <= tol) {
    m = base.kronrod;
  } else {
    detail::adaptive_moments(log_weight, a, b, shift, tol, opts.max_depth, m,
                             converged);
  }
  if (!converged) {
    m = {0.0, 0.0, 0.0};
    const int n = opts.fallback_points;
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double s = a + h * i;
      const double w = std::exp(log_weight(s) - shift) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
      m[0] += w;
      m[1] += w * s;
      m[2] += w * s * s;
    }
    for (auto &x : m) {
      x *= h;
    }
  }
  if (!(m[0] > 0.0) || !std::isfinite(m[0])) {
    throw NumericError("tilted distribution has zero or non-finite mass");
  }
  const double es = m[1] / m[0];
  const double vs = std::max(m[2] / m[0] - es * es, 0.0);
  TiltedMoments out;
  out.log_z = std::log(m[0]) + shift;
  out.mean = cavity_mean + sd * es;
  out.variance = cavity_var * vs;
  return out;
}

} // namespace gpcc

#endif // GPCC_QUADRATURE_HPP_
