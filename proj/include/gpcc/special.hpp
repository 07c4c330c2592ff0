#ifndef GPCC_SPECIAL_HPP_
#define GPCC_SPECIAL_HPP_

#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace gpcc {

namespace detail {

// Double-precision evaluation without promotion to long double. Accuracy stays
// around 1e-13 relative and the Student t quantile becomes ~8x faster, which
// matters because it sits in the innermost EP loop.
using FastPolicy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::promote_float<false>>;

} // namespace detail

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

/// Standard normal cdf, evaluated in the complementary form so that the lower
/// tail keeps full relative precision down to about -37.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

inline double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

/// Standard normal quantile; p must lie in (0, 1).
inline double normal_quantile(double p) {
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p, detail::FastPolicy());
}

inline double student_t_quantile(double nu, double p) {
  return boost::math::quantile(
      boost::math::students_t_distribution<double, detail::FastPolicy>(nu), p);
}

inline double student_t_cdf(double nu, double x) {
  return boost::math::cdf(
      boost::math::students_t_distribution<double, detail::FastPolicy>(nu), x);
}

inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

} // namespace gpcc

#endif // GPCC_SPECIAL_HPP_
