#ifndef GPCC_COPULA_HPP_
#define GPCC_COPULA_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "gpcc/errors.hpp"
#include "gpcc/random.hpp"
#include "gpcc/special.hpp"

namespace gpcc {

enum class CopulaFamily { Gaussian, StudentT, SJC };

inline constexpr std::array<CopulaFamily, 3> kAllFamilies = {
    CopulaFamily::Gaussian, CopulaFamily::StudentT, CopulaFamily::SJC};

inline constexpr std::size_t parameter_count(CopulaFamily family) {
  return family == CopulaFamily::Gaussian ? 1 : 2;
}

inline std::string_view to_string(CopulaFamily family) {
  switch (family) {
  case CopulaFamily::Gaussian:
    return "gaussian";
  case CopulaFamily::StudentT:
    return "student";
  case CopulaFamily::SJC:
    return "sjc";
  }
  return "unknown";
}

inline CopulaFamily parse_family(std::string_view name) {
  if (name == "gaussian" || name == "g") {
    return CopulaFamily::Gaussian;
  }
  if (name == "student" || name == "t") {
    return CopulaFamily::StudentT;
  }
  if (name == "sjc") {
    return CopulaFamily::SJC;
  }
  throw DomainError("unknown copula family '" + std::string(name) + "'");
}

/// Names of the natural parameters, in latent order.
inline std::vector<std::string> parameter_names(CopulaFamily family) {
  switch (family) {
  case CopulaFamily::Gaussian:
    return {"tau"};
  case CopulaFamily::StudentT:
    return {"tau", "nu"};
  case CopulaFamily::SJC:
    return {"tau_upper", "tau_lower"};
  }
  return {};
}

/// Natural-space copula parameters. `values` is laid out in latent order:
/// Gaussian {tau}, StudentT {tau, nu}, SJC {tau_upper, tau_lower}.
struct CopulaParams {
  CopulaFamily family = CopulaFamily::Gaussian;
  std::array<double, 2> values{0.0, 0.0};

  static CopulaParams gaussian(double tau) {
    return {CopulaFamily::Gaussian, {tau, 0.0}};
  }
  static CopulaParams student_t(double tau, double nu) {
    return {CopulaFamily::StudentT, {tau, nu}};
  }
  static CopulaParams sjc(double tau_upper, double tau_lower) {
    return {CopulaFamily::SJC, {tau_upper, tau_lower}};
  }

  double tau() const { return values[0]; }
  double nu() const { return values[1]; }
  double tau_upper() const { return values[0]; }
  double tau_lower() const { return values[1]; }
  std::size_t size() const { return parameter_count(family); }
};

struct UnitPair {
  double u = 0.5;
  double v = 0.5;
};

inline constexpr double kUnitClamp = 1e-6;

inline double clamp_unit(double p) {
  return std::clamp(p, kUnitClamp, 1.0 - kUnitClamp);
}

inline UnitPair clamp_pair(UnitPair pair) {
  return {clamp_unit(pair.u), clamp_unit(pair.v)};
}

/// Validity sets. Degrees of freedom are accepted on [1, inf): the Table-style
/// transform 1 + 1e6 Phi(g) saturates to exactly 1 in double precision for
/// g below about -8.3, and the density is well defined there.
inline void validate_params(const CopulaParams &p) {
  auto fail = [&](const std::string &what) {
    throw DomainError(std::string(to_string(p.family)) + " copula: " + what);
  };
  switch (p.family) {
  case CopulaFamily::Gaussian:
    if (!(std::abs(p.tau()) < 1.0)) {
      fail("tau must lie in (-1, 1)");
    }
    break;
  case CopulaFamily::StudentT:
    if (!(std::abs(p.tau()) < 1.0)) {
      fail("tau must lie in (-1, 1)");
    }
    if (!(p.nu() >= 1.0) || !std::isfinite(p.nu())) {
      fail("nu must be finite and at least 1");
    }
    break;
  case CopulaFamily::SJC:
    if (!(p.tau_upper() > 0.0 && p.tau_upper() < 1.0)) {
      fail("tau_upper must lie in (0, 1)");
    }
    if (!(p.tau_lower() > 0.0 && p.tau_lower() < 1.0)) {
      fail("tau_lower must lie in (0, 1)");
    }
    break;
  }
}

/// Kendall tau to the elliptical correlation parameter.
inline double tau_to_rho(double tau) {
  if (!(std::abs(tau) < 1.0)) {
    throw DomainError("tau_to_rho: |tau| must be < 1");
  }
  return std::sin(0.5 * std::numbers::pi * tau);
}

inline double rho_to_tau(double rho) {
  return 2.0 * std::asin(std::clamp(rho, -1.0, 1.0)) / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Latent transforms: every parameter is offset + scale * Phi(latent).

struct ParamTransform {
  double offset = 0.0;
  double scale = 1.0;

  double operator()(double latent) const {
    return offset + scale * normal_cdf(latent);
  }
  double inverse(double theta) const {
    return normal_quantile((theta - offset) / scale);
  }
  /// E[transform(f)] for f ~ N(mean, var).
  double expected(double mean, double var) const {
    return offset + scale * normal_cdf(mean / std::sqrt(1.0 + var));
  }
  double lower() const { return offset; }
  double upper() const { return offset + scale; }
};

inline ParamTransform transform_for(CopulaFamily family, std::size_t index) {
  if (index >= parameter_count(family)) {
    throw ArityError("transform index out of range");
  }
  switch (family) {
  case CopulaFamily::Gaussian:
    return {-0.99, 1.98};
  case CopulaFamily::StudentT:
    return index == 0 ? ParamTransform{-0.99, 1.98} : ParamTransform{1.0, 1e6};
  case CopulaFamily::SJC:
    return {0.01, 0.98};
  }
  return {};
}

inline CopulaParams apply_transform(CopulaFamily family,
                                    std::span<const double> latents) {
  const auto k = parameter_count(family);
  if (latents.size() != k) {
    throw ArityError(std::string(to_string(family)) + " copula expects " +
                     std::to_string(k) + " latent values, got " +
                     std::to_string(latents.size()));
  }
  CopulaParams p{family, {0.0, 0.0}};
  for (std::size_t i = 0; i < k; ++i) {
    p.values[i] = transform_for(family, i)(latents[i]);
  }
  return p;
}

inline std::vector<double> inverse_transform(const CopulaParams &p) {
  std::vector<double> latents(p.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    latents[i] = transform_for(p.family, i).inverse(p.values[i]);
  }
  return latents;
}

namespace detail {

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) {
    return m;
  }
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Gaussian copula log-density in terms of the correlation and normal scores.
inline double gaussian_log_density(double rho, double x, double y) {
  const double one_minus = 1.0 - rho * rho;
  return -0.5 * std::log(one_minus) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_minus);
}

/// Parts of the Student t copula log-density that depend only on nu.
struct StudentConstants {
  double nu;
  double log_norm;

  explicit StudentConstants(double nu_)
      : nu(nu_), log_norm(std::lgamma(0.5 * (nu_ + 2.0)) +
                          std::lgamma(0.5 * nu_) -
                          2.0 * std::lgamma(0.5 * (nu_ + 1.0))) {}
};

/// Student t copula log-density in terms of correlation and t scores.
inline double student_log_density(const StudentConstants &k, double rho,
                                  double x, double y) {
  const double one_minus = 1.0 - rho * rho;
  const double nu = k.nu;
  const double quad = (x * x + y * y - 2.0 * rho * x * y) / (nu * one_minus);
  return k.log_norm - 0.5 * std::log(one_minus) -
         0.5 * (nu + 2.0) * std::log1p(quad) +
         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

/// Joe-Clayton parameters from the two tail dependence coefficients.
struct JoeClayton {
  double kappa;
  double gamma;

  static JoeClayton from_tails(double tau_upper, double tau_lower) {
    return {1.0 / std::log2(2.0 - tau_upper), -1.0 / std::log2(tau_lower)};
  }
};

// Shared intermediate quantities of the Joe-Clayton cdf at (u, v).
struct JcTerms {
  double log_a_u; // log(1 - (1-u)^kappa)
  double log_a_v;
  double log_A;   // log(a_u^-gamma + a_v^-gamma - 1)
  double B;       // A^(-1/gamma)
  double log_h;   // log(1 - B)
};

// log(1 - (1-x)^kappa), accurate at both ends.
inline double log_one_minus_pow(double x, double kappa) {
  const double lp = kappa * std::log1p(-x);
  return lp < -0.693 ? std::log1p(-std::exp(lp)) : std::log(-std::expm1(lp));
}

inline JcTerms jc_terms(const JoeClayton &jc, double u, double v) {
  JcTerms t{};
  t.log_a_u = log_one_minus_pow(u, jc.kappa);
  t.log_a_v = log_one_minus_pow(v, jc.kappa);
  const double excess = -(t.log_a_u + t.log_a_v);
  if (excess < 1e-12) {
    // Both points deep in the upper corner: A - 1 and 1 - B are below
    // double resolution, so carry 1 - B ~ (1-u)^kappa + (1-v)^kappa in logs.
    const double lu = jc.kappa * std::log1p(-u);
    const double lv = jc.kappa * std::log1p(-v);
    t.log_h = std::max(lu, lv) + std::log1p(std::exp(-std::abs(lu - lv)));
    t.log_A = jc.gamma * std::exp(t.log_h);
    t.B = 1.0;
    return t;
  }
  const double xu = -jc.gamma * t.log_a_u;
  const double xv = -jc.gamma * t.log_a_v;
  const double hi = std::max(xu, xv);
  const double lo = std::min(xu, xv);
  // A = e^xu + e^xv - 1; near A = 1 form the excess over one directly.
  if (hi > 30.0) {
    t.log_A = hi + std::log1p(std::exp(lo - hi) - std::exp(-hi));
  } else {
    t.log_A = std::log1p(std::expm1(xu) + std::expm1(xv));
  }
  t.B = std::exp(-t.log_A / jc.gamma);
  t.log_h = std::log(-std::expm1(-t.log_A / jc.gamma));
  return t;
}

inline double jc_cdf(const JoeClayton &jc, double u, double v) {
  if (u <= 0.0 || v <= 0.0) {
    return 0.0;
  }
  if (u >= 1.0) {
    return std::min(v, 1.0);
  }
  if (v >= 1.0) {
    return u;
  }
  const auto t = jc_terms(jc, u, v);
  return -std::expm1(t.log_h / jc.kappa);
}

/// dC_JC/du.
inline double jc_h_function(const JoeClayton &jc, double u, double v) {
  if (v <= 0.0) {
    return 0.0;
  }
  if (v >= 1.0) {
    return 1.0;
  }
  const auto t = jc_terms(jc, u, v);
  const double log_val = (1.0 / jc.kappa - 1.0) * t.log_h -
                         (1.0 / jc.gamma + 1.0) * t.log_A -
                         (jc.gamma + 1.0) * t.log_a_u +
                         (jc.kappa - 1.0) * std::log1p(-u);
  return std::exp(log_val);
}

inline double jc_log_density(const JoeClayton &jc, double u, double v) {
  const auto t = jc_terms(jc, u, v);
  const double k = jc.kappa;
  const double g = jc.gamma;
  const double log_pu = -(g + 1.0) * t.log_a_u + std::log(k) +
                        (k - 1.0) * std::log1p(-u);
  const double log_pv = -(g + 1.0) * t.log_a_v + std::log(k) +
                        (k - 1.0) * std::log1p(-v);
  const double bracket = (1.0 + g) - t.B * (g + 1.0 / k);
  return -std::log(k) + log_pu + log_pv + (1.0 / k - 2.0) * t.log_h -
         (1.0 / g + 2.0) * t.log_A + std::log(bracket);
}

/// Symmetrized Joe-Clayton: the survival term swaps the tail roles so that
/// the mixture keeps upper dependence tau_upper and lower dependence tau_lower.
struct SymmetrizedJc {
  JoeClayton direct;
  JoeClayton survival;

  SymmetrizedJc(double tau_upper, double tau_lower)
      : direct(JoeClayton::from_tails(tau_upper, tau_lower)),
        survival(JoeClayton::from_tails(tau_lower, tau_upper)) {}

  double log_density(double u, double v) const {
    return std::log(0.5) +
           log_sum_exp(jc_log_density(direct, u, v),
                       jc_log_density(survival, 1.0 - u, 1.0 - v));
  }

  double cdf(double u, double v) const {
    return 0.5 * (jc_cdf(direct, u, v) + jc_cdf(survival, 1.0 - u, 1.0 - v) +
                  u + v - 1.0);
  }

  /// Conditional cdf of v given u.
  double h_function(double u, double v) const {
    return 0.5 * (jc_h_function(direct, u, v) -
                  jc_h_function(survival, 1.0 - u, 1.0 - v) + 1.0);
  }
};

inline void check_interior(UnitPair pair) {
  if (!(pair.u > 0.0 && pair.u < 1.0 && pair.v > 0.0 && pair.v < 1.0)) {
    throw BoundaryError("copula pair must lie strictly inside the unit square");
  }
}

} // namespace detail

/// log c(u, v | params). Both coordinates are clamped to [1e-6, 1 - 1e-6]
/// before evaluation; values on or outside the closed boundary are rejected.
inline double copula_log_density(const CopulaParams &params, UnitPair pair) {
  validate_params(params);
  detail::check_interior(pair);
  const UnitPair p = clamp_pair(pair);
  switch (params.family) {
  case CopulaFamily::Gaussian: {
    const double rho = tau_to_rho(params.tau());
    return detail::gaussian_log_density(rho, normal_quantile(p.u),
                                        normal_quantile(p.v));
  }
  case CopulaFamily::StudentT: {
    const double rho = tau_to_rho(params.tau());
    const double nu = params.nu();
    const detail::StudentConstants k(nu);
    return detail::student_log_density(k, rho, student_t_quantile(nu, p.u),
                                       student_t_quantile(nu, p.v));
  }
  case CopulaFamily::SJC:
    return detail::SymmetrizedJc(params.tau_upper(), params.tau_lower())
        .log_density(p.u, p.v);
  }
  return 0.0;
}

inline double copula_density(const CopulaParams &params, UnitPair pair) {
  return std::exp(copula_log_density(params, pair));
}

/// Sum of log-densities over a sample.
inline double copula_log_likelihood(const CopulaParams &params,
                                    std::span<const UnitPair> data) {
  validate_params(params);
  double total = 0.0;
  switch (params.family) {
  case CopulaFamily::Gaussian: {
    const double rho = tau_to_rho(params.tau());
    for (const auto &pair : data) {
      detail::check_interior(pair);
      const auto p = clamp_pair(pair);
      total += detail::gaussian_log_density(rho, normal_quantile(p.u),
                                            normal_quantile(p.v));
    }
    break;
  }
  case CopulaFamily::StudentT: {
    const double rho = tau_to_rho(params.tau());
    const detail::StudentConstants k(params.nu());
    for (const auto &pair : data) {
      detail::check_interior(pair);
      const auto p = clamp_pair(pair);
      total += detail::student_log_density(
          k, rho, student_t_quantile(params.nu(), p.u),
          student_t_quantile(params.nu(), p.v));
    }
    break;
  }
  case CopulaFamily::SJC: {
    const detail::SymmetrizedJc sjc(params.tau_upper(), params.tau_lower());
    for (const auto &pair : data) {
      detail::check_interior(pair);
      const auto p = clamp_pair(pair);
      total += sjc.log_density(p.u, p.v);
    }
    break;
  }
  }
  return total;
}

/// One draw from the copula using an existing engine.
inline UnitPair sample_pair(const CopulaParams &params, Rng &rng) {
  auto interior = [](double p) {
    return std::clamp(p, std::numeric_limits<double>::min(),
                      1.0 - std::numeric_limits<double>::epsilon() / 2);
  };
  switch (params.family) {
  case CopulaFamily::Gaussian: {
    const double rho = tau_to_rho(params.tau());
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double y = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    return {interior(normal_cdf(z1)), interior(normal_cdf(y))};
  }
  case CopulaFamily::StudentT: {
    const double rho = tau_to_rho(params.tau());
    const double nu = params.nu();
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double y = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    const double w = std::sqrt(nu / rng.chi_squared(nu));
    return {interior(student_t_cdf(nu, z1 * w)),
            interior(student_t_cdf(nu, y * w))};
  }
  case CopulaFamily::SJC: {
    const detail::SymmetrizedJc sjc(params.tau_upper(), params.tau_lower());
    const double u = rng.uniform();
    const double w = rng.uniform();
    auto target = [&](double v) { return sjc.h_function(u, v) - w; };
    boost::uintmax_t max_iter = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10; };
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        target, 0.0, 1.0, -w, 1.0 - w, tol, max_iter);
    return {u, interior(0.5 * (lo + hi))};
  }
  }
  return {};
}

/// `count` i.i.d. draws; deterministic given the seed.
inline std::vector<UnitPair> copula_sample(const CopulaParams &params,
                                           std::size_t count,
                                           std::uint64_t seed) {
  validate_params(params);
  if (count == 0) {
    throw DomainError("copula_sample: count must be positive");
  }
  Rng rng(seed);
  std::vector<UnitPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(sample_pair(params, rng));
  }
  return out;
}

} // namespace gpcc

#endif // GPCC_COPULA_HPP_
