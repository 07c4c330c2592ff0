#ifndef GPCC_BASELINES_HPP_
#define GPCC_BASELINES_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpcc/copula.hpp"
#include "gpcc/errors.hpp"
#include "gpcc/optimize.hpp"
#include "gpcc/random.hpp"
#include "gpcc/stats.hpp"

namespace gpcc {

inline constexpr std::size_t kRecursionWindow = 10;

namespace detail {

// Correlations are kept off +-1 when evaluating densities.
inline constexpr double kRhoMax = 0.9999;
inline constexpr double kTauMax = 0.995;

inline double bounded_tau(double a) { return kTauMax * std::tanh(a); }
inline double unbounded_tau(double tau) {
  return std::atanh(std::clamp(tau / kTauMax, -0.999999, 0.999999));
}
// nu = 1 + exp(b), b clamped so the search stays in a sane range.
inline double bounded_nu(double b) { return 1.0 + std::exp(std::clamp(b, -5.0, 10.0)); }
inline double unbounded_nu(double nu) { return std::log(std::max(nu - 1.0, 1e-12)); }

inline double tail_from_logit(double a) { return 0.01 + 0.98 * logistic(a); }
inline double logit_from_tail(double t) {
  const double p = std::clamp((t - 0.01) / 0.98, 1e-9, 1.0 - 1e-9);
  return std::log(p / (1.0 - p));
}

inline void require_size(std::span<const UnitPair> data, std::size_t n,
                         const char *who) {
  if (data.size() < n) {
    throw ShapeError(std::string(who) + " needs at least " + std::to_string(n) +
                     " observations, got " + std::to_string(data.size()));
  }
}

struct Scores {
  std::vector<double> x;
  std::vector<double> y;
};

inline Scores normal_scores(std::span<const UnitPair> data) {
  Scores s;
  s.x.reserve(data.size());
  s.y.reserve(data.size());
  for (const auto &p : data) {
    const auto c = clamp_pair(p);
    s.x.push_back(normal_quantile(c.u));
    s.y.push_back(normal_quantile(c.v));
  }
  return s;
}

inline Scores t_scores(std::span<const UnitPair> data, double nu) {
  // Optimizers revisit the same nu (finite-difference steps in tau), and the
  // quantile dominates the cost; remember the last call per thread.
  struct Memo {
    const UnitPair *ptr = nullptr;
    std::size_t size = 0;
    std::uint64_t hash = 0;
    double nu = 0.0;
    Scores scores;
  };
  thread_local Memo memo;
  std::uint64_t hash = 0;
  for (const auto &p : data) {
    hash = (hash ^ std::bit_cast<std::uint64_t>(p.u)) * 0x100000001b3ULL;
    hash = (hash ^ std::bit_cast<std::uint64_t>(p.v)) * 0x100000001b3ULL;
  }
  if (memo.ptr == data.data() && memo.size == data.size() && memo.nu == nu &&
      memo.hash == hash) {
    return memo.scores;
  }
  Scores s;
  s.x.reserve(data.size());
  s.y.reserve(data.size());
  for (const auto &p : data) {
    const auto c = clamp_pair(p);
    s.x.push_back(student_t_quantile(nu, c.u));
    s.y.push_back(student_t_quantile(nu, c.v));
  }
  memo = {data.data(), data.size(), hash, nu, s};
  return s;
}

// Weighted Student t copula log-likelihood at (tau, nu); empty weights mean 1.
inline double weighted_student_ll(std::span<const UnitPair> data,
                                  std::span<const double> w, double tau, double nu) {
  const auto s = t_scores(data, nu);
  const StudentConstants k(nu);
  const double rho = std::clamp(tau_to_rho(tau), -kRhoMax, kRhoMax);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double l = student_log_density(k, rho, s.x[i], s.y[i]);
    total += w.empty() ? l : w[i] * l;
  }
  return total;
}

inline double weighted_gaussian_ll(const Scores &s, std::span<const double> w,
                                   double tau) {
  const double rho = std::clamp(tau_to_rho(tau), -kRhoMax, kRhoMax);
  double total = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double l = gaussian_log_density(rho, s.x[i], s.y[i]);
    total += w.empty() ? l : w[i] * l;
  }
  return total;
}

// Best tau for fixed scores, by Brent on the bounded range.
inline std::pair<double, double> best_gaussian_tau(const Scores &s,
                                                   std::span<const double> w) {
  const auto [tau, neg] = minimize_scalar(
      [&](double t) { return -weighted_gaussian_ll(s, w, t); }, -kTauMax, kTauMax, 50);
  return {tau, -neg};
}

// For fixed nu the t scores are fixed, so tau is a 1-D problem.
inline std::pair<double, double> best_student_tau(const Scores &s, double nu,
                                                  std::span<const double> w) {
  const StudentConstants k(nu);
  auto negll = [&](double tau) {
    const double rho = std::clamp(tau_to_rho(tau), -kRhoMax, kRhoMax);
    double total = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double l = student_log_density(k, rho, s.x[i], s.y[i]);
      total += w.empty() ? l : w[i] * l;
    }
    return -total;
  };
  const auto [tau, neg] = minimize_scalar(negll, -kTauMax, kTauMax, 50);
  return {tau, -neg};
}

// Profile likelihood over b = log(nu - 1): grid, then Brent around the best
// grid point.
inline CopulaParams fit_student_profile(std::span<const UnitPair> data,
                                        std::span<const double> w, double &ll) {
  auto profile = [&](double b) {
    const double nu = bounded_nu(b);
    return best_student_tau(t_scores(data, nu), nu, w);
  };
  const std::vector<double> grid{-4.0, -2.5, -1.0, 0.0, 1.0, 2.0, 3.0, 4.5, 6.5, 10.0};
  std::size_t best = 0;
  double best_ll = -INFINITY;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double l = profile(grid[g]).second;
    if (l > best_ll) {
      best_ll = l;
      best = g;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const auto [b, neg] = minimize_scalar([&](double x) { return -profile(x).second; },
                                        lo, hi, 30);
  double b_best = b;
  if (-neg < best_ll) {
    b_best = grid[best];
  }
  const auto [tau, l] = profile(b_best);
  ll = l;
  return CopulaParams::student_t(tau, bounded_nu(b_best));
}

inline double sjc_ll(std::span<const UnitPair> data, std::span<const double> w,
                     double tu, double tl) {
  const SymmetrizedJc sjc(tu, tl);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = clamp_pair(data[i]);
    const double l = sjc.log_density(c.u, c.v);
    total += w.empty() ? l : w[i] * l;
  }
  return total;
}

inline CopulaParams fit_sjc_ml(std::span<const UnitPair> data, std::span<const double> w,
                               double &ll, bool &converged) {
  auto negll = [&](const Eigen::VectorXd &x) {
    return -sjc_ll(data, w, tail_from_logit(std::clamp(x[0], -8.0, 8.0)),
                   tail_from_logit(std::clamp(x[1], -8.0, 8.0)));
  };
  Eigen::VectorXd start(2);
  double best = INFINITY;
  for (double a : {-3.0, -1.5, 0.0, 1.5}) {
    for (double b : {-3.0, -1.5, 0.0, 1.5}) {
      Eigen::VectorXd x(2);
      x << a, b;
      const double v = negll(x);
      if (v < best) {
        best = v;
        start = x;
      }
    }
  }
  const auto r = minimize_bfgs(negll, start);
  ll = -r.value;
  converged = r.converged;
  return CopulaParams::sjc(tail_from_logit(std::clamp(r.x[0], -8.0, 8.0)),
                           tail_from_logit(std::clamp(r.x[1], -8.0, 8.0)));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Constant copulas

struct ConstModel {
  CopulaParams params;
  double log_likelihood = 0.0;
  bool converged = true;
};

/// Maximum-likelihood constant copula on a pseudo-series (n >= 10).
inline ConstModel fit_const_model(CopulaFamily family, std::span<const UnitPair> data) {
  detail::require_size(data, 10, "fit_const");
  ConstModel m;
  switch (family) {
  case CopulaFamily::Gaussian: {
    const auto s = detail::normal_scores(data);
    const auto [tau, ll] = detail::best_gaussian_tau(s, {});
    m.params = CopulaParams::gaussian(tau);
    m.log_likelihood = ll;
    break;
  }
  case CopulaFamily::StudentT:
    m.params = detail::fit_student_profile(data, {}, m.log_likelihood);
    break;
  case CopulaFamily::SJC:
    m.params = detail::fit_sjc_ml(data, {}, m.log_likelihood, m.converged);
    break;
  }
  if (!std::isfinite(m.log_likelihood)) {
    throw FitError("fit_const: non-finite log-likelihood", m.log_likelihood);
  }
  return m;
}

inline CopulaParams fit_const(CopulaFamily family, std::span<const UnitPair> data) {
  return fit_const_model(family, data).params;
}

// ---------------------------------------------------------------------------
// TVC: Student t copula with the correlation recursion
//   rho_t = (1 - alpha - beta) rho_bar + alpha eps_{t-1} + beta rho_{t-1},
// eps_{t-1} the Pearson correlation of the previous 10 (u, v) pairs.

struct TvcParams {
  double rho_bar = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double nu = 5.0;

  void validate() const {
    if (!(rho_bar >= -1.0 && rho_bar <= 1.0 && alpha >= 0.0 && beta >= 0.0 &&
          alpha <= 1.0 && beta <= 1.0 && alpha + beta <= 1.0 + 1e-12 && nu > 1.0)) {
      throw DomainError("TVC parameters outside their constraint set");
    }
  }
};

inline double tvc_recursion(const TvcParams &p, double eps, double prev_rho) {
  const double r = (1.0 - p.alpha - p.beta) * p.rho_bar + p.alpha * eps + p.beta * prev_rho;
  return std::clamp(r, -1.0, 1.0);
}

inline double window_correlation(std::span<const UnitPair> window) {
  std::vector<double> u(window.size());
  std::vector<double> v(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    u[i] = window[i].u;
    v[i] = window[i].v;
  }
  return pearson(u, v);
}

inline double tvc_step(const TvcParams &p, double prev_rho,
                       std::span<const UnitPair> window) {
  if (window.size() != kRecursionWindow) {
    throw ShapeError("tvc_step needs a window of exactly 10 pairs");
  }
  return tvc_recursion(p, window_correlation(window), prev_rho);
}

/// rho_t for t = 0..n; entry n is the one-step-ahead value. The first 10
/// steps reuse rho0.
inline std::vector<double> tvc_path(const TvcParams &p, std::span<const UnitPair> data,
                                    double rho0) {
  std::vector<double> rho(data.size() + 1, rho0);
  for (std::size_t t = kRecursionWindow; t <= data.size(); ++t) {
    rho[t] = tvc_step(p, rho[t - 1], data.subspan(t - kRecursionWindow, kRecursionWindow));
  }
  return rho;
}

struct TvcModel {
  TvcParams params;
  double rho0 = 0.0;
  double log_likelihood = 0.0;
  bool converged = true;
};

namespace detail {

inline double tvc_ll_scores(const TvcParams &p, std::span<const UnitPair> data,
                            const Scores &s, double rho0) {
  const auto rho = tvc_path(p, data, rho0);
  const StudentConstants k(p.nu);
  double total = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    total += student_log_density(k, std::clamp(rho[t], -kRhoMax, kRhoMax), s.x[t], s.y[t]);
  }
  return total;
}

// (a, b) -> (alpha, beta) on the simplex alpha, beta >= 0, alpha + beta <= 1.
inline std::pair<double, double> simplex_weights(double a, double b) {
  const double m = std::max({a, b, 0.0});
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  const double e0 = std::exp(-m);
  const double z = ea + eb + e0;
  return {ea / z, eb / z};
}

inline std::pair<double, double> simplex_logits(double alpha, double beta) {
  const double rest = std::max(1.0 - alpha - beta, 1e-9);
  return {std::log(std::max(alpha, 1e-9) / rest), std::log(std::max(beta, 1e-9) / rest)};
}

} // namespace detail

inline double tvc_log_likelihood(const TvcParams &p, std::span<const UnitPair> data,
                                 double rho0) {
  p.validate();
  return detail::tvc_ll_scores(p, data, detail::t_scores(data, p.nu), rho0);
}

struct RecursionFitOptions {
  int restarts = 3;
  bool dynamic = true; // false fixes the recursion weights at zero
};

/// Maximum-likelihood TVC fit. rho0 is the unconditional estimate
/// sin(pi tau_hat / 2) from the window's Kendall tau.
inline TvcModel fit_tvc(std::span<const UnitPair> data, const RecursionFitOptions &opts = {}) {
  detail::require_size(data, 2 * kRecursionWindow, "fit_tvc");
  TvcModel m;
  m.rho0 = tau_to_rho(std::clamp(kendall_tau(data), -detail::kTauMax, detail::kTauMax));
  const auto base = fit_const_model(CopulaFamily::StudentT, data);
  auto unpack = [&](const Eigen::VectorXd &x) {
    TvcParams p;
    p.rho_bar = std::tanh(x[0]);
    if (opts.dynamic) {
      std::tie(p.alpha, p.beta) = detail::simplex_weights(x[2], x[3]);
    }
    p.nu = detail::bounded_nu(x[1]);
    return p;
  };
  auto negll = [&](const Eigen::VectorXd &x) {
    const TvcParams p = unpack(x);
    // Without dynamics the burn-in carries rho_bar too, so the model is constant.
    return -detail::tvc_ll_scores(p, data, detail::t_scores(data, p.nu),
                                  opts.dynamic ? m.rho0 : p.rho_bar);
  };
  const double r0 = std::atanh(std::clamp(tau_to_rho(base.params.tau()), -0.999, 0.999));
  const double b0 = detail::unbounded_nu(base.params.nu());
  const std::array<std::pair<double, double>, 3> weight_starts{
      {{0.05, 0.90}, {0.20, 0.50}, {0.02, 0.10}}};
  MinimizeResult best;
  const int starts = opts.dynamic ? std::max(1, opts.restarts) : 1;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x(opts.dynamic ? 4 : 2);
    x[0] = r0;
    x[1] = b0;
    if (opts.dynamic) {
      const auto [wa, wb] = weight_starts[static_cast<std::size_t>(s) % weight_starts.size()];
      const auto [la, lb] = detail::simplex_logits(wa, wb);
      x[2] = la;
      x[3] = lb;
    }
    auto r = minimize_bfgs(negll, x);
    if (best.x.size() == 0 || r.value < best.value) {
      best = std::move(r);
    }
  }
  if (!std::isfinite(best.value)) {
    throw FitError("fit_tvc: optimizer found no finite likelihood");
  }
  m.params = unpack(best.x);
  m.params.validate();
  if (!opts.dynamic) {
    m.rho0 = m.params.rho_bar;
  }
  m.log_likelihood = -best.value;
  m.converged = best.converged;
  return m;
}

// ---------------------------------------------------------------------------
// DSJCC: SJC copula with logistic tail recursions
//   tau(t) = 0.01 + 0.98 L[omega + alpha eps_{t-1} + beta tau(t-1)],
// eps_{t-1} = mean |u - v| over the previous 10 pairs.

struct DsjccTail {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct DsjccParams {
  DsjccTail upper;
  DsjccTail lower;
};

struct TailPair {
  double upper = 0.5;
  double lower = 0.5;
};

inline double dsjcc_tail_recursion(const DsjccTail &p, double eps, double prev) {
  return 0.01 + 0.98 * logistic(p.omega + p.alpha * eps + p.beta * prev);
}

inline double window_abs_gap(std::span<const UnitPair> window) {
  double s = 0.0;
  for (const auto &p : window) {
    s += std::abs(p.u - p.v);
  }
  return s / static_cast<double>(window.size());
}

inline TailPair dsjcc_step(const DsjccParams &p, double prev_upper, double prev_lower,
                           std::span<const UnitPair> window) {
  if (window.size() != kRecursionWindow) {
    throw ShapeError("dsjcc_step needs a window of exactly 10 pairs");
  }
  const double eps = window_abs_gap(window);
  return {dsjcc_tail_recursion(p.upper, eps, prev_upper),
          dsjcc_tail_recursion(p.lower, eps, prev_lower)};
}

/// Tail pairs for t = 0..n; entry n is the one-step-ahead value.
inline std::vector<TailPair> dsjcc_path(const DsjccParams &p,
                                        std::span<const UnitPair> data, TailPair init) {
  std::vector<TailPair> out(data.size() + 1, init);
  for (std::size_t t = kRecursionWindow; t <= data.size(); ++t) {
    out[t] = dsjcc_step(p, out[t - 1].upper, out[t - 1].lower,
                        data.subspan(t - kRecursionWindow, kRecursionWindow));
  }
  return out;
}

inline double dsjcc_log_likelihood(const DsjccParams &p, std::span<const UnitPair> data,
                                   TailPair init) {
  const auto path = dsjcc_path(p, data, init);
  double total = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const detail::SymmetrizedJc sjc(path[t].upper, path[t].lower);
    const auto c = clamp_pair(data[t]);
    total += sjc.log_density(c.u, c.v);
  }
  return total;
}

struct DsjccModel {
  DsjccParams params;
  TailPair init;
  double log_likelihood = 0.0;
  bool converged = true;
};

/// Maximum-likelihood DSJCC fit; the initial tails are the constant SJC fit.
inline DsjccModel fit_dsjcc(std::span<const UnitPair> data,
                            const RecursionFitOptions &opts = {}) {
  detail::require_size(data, 2 * kRecursionWindow, "fit_dsjcc");
  DsjccModel m;
  const auto base = fit_const_model(CopulaFamily::SJC, data);
  m.init = {base.params.tau_upper(), base.params.tau_lower()};
  auto unpack = [&](const Eigen::VectorXd &x) {
    DsjccParams p;
    p.upper = {x[0], opts.dynamic ? x[1] : 0.0, opts.dynamic ? x[2] : 0.0};
    p.lower = {x[3], opts.dynamic ? x[4] : 0.0, opts.dynamic ? x[5] : 0.0};
    return p;
  };
  auto negll = [&](const Eigen::VectorXd &x) {
    return -dsjcc_log_likelihood(unpack(x), data, m.init);
  };
  const double ou = detail::logit_from_tail(m.init.upper);
  const double ol = detail::logit_from_tail(m.init.lower);
  const double eps_bar = window_abs_gap(data);
  // Starts keep the stationary point of each recursion at the constant fit.
  const std::array<std::pair<double, double>, 3> starts{{{0.0, 0.0}, {-1.0, 2.0}, {1.0, -1.0}}};
  MinimizeResult best;
  const int count = opts.dynamic ? std::max(1, opts.restarts) : 1;
  for (int s = 0; s < count; ++s) {
    const auto [a, b] = starts[static_cast<std::size_t>(s) % starts.size()];
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    x[0] = ou - a * eps_bar - b * m.init.upper;
    x[1] = a;
    x[2] = b;
    x[3] = ol - a * eps_bar - b * m.init.lower;
    x[4] = a;
    x[5] = b;
    auto r = minimize_bfgs(negll, x);
    if (best.x.size() == 0 || r.value < best.value) {
      best = std::move(r);
    }
  }
  if (!std::isfinite(best.value)) {
    throw FitError("fit_dsjcc: optimizer found no finite likelihood");
  }
  m.params = unpack(best.x);
  m.log_likelihood = -best.value;
  m.converged = best.converged;
  return m;
}

// ---------------------------------------------------------------------------
// Two-state hidden Markov Student t copula

struct HmmCopula {
  std::array<CopulaParams, 2> states{CopulaParams::student_t(0.0, 5.0),
                                     CopulaParams::student_t(0.0, 5.0)};
  Eigen::Matrix2d transition = Eigen::Matrix2d::Constant(0.5);
  std::array<double, 2> initial{0.5, 0.5};

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      const double row = transition.row(i).sum();
      if (std::abs(row - 1.0) > 1e-9 || (transition.row(i).array() < 0.0).any()) {
        throw DomainError("HMM transition rows must be probability vectors");
      }
    }
    if (std::abs(initial[0] + initial[1] - 1.0) > 1e-9 || initial[0] < 0.0 ||
        initial[1] < 0.0) {
      throw DomainError("HMM initial distribution must be a probability vector");
    }
    for (const auto &s : states) {
      validate_params(s);
    }
  }
};

struct HmmFilter {
  std::vector<std::array<double, 2>> filtered; // P(S_t | data up to t)
  double log_likelihood = 0.0;
};

namespace detail {

inline std::array<std::vector<double>, 2> hmm_log_densities(const HmmCopula &m,
                                                            std::span<const UnitPair> data) {
  std::array<std::vector<double>, 2> l;
  for (int s = 0; s < 2; ++s) {
    const auto &p = m.states[static_cast<std::size_t>(s)];
    const auto sc = t_scores(data, p.nu());
    const StudentConstants k(p.nu());
    const double rho = std::clamp(tau_to_rho(p.tau()), -kRhoMax, kRhoMax);
    l[static_cast<std::size_t>(s)].resize(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) {
      l[static_cast<std::size_t>(s)][t] = student_log_density(k, rho, sc.x[t], sc.y[t]);
    }
  }
  return l;
}

// Scaled forward pass on precomputed log-densities. `scale[t]` is the
// normalizer of step t (relative to exp(max log-density)).
inline HmmFilter hmm_forward(const HmmCopula &m,
                             const std::array<std::vector<double>, 2> &l,
                             std::vector<double> *scale = nullptr,
                             std::vector<double> *shift = nullptr) {
  const std::size_t n = l[0].size();
  HmmFilter f;
  f.filtered.resize(n);
  if (scale) {
    scale->resize(n);
  }
  if (shift) {
    shift->resize(n);
  }
  std::array<double, 2> prior = m.initial;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      const auto &prev = f.filtered[t - 1];
      prior = {prev[0] * m.transition(0, 0) + prev[1] * m.transition(1, 0),
               prev[0] * m.transition(0, 1) + prev[1] * m.transition(1, 1)};
    }
    const double mx = std::max(l[0][t], l[1][t]);
    const double a0 = prior[0] * std::exp(l[0][t] - mx);
    const double a1 = prior[1] * std::exp(l[1][t] - mx);
    const double c = a0 + a1;
    f.filtered[t] = {a0 / c, a1 / c};
    f.log_likelihood += std::log(c) + mx;
    if (scale) {
      (*scale)[t] = c;
    }
    if (shift) {
      (*shift)[t] = mx;
    }
  }
  return f;
}

} // namespace detail

/// Forward filter: state probabilities given observations up to each t.
inline HmmFilter hmm_filter(const HmmCopula &m, std::span<const UnitPair> data) {
  return detail::hmm_forward(m, detail::hmm_log_densities(m, data));
}

inline double hmm_log_likelihood(const HmmCopula &m, std::span<const UnitPair> data) {
  return hmm_filter(m, data).log_likelihood;
}

struct HmmOptions {
  int restarts = 5;
  int max_iterations = 500;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  bool tie_states = false; // both states share one copula
};

struct HmmFit {
  HmmCopula model;
  double log_likelihood = -INFINITY;
  std::vector<double> em_trace; // observed-data log-likelihood per iteration
  int iterations = 0;
  bool converged = false;
  int degenerate_restarts = 0;
};

namespace detail {

// One EM run from `m`. Returns false on state collapse.
inline bool hmm_em(HmmCopula m, std::span<const UnitPair> data, const HmmOptions &opts,
                   HmmFit &out) {
  const std::size_t n = data.size();
  std::vector<double> trace;
  int it = 0;
  bool converged = false;
  double prev_ll = -INFINITY;
  for (; it < opts.max_iterations; ++it) {
    const auto l = hmm_log_densities(m, data);
    std::vector<double> c;
    std::vector<double> mx;
    const auto f = hmm_forward(m, l, &c, &mx);
    trace.push_back(f.log_likelihood);
    if (!std::isfinite(f.log_likelihood)) {
      return false;
    }
    if (it > 0 && f.log_likelihood - prev_ll < opts.tolerance) {
      converged = true;
      break;
    }
    prev_ll = f.log_likelihood;

    // Backward pass with the forward scales.
    std::vector<std::array<double, 2>> beta(n, {1.0, 1.0});
    for (std::size_t t = n - 1; t-- > 0;) {
      const double e0 = std::exp(l[0][t + 1] - mx[t + 1]);
      const double e1 = std::exp(l[1][t + 1] - mx[t + 1]);
      for (int i = 0; i < 2; ++i) {
        beta[t][static_cast<std::size_t>(i)] =
            (m.transition(i, 0) * e0 * beta[t + 1][0] +
             m.transition(i, 1) * e1 * beta[t + 1][1]) /
            c[t + 1];
      }
    }
    std::array<std::vector<double>, 2> gamma{std::vector<double>(n), std::vector<double>(n)};
    Eigen::Matrix2d xi = Eigen::Matrix2d::Zero();
    for (std::size_t t = 0; t < n; ++t) {
      const double g0 = f.filtered[t][0] * beta[t][0];
      const double g1 = f.filtered[t][1] * beta[t][1];
      gamma[0][t] = g0 / (g0 + g1);
      gamma[1][t] = g1 / (g0 + g1);
      if (t + 1 < n) {
        const double e0 = std::exp(l[0][t + 1] - mx[t + 1]);
        const double e1 = std::exp(l[1][t + 1] - mx[t + 1]);
        const std::array<double, 2> e{e0, e1};
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            xi(i, j) += f.filtered[t][static_cast<std::size_t>(i)] * m.transition(i, j) *
                        e[static_cast<std::size_t>(j)] *
                        beta[t + 1][static_cast<std::size_t>(j)] / c[t + 1];
          }
        }
      }
    }
    // M-step.
    for (int i = 0; i < 2; ++i) {
      const double row = xi.row(i).sum();
      if (row > 0.0) {
        m.transition.row(i) = xi.row(i) / row;
      }
    }
    m.initial = {gamma[0][0], gamma[1][0]};
    if (opts.tie_states) {
      double ll = 0.0;
      const auto p = fit_student_profile(data, {}, ll);
      m.states = {p, p};
      continue;
    }
    for (std::size_t s = 0; s < 2; ++s) {
      double mass = 0.0;
      for (double g : gamma[s]) {
        mass += g;
      }
      if (mass < 1.0) {
        return false; // state collapse
      }
      const auto &w = gamma[s];
      auto negll = [&](const Eigen::VectorXd &x) {
        return -weighted_student_ll(data, w, bounded_tau(x[0]), bounded_nu(x[1]));
      };
      Eigen::VectorXd x0(2);
      x0 << unbounded_tau(m.states[s].tau()), unbounded_nu(m.states[s].nu());
      BfgsOptions bo;
      bo.max_iterations = 20;
      const auto r = minimize_bfgs(negll, x0, bo);
      // Generalized EM: keep the move only if it does not lower the objective.
      if (r.value <= negll(x0)) {
        m.states[s] = CopulaParams::student_t(bounded_tau(r.x[0]), bounded_nu(r.x[1]));
      }
    }
  }
  const double ll = trace.back();
  if (ll > out.log_likelihood) {
    out.model = m;
    out.log_likelihood = ll;
    out.em_trace = std::move(trace);
    out.iterations = it;
    out.converged = converged;
  }
  return true;
}

} // namespace detail

/// EM fit of the two-state HMM copula, best of `restarts` initializations.
inline HmmFit fit_hmm(std::span<const UnitPair> data, const HmmOptions &opts = {}) {
  detail::require_size(data, 50, "fit_hmm");
  HmmFit out;
  Rng rng(opts.seed);
  const double tau_hat = std::clamp(kendall_tau(data), -0.9, 0.9);
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    HmmCopula m;
    if (r == 0) {
      m.states = {CopulaParams::student_t(std::clamp(tau_hat - 0.2, -0.9, 0.9), 8.0),
                  CopulaParams::student_t(std::clamp(tau_hat + 0.2, -0.9, 0.9), 8.0)};
      m.transition << 0.95, 0.05, 0.05, 0.95;
    } else {
      const double t1 = -0.9 + 1.8 * rng.uniform();
      const double t2 = -0.9 + 1.8 * rng.uniform();
      const double nu1 = 1.5 + 20.0 * rng.uniform();
      const double nu2 = 1.5 + 20.0 * rng.uniform();
      m.states = {CopulaParams::student_t(t1, nu1), CopulaParams::student_t(t2, nu2)};
      const double p = 0.8 + 0.19 * rng.uniform();
      const double q = 0.8 + 0.19 * rng.uniform();
      m.transition << p, 1.0 - p, 1.0 - q, q;
    }
    if (opts.tie_states) {
      m.states[1] = m.states[0];
    }
    if (!detail::hmm_em(m, data, opts, out)) {
      ++out.degenerate_restarts;
    }
  }
  if (!std::isfinite(out.log_likelihood)) {
    throw FitError("fit_hmm: every restart collapsed to a single state");
  }
  out.model.validate();
  return out;
}

// ---------------------------------------------------------------------------
// One-step-ahead prediction

using BaselineModel = std::variant<ConstModel, TvcModel, DsjccModel, HmmCopula>;

/// Predictive log-density of `next` after observing `history` (the series
/// the model was fitted on).
inline double baseline_predict_logdensity(const BaselineModel &model,
                                          std::span<const UnitPair> history,
                                          UnitPair next) {
  const UnitPair x = clamp_pair(next);
  return std::visit(
      [&](const auto &m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstModel>) {
          return copula_log_density(m.params, x);
        } else if constexpr (std::is_same_v<T, TvcModel>) {
          const double rho = tvc_path(m.params, history, m.rho0).back();
          const double tau = rho_to_tau(std::clamp(rho, -detail::kRhoMax, detail::kRhoMax));
          return copula_log_density(CopulaParams::student_t(tau, m.params.nu), x);
        } else if constexpr (std::is_same_v<T, DsjccModel>) {
          const auto tails = dsjcc_path(m.params, history, m.init).back();
          return copula_log_density(CopulaParams::sjc(tails.upper, tails.lower), x);
        } else {
          std::array<double, 2> pred = m.initial;
          if (!history.empty()) {
            const auto f = hmm_filter(m, history).filtered.back();
            pred = {f[0] * m.transition(0, 0) + f[1] * m.transition(1, 0),
                    f[0] * m.transition(0, 1) + f[1] * m.transition(1, 1)};
          }
          return detail::log_sum_exp(std::log(pred[0]) + copula_log_density(m.states[0], x),
                                     std::log(pred[1]) + copula_log_density(m.states[1], x));
        }
      },
      model);
}

} // namespace gpcc

#endif // GPCC_BASELINES_HPP_
