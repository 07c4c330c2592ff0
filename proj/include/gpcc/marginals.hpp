#ifndef GPCC_MARGINALS_HPP_
#define GPCC_MARGINALS_HPP_

// Univariate conditional cdfs for the probability integral transform:
// AR(1) mean, GJR-GARCH(1,1) variance, smoothed empirical innovation cdf.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gpcc/errors.hpp"
#include "gpcc/optimize.hpp"
#include "gpcc/random.hpp"
#include "gpcc/special.hpp"
#include "gpcc/stats.hpp"
#include "gpcc/timeseries.hpp"

namespace gpcc {

inline constexpr double kPitClamp = 1e-6;

//   x_t = c + phi x_{t-1} + e_t,  e_t = sqrt(h_t) z_t
//   h_t = omega + (alpha + gamma [e_{t-1} < 0]) e_{t-1}^2 + beta h_{t-1}
struct GarchParams {
  double c = 0.0;
  double phi = 0.0;
  double omega = 0.05;
  double alpha = 0.05;
  double beta = 0.85;
  double gamma = 0.05;

  double persistence() const { return alpha + beta + 0.5 * gamma; }

  void validate() const {
    if (!(omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 &&
          persistence() < 1.0 && std::abs(phi) < 1.0 && std::isfinite(c))) {
      throw DomainError("GARCH parameters violate positivity or stationarity");
    }
  }
};

/// Gaussian-kernel smoothed empirical cdf, bandwidth by Silverman's rule.
class KernelCdf {
public:
  KernelCdf() = default;
  explicit KernelCdf(std::vector<double> sample) : sample_(std::move(sample)) {
    if (sample_.size() < 2) {
      throw ShapeError("KernelCdf: need at least two points");
    }
    std::vector<double> sorted = sample_;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
      const double pos = p * static_cast<double>(sorted.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(i);
      return i + 1 < sorted.size() ? sorted[i] * (1.0 - f) + sorted[i + 1] * f : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double sd = sd_of(sample_);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    bandwidth_ = 0.9 * spread * std::pow(static_cast<double>(sample_.size()), -0.2);
    if (!(bandwidth_ > 0.0)) {
      throw NumericError("KernelCdf: degenerate sample");
    }
  }

  double operator()(double x) const {
    double total = 0.0;
    for (double s : sample_) {
      total += normal_cdf((x - s) / bandwidth_);
    }
    return total / static_cast<double>(sample_.size());
  }

  double bandwidth() const { return bandwidth_; }
  const std::vector<double> &sample() const { return sample_; }

private:
  std::vector<double> sample_;
  double bandwidth_ = 0.0;
};

/// Fitted marginal model. Parameters act on the window standardized by
/// (center, scale), which makes the fit invariant to affine rescaling.
struct GarchModel {
  GarchParams params; // standardized units
  double center = 0.0;
  double scale = 1.0;
  KernelCdf innovations;
  double log_likelihood = 0.0;
  bool converged = false;
  bool near_unit_root = false;

  /// Parameters in the units of the input returns.
  GarchParams original_units() const {
    GarchParams p = params;
    p.c = center * (1.0 - params.phi) + scale * params.c;
    p.omega = scale * scale * params.omega;
    return p;
  }
};

struct GarchFilter {
  std::vector<double> residuals;   // e_t for t = 1..n-1
  std::vector<double> variances;   // h_t for t = 1..n-1
  double next_mean = 0.0;
  double next_variance = 0.0;
  double log_likelihood = 0.0; // Gaussian quasi log-likelihood, constants dropped
};

namespace detail {

// Runs the recursion over y (already standardized); h_1 is the mean squared
// residual so the start does not depend on unknown pre-sample values.
inline GarchFilter garch_filter_std(const GarchParams &p, std::span<const double> y) {
  GarchFilter f;
  const std::size_t n = y.size();
  f.residuals.resize(n - 1);
  f.variances.resize(n - 1);
  double ss = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    f.residuals[t - 1] = y[t] - p.c - p.phi * y[t - 1];
    ss += f.residuals[t - 1] * f.residuals[t - 1];
  }
  double h = ss / static_cast<double>(n - 1);
  double ll = 0.0;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    if (t > 0) {
      const double e = f.residuals[t - 1];
      h = p.omega + (p.alpha + (e < 0.0 ? p.gamma : 0.0)) * e * e + p.beta * h;
    }
    f.variances[t] = h;
    const double e = f.residuals[t];
    ll += -0.5 * (std::log(h) + e * e / h);
  }
  const double e = f.residuals.back();
  f.next_mean = p.c + p.phi * y.back();
  f.next_variance = p.omega + (p.alpha + (e < 0.0 ? p.gamma : 0.0)) * e * e + p.beta * h;
  f.log_likelihood = ll;
  return f;
}

inline GarchParams garch_unpack(const Eigen::VectorXd &x) {
  GarchParams p;
  p.c = x[0];
  p.phi = 0.99 * std::tanh(x[1]);
  p.omega = std::exp(std::clamp(x[2], -30.0, 10.0));
  const double m = std::max({x[3], x[4], x[5], 0.0});
  const double ea = std::exp(x[3] - m);
  const double eb = std::exp(x[4] - m);
  const double eg = std::exp(x[5] - m);
  const double z = ea + eb + eg + std::exp(-m);
  p.alpha = ea / z;
  p.beta = eb / z;
  p.gamma = 2.0 * eg / z;
  return p;
}

inline Eigen::VectorXd garch_pack(const GarchParams &p) {
  Eigen::VectorXd x(6);
  const double rest = std::max(1.0 - p.persistence(), 1e-9);
  x << p.c, std::atanh(std::clamp(p.phi / 0.99, -0.999999, 0.999999)),
      std::log(std::max(p.omega, 1e-300)), std::log(std::max(p.alpha, 1e-9) / rest),
      std::log(std::max(p.beta, 1e-9) / rest), std::log(std::max(0.5 * p.gamma, 1e-9) / rest);
  return x;
}

inline std::vector<double> standardize(std::span<const double> x, double center,
                                       double scale) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = (x[i] - center) / scale;
  }
  return y;
}

} // namespace detail

inline GarchFilter garch_filter(const GarchModel &m, std::span<const double> history) {
  if (history.size() < 2) {
    throw ShapeError("garch_filter: need at least two observations");
  }
  return detail::garch_filter_std(m.params, detail::standardize(history, m.center, m.scale));
}

struct GarchFitOptions {
  std::size_t min_length = 250;
  // Extra start, e.g. the previous refit in a rolling sequence.
  std::optional<GarchParams> warm_start;
  BfgsOptions bfgs{.max_iterations = 300};
};

/// Gaussian quasi-MLE of AR(1) + GJR-GARCH(1,1).
///
/// Two default starts, low and high persistence. Without ARCH effects the
/// likelihood is flat along omega = (1 - beta) var; a small penalty on beta
/// selects the memoryless end of that ridge.
inline GarchModel fit_garch(std::span<const double> window, const GarchFitOptions &opts = {}) {
  if (window.size() < opts.min_length) {
    throw ShapeError("fit_garch: window shorter than " + std::to_string(opts.min_length));
  }
  for (double v : window) {
    if (!std::isfinite(v)) {
      throw DomainError("fit_garch: non-finite return");
    }
  }
  GarchModel m;
  m.center = mean_of(window);
  m.scale = sd_of(window);
  if (!(m.scale > 1e-12 * std::max(1.0, std::abs(m.center)))) {
    throw FitError("fit_garch: zero-variance window");
  }
  const auto y = detail::standardize(window, m.center, m.scale);
  // The 0.5 beta^2 term picks beta = 0 on the flat ridge and moves an
  // identified beta by O(1/n).
  auto negll = [&](const Eigen::VectorXd &x) {
    const auto p = detail::garch_unpack(x);
    return -detail::garch_filter_std(p, y).log_likelihood + 0.5 * p.beta * p.beta;
  };
  std::vector<GarchParams> starts;
  if (opts.warm_start) {
    starts.push_back(*opts.warm_start);
  } else {
    starts.push_back({0.0, 0.0, 0.8, 0.05, 0.10, 0.04});
    starts.push_back({0.0, 0.0, 0.05, 0.05, 0.85, 0.06});
  }
  MinimizeResult best;
  for (const auto &s : starts) {
    auto r = minimize_bfgs(negll, detail::garch_pack(s), opts.bfgs);
    if (!std::isfinite(r.value)) {
      continue;
    }
    if (best.x.size() == 0 || r.value < best.value) {
      best = std::move(r);
    }
  }
  if (best.x.size() == 0) {
    throw FitError("fit_garch: no finite quasi-likelihood");
  }
  m.params = detail::garch_unpack(best.x);
  m.converged = best.converged;
  m.near_unit_root = m.params.persistence() > 0.999;
  const auto f = detail::garch_filter_std(m.params, y);
  m.log_likelihood = f.log_likelihood;
  std::vector<double> z(f.residuals.size());
  for (std::size_t t = 0; t < z.size(); ++t) {
    z[t] = f.residuals[t] / std::sqrt(f.variances[t]);
  }
  m.innovations = KernelCdf(std::move(z));
  return m;
}

/// u = F(standardized one-step residual of `next`), clamped to
/// [1e-6, 1 - 1e-6]. `history` ends just before `next`.
inline double pit_next(const GarchModel &m, std::span<const double> history, double next) {
  const auto f = garch_filter(m, history);
  const double z = ((next - m.center) / m.scale - f.next_mean) / std::sqrt(f.next_variance);
  return std::clamp(m.innovations(z), kPitClamp, 1.0 - kPitClamp);
}

/// Simulates the process in original units with the given standard
/// innovations; the first value starts at the stationary mean.
inline std::vector<double> simulate_garch(const GarchParams &p,
                                          std::span<const double> innovations) {
  p.validate();
  std::vector<double> x(innovations.size());
  const double mean = p.c / (1.0 - p.phi);
  double h = p.omega / (1.0 - p.persistence());
  double prev_x = mean;
  double prev_e = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t > 0) {
      h = p.omega + (p.alpha + (prev_e < 0.0 ? p.gamma : 0.0)) * prev_e * prev_e + p.beta * h;
    }
    const double e = std::sqrt(h) * innovations[t];
    x[t] = p.c + p.phi * prev_x + e;
    prev_x = x[t];
    prev_e = e;
  }
  return x;
}

inline std::vector<double> simulate_garch(const GarchParams &p, std::size_t n,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> z(n);
  for (auto &v : z) {
    v = rng.normal();
  }
  return simulate_garch(p, z);
}

// ---------------------------------------------------------------------------
// Predictor interface and rolling PIT

/// Any one-step-ahead univariate cdf predictor.
class CdfPredictor {
public:
  virtual ~CdfPredictor() = default;
  virtual void fit(std::span<const double> window) = 0;
  /// Predictive cdf of `next` given the window that precedes it.
  virtual double predict_cdf(std::span<const double> window, double next) const = 0;
};

class GarchPredictor : public CdfPredictor {
public:
  explicit GarchPredictor(GarchFitOptions opts = {}) : opts_(std::move(opts)) {}

  // Refits warm-start from the previous solution.
  void fit(std::span<const double> window) override {
    GarchFitOptions o = opts_;
    if (model_) {
      o.warm_start = model_->params;
    }
    model_ = fit_garch(window, o);
  }

  double predict_cdf(std::span<const double> window, double next) const override {
    if (!model_) {
      throw Error("GarchPredictor: predict before fit");
    }
    return pit_next(*model_, window, next);
  }

  const std::optional<GarchModel> &model() const { return model_; }

private:
  GarchFitOptions opts_;
  std::optional<GarchModel> model_;
};

using PredictorFactory = std::function<std::unique_ptr<CdfPredictor>()>;

inline PredictorFactory garch_factory(GarchFitOptions opts = {}) {
  return [opts] { return std::make_unique<GarchPredictor>(opts); };
}

struct RollingPitOptions {
  std::size_t n_w = 2016;
  std::size_t refit_every = 1;
  unsigned threads = 1; // 2 runs the two margins concurrently
};

struct RollingPitResult {
  PseudoSeries series;
  std::array<std::size_t, 2> refit_failures{0, 0};
};

namespace detail {

// Returns the PIT values for steps n_w..n-1; failed refits keep the previous
// model (the first fit must succeed).
inline std::vector<double> rolling_margin(std::span<const double> x,
                                          const RollingPitOptions &opts,
                                          const PredictorFactory &factory,
                                          std::size_t &failures) {
  auto pred = factory();
  std::vector<double> u;
  u.reserve(x.size() - opts.n_w);
  for (std::size_t t = opts.n_w; t < x.size(); ++t) {
    const auto window = x.subspan(t - opts.n_w, opts.n_w);
    if ((t - opts.n_w) % opts.refit_every == 0) {
      try {
        pred->fit(window);
      } catch (const FitError &) {
        if (t == opts.n_w) {
          throw;
        }
        ++failures;
      }
    }
    u.push_back(std::clamp(pred->predict_cdf(window, x[t]), kPitClamp, 1.0 - kPitClamp));
  }
  return u;
}

} // namespace detail

/// Rolling-window PIT of two aligned series: one pseudo-pair per date after
/// the first n_w.
inline RollingPitResult rolling_pit(const ReturnSeries &x, const ReturnSeries &y,
                                    const RollingPitOptions &opts = {},
                                    const PredictorFactory &factory = garch_factory()) {
  x.validate();
  y.validate();
  require_aligned(x, y);
  if (opts.refit_every == 0) {
    throw DomainError("rolling_pit: refit_every must be positive");
  }
  if (x.size() <= opts.n_w) {
    throw ShapeError("rolling_pit: series length must exceed n_W");
  }
  RollingPitResult r;
  std::vector<double> u;
  std::vector<double> v;
  if (opts.threads > 1) {
    auto fu = std::async(std::launch::async, [&] {
      return detail::rolling_margin(x.values, opts, factory, r.refit_failures[0]);
    });
    v = detail::rolling_margin(y.values, opts, factory, r.refit_failures[1]);
    u = fu.get();
  } else {
    u = detail::rolling_margin(x.values, opts, factory, r.refit_failures[0]);
    v = detail::rolling_margin(y.values, opts, factory, r.refit_failures[1]);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    r.series.dates.push_back(x.dates[opts.n_w + i]);
    r.series.pairs.push_back({u[i], v[i]});
  }
  return r;
}

} // namespace gpcc

#endif // GPCC_MARGINALS_HPP_
