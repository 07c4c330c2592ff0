#ifndef GPCC_EVAL_HPP_
#define GPCC_EVAL_HPP_

// Synthetic series, the rolling one-step-ahead protocol and method
// comparison reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gpcc/baselines.hpp"
#include "gpcc/csv.hpp"
#include "gpcc/ep.hpp"
#include "gpcc/stats.hpp"
#include "gpcc/timeseries.hpp"

namespace gpcc {

// ---------------------------------------------------------------------------
// Synthetic data

/// Parameter functions of time used for the synthetic benchmarks.
inline CopulaParams synthetic_params(CopulaFamily family, double t) {
  constexpr double pi = std::numbers::pi;
  const double tau = 0.3 + 0.2 * std::cos(t * pi / 125.0);
  switch (family) {
  case CopulaFamily::Gaussian:
    return CopulaParams::gaussian(tau);
  case CopulaFamily::StudentT:
    return CopulaParams::student_t(tau, 1.0 + 2.0 * (1.0 + std::cos(t * pi / 250.0)));
  case CopulaFamily::SJC:
    return CopulaParams::sjc(0.1 + 0.3 * (1.0 + std::cos(t * pi / 125.0)),
                             0.1 + 0.3 * (1.0 + std::cos(t * pi / 125.0 + pi / 2.0)));
  }
  return {};
}

struct SyntheticData {
  CopulaFamily family = CopulaFamily::Gaussian;
  PseudoSeries series;
  std::vector<CopulaParams> truth; // one per t
};

/// One draw per t from the copula at that t's parameters.
inline SyntheticData gen_synthetic(CopulaFamily family, std::size_t length,
                                   std::uint64_t seed) {
  if (length < 2) {
    throw DomainError("gen_synthetic: length must be at least 2");
  }
  SyntheticData d;
  d.family = family;
  Rng rng(seed);
  for (std::size_t t = 0; t < length; ++t) {
    const auto p = synthetic_params(family, static_cast<double>(t));
    CopulaParams draw = p;
    if (family == CopulaFamily::StudentT) {
      // nu(t) touches 1 at t = 250 mod 500; the sampler needs nu > 1.
      draw.values[1] = std::max(draw.values[1], 1.0 + 1e-9);
    }
    d.truth.push_back(p);
    d.series.pairs.push_back(sample_pair(draw, rng));
  }
  return d;
}

// ---------------------------------------------------------------------------
// GP conditional copula fit

struct GpccSettings {
  std::size_t pseudo_inputs = 30;
  std::size_t mc_draws = 1000;
  double lambda = 50.0; // starting hyperparameters for the evidence search
  double beta = 0.5;
  double gamma = 0.01;
  EpOptions ep{};
};

/// Priors whose mean constants put sigma_i(mean) at the constant-copula MLE
/// of the window.
inline std::vector<GpPrior> initial_priors(CopulaFamily family,
                                           std::span<const UnitPair> window,
                                           const Inputs &inputs,
                                           const GpccSettings &s) {
  const auto mle = fit_const(family, window);
  std::vector<GpPrior> priors;
  for (std::size_t i = 0; i < parameter_count(family); ++i) {
    GpPrior p;
    p.mean_const = std::clamp(transform_for(family, i).inverse(mle.values[i]), -6.0, 6.0);
    p.hyper.lambda = Eigen::VectorXd::Constant(inputs.cols(), s.lambda);
    p.hyper.beta = s.beta;
    p.hyper.gamma = s.gamma;
    p.pseudo_inputs = evenly_spaced_pseudo_inputs(inputs, s.pseudo_inputs);
    priors.push_back(std::move(p));
  }
  return priors;
}

/// Same hyperparameters and mean constants on new inputs.
inline std::vector<GpPrior> rebase_priors(std::vector<GpPrior> priors, const Inputs &inputs,
                                          const GpccSettings &s) {
  for (auto &p : priors) {
    p.pseudo_inputs = evenly_spaced_pseudo_inputs(inputs, s.pseudo_inputs);
  }
  return priors;
}

/// Time inputs of a window of n points, mapped to [0, 1].
inline Inputs window_inputs(std::size_t n) { return normalized_time_inputs(n); }

/// Input of the point right after a window of n points.
inline Eigen::RowVectorXd next_input(std::size_t n) {
  Eigen::RowVectorXd q(1);
  q << static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
  return q;
}

/// EP fit on a window. With `priors` empty the hyperparameters are learned
/// from MLE-initialized priors; otherwise they are used as given.
inline EpState fit_gpcc(CopulaFamily family, std::span<const UnitPair> window,
                        const GpccSettings &s, const std::vector<GpPrior> &priors = {}) {
  const Inputs z = window_inputs(window.size());
  EpOptions o = s.ep;
  if (priors.empty()) {
    o.optimize_hyper = true;
    return alternate_ep(window, z, family, initial_priors(family, window, z, s), o);
  }
  o.optimize_hyper = false;
  return alternate_ep(window, z, family, rebase_priors(priors, z, s), o);
}

// ---------------------------------------------------------------------------
// Methods

/// A forecasting method in the rolling protocol. `prepare` runs once per
/// anchor (refit time) for methods that use anchors; `log_predictive` must be
/// safe to call concurrently once its anchor is prepared.
class EvalMethod {
public:
  virtual ~EvalMethod() = default;
  virtual std::string name() const = 0;
  virtual bool uses_anchors() const { return false; }
  virtual void prepare(std::span<const UnitPair> /*window*/, std::size_t /*anchor*/) {}
  virtual double log_predictive(std::span<const UnitPair> window, std::size_t t,
                                std::size_t anchor, UnitPair next,
                                std::uint64_t seed) const = 0;
};

class ConstMethod : public EvalMethod {
public:
  explicit ConstMethod(CopulaFamily f) : family_(f) {}
  std::string name() const override {
    switch (family_) {
    case CopulaFamily::Gaussian:
      return "CONST-G";
    case CopulaFamily::StudentT:
      return "CONST-T";
    case CopulaFamily::SJC:
      return "CONST-SJC";
    }
    return {};
  }
  double log_predictive(std::span<const UnitPair> window, std::size_t, std::size_t,
                        UnitPair next, std::uint64_t) const override {
    return baseline_predict_logdensity(fit_const_model(family_, window), window, next);
  }

private:
  CopulaFamily family_;
};

class TvcMethod : public EvalMethod {
public:
  std::string name() const override { return "TVC"; }
  double log_predictive(std::span<const UnitPair> window, std::size_t, std::size_t,
                        UnitPair next, std::uint64_t) const override {
    return baseline_predict_logdensity(fit_tvc(window), window, next);
  }
};

class DsjccMethod : public EvalMethod {
public:
  std::string name() const override { return "DSJCC"; }
  double log_predictive(std::span<const UnitPair> window, std::size_t, std::size_t,
                        UnitPair next, std::uint64_t) const override {
    return baseline_predict_logdensity(fit_dsjcc(window), window, next);
  }
};

class HmmMethod : public EvalMethod {
public:
  std::string name() const override { return "HMM"; }
  double log_predictive(std::span<const UnitPair> window, std::size_t, std::size_t,
                        UnitPair next, std::uint64_t seed) const override {
    HmmOptions o;
    o.seed = seed;
    return baseline_predict_logdensity(fit_hmm(window, o).model, window, next);
  }
};

/// GP conditional copula. Hyperparameters are learned at each anchor; every
/// step reruns EP on its own window with the anchor's hyperparameters.
class GpccMethod : public EvalMethod {
public:
  GpccMethod(CopulaFamily f, GpccSettings s) : family_(f), settings_(std::move(s)) {}

  std::string name() const override {
    switch (family_) {
    case CopulaFamily::Gaussian:
      return "GPCC-G";
    case CopulaFamily::StudentT:
      return "GPCC-T";
    case CopulaFamily::SJC:
      return "GPCC-SJC";
    }
    return {};
  }

  bool uses_anchors() const override { return true; }

  void prepare(std::span<const UnitPair> window, std::size_t anchor) override {
    auto state = std::make_shared<const EpState>(fit_gpcc(family_, window, settings_));
    std::lock_guard lock(mutex_);
    anchors_[anchor] = std::move(state);
  }

  double log_predictive(std::span<const UnitPair> window, std::size_t t, std::size_t anchor,
                        UnitPair next, std::uint64_t seed) const override {
    std::shared_ptr<const EpState> fitted;
    {
      std::lock_guard lock(mutex_);
      const auto it = anchors_.find(anchor);
      if (it == anchors_.end() || !it->second) {
        throw FitError(name() + ": anchor fit unavailable");
      }
      fitted = it->second;
    }
    const EpState *state = fitted.get();
    EpState refreshed;
    if (t != anchor) {
      std::vector<GpPrior> priors;
      for (const auto &l : fitted->latents) {
        priors.push_back(l.prior);
      }
      refreshed = fit_gpcc(family_, window, settings_, priors);
      state = &refreshed;
    }
    const auto est = predict_density(*state, next_input(window.size()), next,
                                     settings_.mc_draws, seed);
    if (!(est.value > 0.0) || !std::isfinite(est.value)) {
      throw NumericError(name() + ": non-positive predictive density");
    }
    return std::log(est.value);
  }

  /// Learned state at an anchor, if prepared.
  std::shared_ptr<const EpState> anchor_state(std::size_t anchor) const {
    std::lock_guard lock(mutex_);
    const auto it = anchors_.find(anchor);
    return it == anchors_.end() ? nullptr : it->second;
  }

private:
  CopulaFamily family_;
  GpccSettings settings_;
  mutable std::mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const EpState>> anchors_;
};

inline const std::vector<std::string> &known_method_names() {
  static const std::vector<std::string> names{"GPCC-G", "GPCC-T", "GPCC-SJC", "HMM",
                                              "TVC",    "DSJCC",  "CONST-G",  "CONST-T",
                                              "CONST-SJC"};
  return names;
}

inline std::unique_ptr<EvalMethod> make_method(const std::string &name,
                                               const GpccSettings &gp = {}) {
  if (name == "GPCC-G") {
    return std::make_unique<GpccMethod>(CopulaFamily::Gaussian, gp);
  }
  if (name == "GPCC-T") {
    return std::make_unique<GpccMethod>(CopulaFamily::StudentT, gp);
  }
  if (name == "GPCC-SJC") {
    return std::make_unique<GpccMethod>(CopulaFamily::SJC, gp);
  }
  if (name == "HMM") {
    return std::make_unique<HmmMethod>();
  }
  if (name == "TVC") {
    return std::make_unique<TvcMethod>();
  }
  if (name == "DSJCC") {
    return std::make_unique<DsjccMethod>();
  }
  if (name == "CONST-G") {
    return std::make_unique<ConstMethod>(CopulaFamily::Gaussian);
  }
  if (name == "CONST-T") {
    return std::make_unique<ConstMethod>(CopulaFamily::StudentT);
  }
  if (name == "CONST-SJC") {
    return std::make_unique<ConstMethod>(CopulaFamily::SJC);
  }
  throw DomainError("unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------
// Rolling evaluation

struct RollingConfig {
  std::size_t n_w = 500;
  std::size_t stride = 10;
  // Hyperparameter refits every refit_every evaluation steps, i.e. on the
  // absolute time grid n_w + k * refit_every * stride unless refit_period
  // (in time steps) overrides it.
  std::size_t refit_every = 25;
  std::size_t refit_period = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  std::size_t resolved_refit_period() const {
    return refit_period > 0 ? refit_period : refit_every * stride;
  }

  void validate() const {
    if (n_w < 50) {
      throw DomainError("n_W must be at least 50");
    }
    if (stride < 1 || refit_every < 1) {
      throw DomainError("stride and refit_every must be positive");
    }
    if (threads < 1) {
      throw DomainError("threads must be positive");
    }
  }
};

struct EvalReport {
  std::vector<std::string> methods;
  std::vector<std::size_t> steps; // index t of the predicted point
  std::vector<Date> dates;        // empty for undated series
  std::vector<std::vector<double>> values; // [method][step]; NaN = missing
  std::vector<std::string> first_error;    // per method, empty if none

  // Derived by summarize().
  std::vector<double> averages;
  std::vector<double> std_errors;
  std::vector<std::size_t> evaluated;
  std::vector<std::size_t> missing;
  std::vector<std::vector<TTestResult>> pairwise;
  std::size_t best = 0;
  bool best_tied = false;
  std::vector<bool> not_significant_vs_best;
};

/// Recomputes averages, pairwise tests and markers from the stored values.
inline void summarize(EvalReport &r, double alpha = 0.05) {
  const std::size_t m = r.methods.size();
  r.averages.assign(m, std::numeric_limits<double>::quiet_NaN());
  r.std_errors.assign(m, std::numeric_limits<double>::quiet_NaN());
  r.evaluated.assign(m, 0);
  r.missing.assign(m, 0);
  r.first_error.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> ok;
    for (double v : r.values[i]) {
      if (std::isnan(v)) {
        ++r.missing[i];
      } else {
        ok.push_back(v);
      }
    }
    r.evaluated[i] = ok.size();
    if (!ok.empty()) {
      r.averages[i] = mean_of(ok);
      if (ok.size() > 1) {
        r.std_errors[i] = sd_of(ok) / std::sqrt(static_cast<double>(ok.size()));
      }
    }
  }
  r.pairwise.assign(m, std::vector<TTestResult>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      std::vector<double> a;
      std::vector<double> b;
      for (std::size_t s = 0; s < r.steps.size(); ++s) {
        if (!std::isnan(r.values[i][s]) && !std::isnan(r.values[j][s])) {
          a.push_back(r.values[i][s]);
          b.push_back(r.values[j][s]);
        }
      }
      TTestResult t;
      if (a.size() >= 2) {
        t = paired_ttest(a, b, alpha);
      } else {
        t.degenerate = true;
      }
      r.pairwise[i][j] = t;
      t.t_statistic = -t.t_statistic;
      r.pairwise[j][i] = t;
    }
  }
  r.best = 0;
  r.best_tied = false;
  bool found = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::isnan(r.averages[i])) {
      continue;
    }
    if (!found || r.averages[i] > r.averages[r.best]) {
      r.best = i;
      found = true;
    }
  }
  for (std::size_t i = 0; i < m && found; ++i) {
    if (i != r.best && r.averages[i] == r.averages[r.best]) {
      r.best_tied = true;
    }
  }
  r.not_significant_vs_best.assign(m, false);
  for (std::size_t i = 0; i < m && found; ++i) {
    if (i != r.best) {
      r.not_significant_vs_best[i] = !r.pairwise[i][r.best].significant;
    }
  }
}

namespace detail {

// Runs task(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)> &task) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        task(i);
      }
    });
  }
  for (auto &th : pool) {
    th.join();
  }
}

} // namespace detail

/// Evaluation step indices for a series of length n.
inline std::vector<std::size_t> evaluation_steps(std::size_t n, const RollingConfig &cfg) {
  std::vector<std::size_t> steps;
  for (std::size_t t = cfg.n_w; t < n; t += cfg.stride) {
    steps.push_back(t);
  }
  return steps;
}

inline std::size_t anchor_of(std::size_t t, const RollingConfig &cfg) {
  const std::size_t period = cfg.resolved_refit_period();
  return cfg.n_w + (t - cfg.n_w) / period * period;
}

/// One-step-ahead log predictive densities of every method at every step.
/// A method error at a step is stored as NaN; the step is then dropped from
/// that method's average and from its pairwise tests.
inline EvalReport rolling_eval(const std::vector<EvalMethod *> &methods,
                               const PseudoSeries &series, const RollingConfig &cfg) {
  cfg.validate();
  if (series.size() <= cfg.n_w) {
    throw ShapeError("rolling_eval: series length must exceed n_W");
  }
  EvalReport r;
  r.steps = evaluation_steps(series.size(), cfg);
  for (auto *m : methods) {
    r.methods.push_back(m->name());
  }
  if (!series.dates.empty()) {
    for (auto t : r.steps) {
      r.dates.push_back(series.dates[t]);
    }
  }
  const std::span<const UnitPair> data(series.pairs);
  auto window_at = [&](std::size_t t) { return data.subspan(t - cfg.n_w, cfg.n_w); };
  const std::size_t nm = methods.size();
  const std::size_t ns = r.steps.size();
  r.values.assign(nm, std::vector<double>(ns, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<std::string>> errors(nm, std::vector<std::string>(ns));

  // Anchor fits.
  std::vector<std::size_t> anchors;
  for (auto t : r.steps) {
    const auto a = anchor_of(t, cfg);
    if (anchors.empty() || anchors.back() != a) {
      anchors.push_back(a);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> prep; // (method, anchor index)
  for (std::size_t m = 0; m < nm; ++m) {
    if (methods[m]->uses_anchors()) {
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        prep.emplace_back(m, a);
      }
    }
  }
  std::vector<std::string> prep_errors(prep.size());
  detail::parallel_for(prep.size(), cfg.threads, [&](std::size_t i) {
    const auto [m, a] = prep[i];
    try {
      methods[m]->prepare(window_at(anchors[a]), anchors[a]);
    } catch (const std::exception &e) {
      prep_errors[i] = e.what();
    }
  });

  detail::parallel_for(nm * ns, cfg.threads, [&](std::size_t i) {
    const std::size_t m = i / ns;
    const std::size_t s = i % ns;
    const std::size_t t = r.steps[s];
    try {
      const double v = methods[m]->log_predictive(window_at(t), t, anchor_of(t, cfg),
                                                  data[t], mix_seed(cfg.seed, t));
      if (!std::isfinite(v)) {
        throw NumericError("non-finite log predictive density");
      }
      r.values[m][s] = v;
    } catch (const std::exception &e) {
      errors[m][s] = e.what();
    }
  });

  r.first_error.assign(nm, "");
  for (std::size_t i = 0; i < prep.size(); ++i) {
    auto &slot = r.first_error[prep[i].first];
    if (slot.empty() && !prep_errors[i].empty()) {
      slot = "anchor t=" + std::to_string(anchors[prep[i].second]) + ": " + prep_errors[i];
    }
  }
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t s = 0; s < ns && r.first_error[m].empty(); ++s) {
      if (!errors[m][s].empty()) {
        r.first_error[m] = "t=" + std::to_string(r.steps[s]) + ": " + errors[m][s];
      }
    }
  }
  summarize(r);
  return r;
}

inline EvalReport rolling_eval(const std::vector<std::unique_ptr<EvalMethod>> &methods,
                               const PseudoSeries &series, const RollingConfig &cfg) {
  std::vector<EvalMethod *> raw;
  for (const auto &m : methods) {
    raw.push_back(m.get());
  }
  return rolling_eval(raw, series, cfg);
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Text, Csv };

/// Summary table. Text marks the best method with '*' (ties flagged '*=')
/// and methods not significantly worse than the best with '~'.
inline std::string render_report(const EvalReport &r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    write_csv_row(out, {"method", "average", "std_error", "evaluated", "missing", "best",
                        "tied", "not_significant_vs_best", "p_value_vs_best"});
    for (std::size_t i = 0; i < r.methods.size(); ++i) {
      const bool best = i == r.best;
      write_csv_row(out, {r.methods[i], format_number(r.averages[i]),
                          format_number(r.std_errors[i]), std::to_string(r.evaluated[i]),
                          std::to_string(r.missing[i]), best ? "1" : "0",
                          best && r.best_tied ? "1" : "0",
                          r.not_significant_vs_best[i] ? "1" : "0",
                          best ? "" : format_number(r.pairwise[i][r.best].p_value)});
    }
    return out.str();
  }
  std::size_t width = 6;
  for (const auto &m : r.methods) {
    width = std::max(width, m.size());
  }
  out << std::left << std::setw(static_cast<int>(width) + 2) << "method" << std::right
      << std::setw(12) << "avg loglik" << std::setw(10) << "std err" << std::setw(8) << "n"
      << std::setw(9) << "missing" << "  mark\n";
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    std::string mark;
    if (i == r.best) {
      mark = r.best_tied ? "*=" : "*";
    } else if (r.not_significant_vs_best[i]) {
      mark = "~";
    }
    out << std::left << std::setw(static_cast<int>(width) + 2) << r.methods[i] << std::right
        << std::fixed << std::setprecision(4) << std::setw(12) << r.averages[i]
        << std::setw(10) << r.std_errors[i] << std::setw(8) << r.evaluated[i]
        << std::setw(9) << r.missing[i] << "  " << mark << '\n';
  }
  out << "* best average; ~ not significantly different from the best (paired t, 0.05)\n";
  return out.str();
}

/// Per-step dump: t (and date), then one column per method; missing = empty.
inline std::string render_steps_csv(const EvalReport &r) {
  std::ostringstream out;
  std::vector<std::string> header{"t"};
  if (!r.dates.empty()) {
    header.push_back("date");
  }
  header.insert(header.end(), r.methods.begin(), r.methods.end());
  write_csv_row(out, header);
  for (std::size_t s = 0; s < r.steps.size(); ++s) {
    std::vector<std::string> row{std::to_string(r.steps[s])};
    if (!r.dates.empty()) {
      row.push_back(format_iso_date(r.dates[s]));
    }
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      row.push_back(format_number(r.values[m][s]));
    }
    write_csv_row(out, row);
  }
  return out.str();
}

/// Inverse of render_steps_csv; summary fields are recomputed.
inline EvalReport parse_steps_csv(std::string_view text) {
  const auto t = parse_csv(text);
  if (t.header.empty() || t.header[0] != "t") {
    throw CsvError("steps CSV must start with column 't'");
  }
  const bool dated = t.header.size() > 1 && t.header[1] == "date";
  const std::size_t first = dated ? 2 : 1;
  EvalReport r;
  r.methods.assign(t.header.begin() + static_cast<std::ptrdiff_t>(first), t.header.end());
  r.values.assign(r.methods.size(), {});
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    const double step = parse_number(t.rows[row][0], row + 2, "t");
    if (step < 0.0 || step != std::floor(step)) {
      throw CsvError("row " + std::to_string(row + 2) + ": t must be a non-negative integer");
    }
    r.steps.push_back(static_cast<std::size_t>(step));
    if (dated) {
      r.dates.push_back(parse_date_field(t.rows[row][1], row + 2));
    }
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      const auto &f = t.rows[row][first + m];
      r.values[m].push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : parse_number(f, row + 2, r.methods[m]));
    }
  }
  summarize(r);
  return r;
}

struct SummaryRow {
  std::string method;
  double average = 0.0;
  double std_error = 0.0;
  std::size_t evaluated = 0;
  std::size_t missing = 0;
  bool best = false;
  bool tied = false;
  bool not_significant_vs_best = false;
};

inline std::vector<SummaryRow> parse_report_csv(std::string_view text) {
  const auto t = parse_csv(text);
  const auto c = [&](const char *name) { return t.require(name); };
  std::vector<SummaryRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto &row = t.rows[i];
    auto num = [&](std::size_t col, const char *name) {
      return row[col].empty() ? std::numeric_limits<double>::quiet_NaN()
                              : parse_number(row[col], i + 2, name);
    };
    SummaryRow s;
    s.method = row[c("method")];
    s.average = num(c("average"), "average");
    s.std_error = num(c("std_error"), "std_error");
    s.evaluated = static_cast<std::size_t>(num(c("evaluated"), "evaluated"));
    s.missing = static_cast<std::size_t>(num(c("missing"), "missing"));
    s.best = row[c("best")] == "1";
    s.tied = row[c("tied")] == "1";
    s.not_significant_vs_best = row[c("not_significant_vs_best")] == "1";
    rows.push_back(std::move(s));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Parameter paths

struct PathRow {
  std::size_t t = 0;
  std::vector<ParameterBand> bands; // one per parameter
};

/// Posterior parameter bands over a fitted window.
inline std::vector<PathRow> parameter_paths(const EpState &state, std::size_t first_t = 0) {
  std::vector<std::vector<ParameterBand>> per;
  for (std::size_t j = 0; j < state.latent_count(); ++j) {
    per.push_back(parameter_path(state, j));
  }
  std::vector<PathRow> rows(state.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].t = first_t + i;
    for (const auto &p : per) {
      rows[i].bands.push_back(p[i]);
    }
  }
  return rows;
}

} // namespace gpcc

#endif // GPCC_EVAL_HPP_
