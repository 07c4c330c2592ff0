#ifndef GPCC_EP_HPP_
#define GPCC_EP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "gpcc/copula.hpp"
#include "gpcc/errors.hpp"
#include "gpcc/gp_prior.hpp"
#include "gpcc/quadrature.hpp"
#include "gpcc/random.hpp"
#include "gpcc/special.hpp"

namespace gpcc {

/// Gaussian site exp(-precision f^2 / 2 + shift f) with log-scale log_s.
/// Stored in natural parameters; zero precision and shift is a flat site.
struct EpSite {
  double precision = 0.0;
  double shift = 0.0;
  double log_s = 0.0;

  bool flat() const { return precision == 0.0 && shift == 0.0; }
  double v_tilde() const {
    return precision == 0.0 ? std::numeric_limits<double>::infinity()
                            : 1.0 / precision;
  }
  double m_tilde() const { return precision == 0.0 ? 0.0 : shift / precision; }
};

struct EpTraceRow {
  int pass = 0;
  std::size_t latent_index = 0;
  double max_mean_delta = 0.0;
  double evidence = 0.0;
};

struct EpOptions {
  int max_iterations = 100;
  double tolerance = 1e-4;
  double damping = 0.5;
  int outer_passes = 4;
  bool optimize_hyper = false;
  int max_evidence_evals = 25;
  // Spacing of the per-site slice tables in latent space; 0 evaluates the
  // copula density directly at every quadrature node.
  double slice_grid_step = 0.05;
  QuadratureOptions quadrature;
  std::function<void(const EpTraceRow &)> trace;
};

/// Per-latent block of the EP state.
struct EpLatent {
  GpPrior prior;
  std::vector<EpSite> sites;
  LatentPosterior q;
  bool updated = false;
  bool converged = false;
  int iterations = 0;
  double log_evidence = std::numeric_limits<double>::quiet_NaN();
};

struct EpState {
  CopulaFamily family = CopulaFamily::Gaussian;
  Inputs inputs;
  std::vector<EpLatent> latents;
  std::size_t last_updated = 0;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t latent_count() const { return latents.size(); }
};

/// Fresh state: flat sites and q equal to the prior.
inline EpState make_ep_state(CopulaFamily family, const Inputs &inputs,
                             const std::vector<GpPrior> &priors) {
  if (priors.size() != parameter_count(family)) {
    throw ArityError(std::string(to_string(family)) + " copula needs " +
                     std::to_string(parameter_count(family)) +
                     " GP priors, got " + std::to_string(priors.size()));
  }
  EpState s;
  s.family = family;
  s.inputs = inputs;
  const auto n = inputs.rows();
  for (const auto &p : priors) {
    EpLatent l;
    l.prior = p;
    l.sites.assign(static_cast<std::size_t>(n), EpSite{});
    auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(inputs, p));
    l.q = LatentPosterior(fitc, p.mean_const, Eigen::VectorXd::Zero(n),
                          Eigen::VectorXd::Zero(n));
    s.latents.push_back(std::move(l));
  }
  return s;
}

/// Cavity from a q marginal and a site; empty when the cavity precision is
/// not positive.
inline std::optional<LatentGaussian> cavity_from(const LatentGaussian &q,
                                                 const EpSite &site) {
  if (!(q.variance > 0.0) || !std::isfinite(q.variance)) {
    return std::nullopt;
  }
  const double prec = 1.0 / q.variance - site.precision;
  if (!(prec > 0.0)) {
    return std::nullopt;
  }
  const double eta = q.mean / q.variance - site.shift;
  return LatentGaussian{eta / prec, 1.0 / prec};
}

inline std::optional<LatentGaussian> cavity(const EpState &state,
                                            std::size_t obs_index,
                                            std::size_t latent_index) {
  const auto &l = state.latents.at(latent_index);
  if (obs_index >= l.sites.size()) {
    throw ShapeError("observation index out of range");
  }
  const auto i = static_cast<Eigen::Index>(obs_index);
  return cavity_from({l.q.mean()[i], l.q.variance()[i]}, l.sites[obs_index]);
}

/// Moments of cavity(f) * exp(log_slice(f)).
template <typename LogSlice>
TiltedMoments moment_match_1d(const LatentGaussian &cav,
                              const LogSlice &log_slice,
                              const QuadratureOptions &opts = {}) {
  if (!(cav.variance > 0.0) || !std::isfinite(cav.variance)) {
    throw DomainError("moment matching needs a proper cavity");
  }
  return tilted_moments(cav.mean, cav.variance, log_slice, opts);
}

// ---------------------------------------------------------------------------
// Slice likelihoods: log copula density as a function of one latent with the
// others frozen.

/// log c(u, v | theta) as a function of latent `index`, other latents fixed.
class CopulaSlice {
public:
  CopulaSlice(CopulaFamily family, std::size_t index, UnitPair pair,
              std::array<double, 2> fixed_latents)
      : family_(family), index_(index), pair_(clamp_pair(pair)) {
    detail::check_interior(pair);
    const auto other = index == 0 ? 1 : 0;
    switch (family) {
    case CopulaFamily::Gaussian:
      x_ = normal_quantile(pair_.u);
      y_ = normal_quantile(pair_.v);
      break;
    case CopulaFamily::StudentT:
      if (index == 0) {
        const double nu = transform_for(family, 1)(fixed_latents[1]);
        consts_ = detail::StudentConstants(nu);
        x_ = student_t_quantile(nu, pair_.u);
        y_ = student_t_quantile(nu, pair_.v);
      } else {
        fixed_ = tau_to_rho(transform_for(family, 0)(fixed_latents[0]));
      }
      break;
    case CopulaFamily::SJC:
      fixed_ = transform_for(family, other)(fixed_latents[other]);
      break;
    }
    transform_ = transform_for(family, index);
  }

  double operator()(double f) const {
    const double theta = transform_(f);
    switch (family_) {
    case CopulaFamily::Gaussian:
      return detail::gaussian_log_density(tau_to_rho(theta), x_, y_);
    case CopulaFamily::StudentT:
      if (index_ == 0) {
        return detail::student_log_density(consts_, tau_to_rho(theta), x_, y_);
      } else {
        const double nu = std::max(theta, 1.0);
        return detail::student_log_density(detail::StudentConstants(nu), fixed_,
                                           student_t_quantile(nu, pair_.u),
                                           student_t_quantile(nu, pair_.v));
      }
    case CopulaFamily::SJC:
      return index_ == 0
                 ? detail::SymmetrizedJc(theta, fixed_).log_density(pair_.u, pair_.v)
                 : detail::SymmetrizedJc(fixed_, theta).log_density(pair_.u, pair_.v);
    }
    return 0.0;
  }

private:
  CopulaFamily family_;
  std::size_t index_;
  UnitPair pair_;
  ParamTransform transform_;
  double x_ = 0.0;
  double y_ = 0.0;
  double fixed_ = 0.0;
  detail::StudentConstants consts_{1.0};
};

/// Cubic B-spline table of a slice on [-half_range, half_range]; constant
/// beyond the ends, where every transform is saturated.
class SliceTable {
public:
  static constexpr double kHalfRange = 8.5;

  template <typename F> SliceTable(const F &f, double step) {
    const int n = static_cast<int>(std::ceil(2.0 * kHalfRange / step)) + 1;
    h_ = 2.0 * kHalfRange / (n - 1);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = f(-kHalfRange + h_ * i);
      if (!std::isfinite(y[static_cast<std::size_t>(i)])) {
        throw NumericError("non-finite slice likelihood at latent value " +
                           std::to_string(-kHalfRange + h_ * i));
      }
    }
    lo_ = y.front();
    hi_ = y.back();
    spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(
        y.begin(), y.end(), -kHalfRange, h_, 0.0, 0.0);
  }

  double operator()(double f) const {
    if (f <= -kHalfRange) {
      return lo_;
    }
    if (f >= kHalfRange) {
      return hi_;
    }
    return spline_(f);
  }

private:
  double h_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

/// Per-observation log slice likelihoods for one latent.
using LogSliceSet = std::function<double(std::size_t, double)>;

namespace detail {

inline std::vector<std::array<double, 2>>
frozen_latents(const EpState &state) {
  std::vector<std::array<double, 2>> out(state.size(), {0.0, 0.0});
  for (std::size_t l = 0; l < state.latents.size(); ++l) {
    const auto &m = state.latents[l].q.mean();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i][l] = m[static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

inline LogSliceSet copula_slices(const EpState &state, std::size_t j,
                                 std::span<const UnitPair> data,
                                 const EpOptions &opts) {
  if (data.size() != state.size()) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match state size " +
                     std::to_string(state.size()));
  }
  const auto fixed = frozen_latents(state);
  if (opts.slice_grid_step > 0.0) {
    auto tables = std::make_shared<std::vector<SliceTable>>();
    tables->reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      tables->emplace_back(CopulaSlice(state.family, j, data[i], fixed[i]),
                           opts.slice_grid_step);
    }
    return [tables](std::size_t i, double f) { return (*tables)[i](f); };
  }
  auto slices = std::make_shared<std::vector<CopulaSlice>>();
  slices->reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    slices->emplace_back(state.family, j, data[i], fixed[i]);
  }
  return [slices](std::size_t i, double f) { return (*slices)[i](f); };
}

// A(eta, lambda) = eta^2 / (2 lambda) - log(lambda) / 2
inline double log_partition(double eta, double lambda) {
  return 0.5 * eta * eta / lambda - 0.5 * std::log(lambda);
}

struct SiteRun {
  LatentPosterior q;
  std::vector<EpSite> sites;
  bool updated = false;
  bool converged = false;
  int iterations = 0;
  double log_evidence = 0.0;
};

inline double evidence_of(const LatentPosterior &q,
                          const std::vector<EpSite> &sites) {
  double total = q.log_normalizer_ratio();
  for (const auto &s : sites) {
    total += s.log_s;
  }
  return total;
}

inline LatentPosterior posterior_from(std::shared_ptr<const FitcFactor> fitc,
                                      double mean_const,
                                      const std::vector<EpSite> &sites) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::VectorXd T(n);
  Eigen::VectorXd nu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T[i] = sites[static_cast<std::size_t>(i)].precision;
    nu[i] = sites[static_cast<std::size_t>(i)].shift;
  }
  return LatentPosterior(std::move(fitc), mean_const, T, nu);
}

/// Parallel damped EP on one latent until the q means settle.
inline SiteRun run_sites(std::shared_ptr<const FitcFactor> fitc,
                         double mean_const, std::vector<EpSite> sites,
                         const LogSliceSet &slices, const EpOptions &opts) {
  SiteRun r;
  const std::size_t n = sites.size();
  r.q = posterior_from(fitc, mean_const, sites);
  if (n == 0) {
    r.sites = std::move(sites);
    r.converged = true;
    r.log_evidence = 0.0;
    return r;
  }
  int bad_passes = 0;
  std::vector<EpSite> proposal(n);
  for (r.iterations = 0; r.iterations < opts.max_iterations;) {
    std::size_t skipped = 0;
    const auto &mu = r.q.mean();
    const auto &var = r.q.variance();
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto cav = cavity_from({mu[ii], var[ii]}, sites[i]);
      if (!cav) {
        proposal[i] = sites[i];
        ++skipped;
        continue;
      }
      const auto tm = moment_match_1d(
          *cav, [&](double f) { return slices(i, f); }, opts.quadrature);
      const double cav_prec = 1.0 / cav->variance;
      const double cav_eta = cav->mean * cav_prec;
      double new_prec;
      double new_shift;
      if (tm.variance > 0.0) {
        new_prec = 1.0 / tm.variance - cav_prec;
        new_shift = tm.mean / tm.variance - cav_eta;
      } else {
        new_prec = sites[i].precision;
        new_shift = sites[i].shift;
      }
      EpSite s;
      s.precision = (1.0 - opts.damping) * sites[i].precision + opts.damping * new_prec;
      s.shift = (1.0 - opts.damping) * sites[i].shift + opts.damping * new_shift;
      s.log_s = tm.log_z - (log_partition(cav_eta + s.shift, cav_prec + s.precision) -
                            log_partition(cav_eta, cav_prec));
      proposal[i] = s;
    }
    bad_passes = (2 * skipped > n) ? bad_passes + 1 : 0;
    if (bad_passes >= 3) {
      throw DivergenceError("EP diverged: non-positive cavity precision on " +
                            std::to_string(skipped) + " of " +
                            std::to_string(n) + " sites for 3 passes");
    }

    // Recompute q; shrink the step toward the previous sites if the update
    // makes the posterior improper.
    std::optional<LatentPosterior> q_new;
    std::vector<EpSite> trial = proposal;
    double step = 1.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      try {
        q_new.emplace(posterior_from(fitc, mean_const, trial));
        break;
      } catch (const NumericError &) {
        step *= 0.5;
        for (std::size_t i = 0; i < n; ++i) {
          trial[i].precision = sites[i].precision +
                               step * (proposal[i].precision - sites[i].precision);
          trial[i].shift =
              sites[i].shift + step * (proposal[i].shift - sites[i].shift);
          trial[i].log_s = proposal[i].log_s;
        }
      }
    }
    if (!q_new) {
      throw DivergenceError("EP diverged: site update keeps the posterior improper");
    }
    const double delta = (q_new->mean() - r.q.mean()).lpNorm<Eigen::Infinity>();
    sites = std::move(trial);
    r.q = std::move(*q_new);
    r.updated = true;
    ++r.iterations;
    if (!std::isfinite(delta)) {
      throw DivergenceError("EP diverged: non-finite posterior mean");
    }
    // A pass that skipped a site has not reached a fixed point even if the
    // means stopped moving.
    if (delta < opts.tolerance && skipped == 0) {
      r.converged = true;
      break;
    }
  }
  r.log_evidence = evidence_of(r.q, sites);
  r.sites = std::move(sites);
  return r;
}

inline void store_run(EpLatent &l, SiteRun &&r) {
  l.q = std::move(r.q);
  l.sites = std::move(r.sites);
  l.updated = l.updated || r.updated;
  l.converged = r.converged;
  l.iterations = r.iterations;
  l.log_evidence = r.log_evidence;
}

} // namespace detail

/// Runs parallel EP on latent j with caller-supplied log slice likelihoods.
inline void ep_subroutine_with(EpState &state, std::size_t j,
                               const LogSliceSet &slices,
                               const EpOptions &opts = {}) {
  auto &l = state.latents.at(j);
  auto run = detail::run_sites(l.q.fitc_ptr(), l.prior.mean_const, l.sites,
                               slices, opts);
  detail::store_run(l, std::move(run));
  state.last_updated = j;
}

/// Runs parallel EP on latent j, other latents frozen at their q means.
inline void ep_subroutine(EpState &state, std::size_t j,
                          std::span<const UnitPair> data,
                          const EpOptions &opts = {}) {
  if (j >= state.latents.size()) {
    throw ArityError("latent index out of range");
  }
  ep_subroutine_with(state, j, detail::copula_slices(state, j, data, opts),
                     opts);
}

/// EP approximation of the log evidence of the most recently updated
/// sub-routine.
inline double ep_log_evidence(const EpState &state) {
  if (state.latents.empty()) {
    throw EvidenceUnavailable("empty EP state");
  }
  const auto &l = state.latents[state.last_updated];
  if (state.size() > 0 && (!l.updated || !l.converged)) {
    throw EvidenceUnavailable("EP sites are not converged");
  }
  return detail::evidence_of(l.q, l.sites);
}

namespace detail {

struct HyperBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> step;
};

inline std::vector<double> hyper_vector(const GpPrior &p) {
  std::vector<double> x;
  for (Eigen::Index d = 0; d < p.hyper.lambda.size(); ++d) {
    x.push_back(std::log(std::max(p.hyper.lambda[d], 1e-300)));
  }
  x.push_back(std::log(std::max(p.hyper.beta, 1e-300)));
  x.push_back(std::log(std::max(p.hyper.gamma, 1e-300)));
  x.push_back(p.mean_const);
  return x;
}

inline GpPrior prior_from_vector(const GpPrior &base, const std::vector<double> &x) {
  GpPrior p = base;
  const auto dims = base.hyper.lambda.size();
  for (Eigen::Index d = 0; d < dims; ++d) {
    p.hyper.lambda[d] = std::exp(x[static_cast<std::size_t>(d)]);
  }
  p.hyper.beta = std::exp(x[static_cast<std::size_t>(dims)]);
  p.hyper.gamma = std::exp(x[static_cast<std::size_t>(dims) + 1]);
  p.mean_const = x[static_cast<std::size_t>(dims) + 2];
  return p;
}

inline HyperBox hyper_box(std::size_t dims) {
  HyperBox b;
  for (std::size_t d = 0; d < dims; ++d) {
    b.lower.push_back(std::log(1e-2));
    b.upper.push_back(std::log(1e5));
    b.step.push_back(1.0);
  }
  b.lower.push_back(std::log(1e-3));
  b.upper.push_back(std::log(25.0));
  b.step.push_back(0.7);
  b.lower.push_back(std::log(1e-6));
  b.upper.push_back(std::log(1.0));
  b.step.push_back(1.5);
  b.lower.push_back(-8.0);
  b.upper.push_back(8.0);
  b.step.push_back(0.5);
  return b;
}

} // namespace detail

/// Runs sub-routine j at the current hyperparameters, then improves the
/// hyperparameters (log lambda, log beta, log gamma, mean constant) by
/// coordinate search on the EP evidence, warm-starting every evaluation from
/// the best sites found so far. Uses at most opts.max_evidence_evals runs.
inline void optimize_hyperparameters(EpState &state, std::size_t j,
                                     std::span<const UnitPair> data,
                                     const EpOptions &opts = {}) {
  auto &l = state.latents.at(j);
  const auto slices = detail::copula_slices(state, j, data, opts);
  auto best_run = detail::run_sites(l.q.fitc_ptr(), l.prior.mean_const, l.sites,
                                    slices, opts);
  GpPrior best_prior = l.prior;
  int evals = 1;
  if (state.size() > 0) {
    auto x = detail::hyper_vector(best_prior);
    const auto box = detail::hyper_box(static_cast<std::size_t>(
        best_prior.hyper.lambda.size()));
    auto step = box.step;
    std::vector<double> dir(x.size(), 1.0);
    auto try_point = [&](const std::vector<double> &cand) -> bool {
      ++evals;
      try {
        const GpPrior p = detail::prior_from_vector(best_prior, cand);
        auto fitc = std::make_shared<const FitcFactor>(
            fitc_decompose(state.inputs, p));
        auto run = detail::run_sites(fitc, p.mean_const, best_run.sites, slices, opts);
        if (std::isfinite(run.log_evidence) &&
            run.log_evidence > best_run.log_evidence + 1e-9) {
          best_run = std::move(run);
          best_prior = p;
          return true;
        }
      } catch (const Error &) {
        // Treated as a failed move.
      }
      return false;
    };
    bool progress = true;
    while (evals < opts.max_evidence_evals && progress) {
      progress = false;
      for (std::size_t c = 0; c < x.size() && evals < opts.max_evidence_evals; ++c) {
        if (step[c] < 1e-3) {
          continue;
        }
        progress = true;
        bool moved = false;
        for (int side = 0; side < 2 && !moved && evals < opts.max_evidence_evals;
             ++side) {
          const double d = (side == 0 ? dir[c] : -dir[c]) * step[c];
          auto cand = x;
          cand[c] = std::clamp(x[c] + d, box.lower[c], box.upper[c]);
          if (cand[c] == x[c]) {
            continue;
          }
          if (try_point(cand)) {
            x = cand;
            moved = true;
            if (side == 1) {
              dir[c] = -dir[c];
            }
          }
        }
        if (!moved) {
          step[c] *= 0.5;
        }
      }
    }
  }
  l.prior = best_prior;
  detail::store_run(l, std::move(best_run));
  state.last_updated = j;
}

/// Alternating EP over the k latents: up to opts.outer_passes alternations,
/// each sub-routine run to convergence before the next. Stops early once a
/// full alternation moves no q mean by more than opts.tolerance; with k = 1
/// the single sub-routine runs once.
inline EpState alternate_ep(std::span<const UnitPair> data, const Inputs &inputs,
                            CopulaFamily family, const std::vector<GpPrior> &priors,
                            const EpOptions &opts = {}) {
  if (data.empty()) {
    throw ShapeError("alternate_ep needs at least one observation");
  }
  if (static_cast<std::size_t>(inputs.rows()) != data.size()) {
    throw ShapeError("inputs and data differ in length");
  }
  EpState state = make_ep_state(family, inputs, priors);
  const std::size_t k = state.latent_count();
  for (int pass = 0; pass < opts.outer_passes; ++pass) {
    double change = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::VectorXd before = state.latents[j].q.mean();
      if (opts.optimize_hyper) {
        optimize_hyperparameters(state, j, data, opts);
      } else {
        ep_subroutine(state, j, data, opts);
      }
      const double delta =
          (state.latents[j].q.mean() - before).lpNorm<Eigen::Infinity>();
      change = std::max(change, delta);
      if (opts.trace) {
        opts.trace({pass, j, delta, state.latents[j].log_evidence});
      }
    }
    if (k == 1 || change < opts.tolerance) {
      break;
    }
  }
  return state;
}

inline void write_trace_csv(std::ostream &out, const std::vector<EpTraceRow> &rows) {
  out << "pass,latent_index,max_mean_delta,evidence\n";
  out.precision(17);
  for (const auto &r : rows) {
    out << r.pass << ',' << r.latent_index << ',' << r.max_mean_delta << ','
        << r.evidence << '\n';
  }
}

// ---------------------------------------------------------------------------
// Prediction

struct PredictiveDensityEstimate {
  double value = 0.0;
  double mc_std_error = 0.0;
  std::size_t draws = 0;
  std::size_t clamped = 0;
  bool clamp_warning = false;
};

inline std::vector<LatentGaussian> predict_latents(const EpState &state,
                                                   const Eigen::RowVectorXd &query) {
  std::vector<LatentGaussian> out;
  for (const auto &l : state.latents) {
    out.push_back(l.q.predict(query));
  }
  return out;
}

/// Monte-Carlo average of the copula density at `pair` over independent
/// Gaussian latents.
inline PredictiveDensityEstimate
predict_density_from(CopulaFamily family, const std::vector<LatentGaussian> &latents,
                     UnitPair pair, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) {
    throw DomainError("predict_density needs at least one draw");
  }
  if (latents.size() != parameter_count(family)) {
    throw ArityError("predict_density: wrong number of latents");
  }
  std::size_t clamped = 0;
  const UnitPair p = clamp_pair(pair);
  const bool pair_clamped = p.u != pair.u || p.v != pair.v;
  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  std::array<double, 2> f{0.0, 0.0};
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t j = 0; j < latents.size(); ++j) {
      f[j] = latents[j].mean + std::sqrt(latents[j].variance) * rng.normal();
    }
    const auto params =
        apply_transform(family, std::span<const double>(f.data(), latents.size()));
    double value = copula_density(params, p);
    if (pair_clamped) {
      ++clamped;
    }
    if (!std::isfinite(value)) {
      ++clamped;
      value = std::numeric_limits<double>::max();
    }
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
  }
  PredictiveDensityEstimate e;
  e.value = mean;
  e.draws = count;
  e.mc_std_error =
      count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) /
                            static_cast<double>(count))
                : 0.0;
  e.clamped = clamped;
  e.clamp_warning = clamped * 100 > count;
  return e;
}

/// Monte-Carlo estimate of the predictive copula density at `pair` for the
/// input `query`, averaging over draws from the factorized latent predictive.
inline PredictiveDensityEstimate
predict_density(const EpState &state, const Eigen::RowVectorXd &query,
                UnitPair pair, std::size_t draws, std::uint64_t seed) {
  return predict_density_from(state.family, predict_latents(state, query), pair,
                              draws, seed);
}

/// Posterior summary of sigma_j(f_j) at each training input.
struct ParameterBand {
  double mean = 0.0;   // E[sigma(f)]
  double median = 0.0; // sigma(mu)
  double q10 = 0.0;
  double q90 = 0.0;
};

inline std::vector<ParameterBand> parameter_path(const EpState &state,
                                                 std::size_t j) {
  const auto &l = state.latents.at(j);
  const auto t = transform_for(state.family, j);
  constexpr double z90 = 1.2815515655446004;
  std::vector<ParameterBand> out(state.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double mu = l.q.mean()[ii];
    const double v = std::max(l.q.variance()[ii], 0.0);
    const double sd = std::sqrt(v);
    out[i] = {t.expected(mu, v), t(mu), t(mu - z90 * sd), t(mu + z90 * sd)};
  }
  return out;
}

} // namespace gpcc

#endif // GPCC_EP_HPP_
