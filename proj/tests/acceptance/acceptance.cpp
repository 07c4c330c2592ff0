// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unistd.h>

#include "gpcc/gpcc.hpp"
#include "grid_oracle.hpp"

using namespace gpcc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Copula density properties

Outcome copula_suite() {
  constexpr double eps = 1e-6;
  const std::vector<CopulaParams> grid{
      CopulaParams::gaussian(0.3),        CopulaParams::gaussian(-0.5),
      CopulaParams::gaussian(0.7),        CopulaParams::student_t(0.3, 4.0),
      CopulaParams::student_t(-0.4, 2.5), CopulaParams::student_t(0.6, 10.0),
      CopulaParams::student_t(0.1, 1.5),  CopulaParams::sjc(0.1, 0.6),
      CopulaParams::sjc(0.5, 0.5),        CopulaParams::sjc(0.7, 0.2),
      CopulaParams::sjc(0.3, 0.3)};
  boost::math::quadrature::tanh_sinh<double> ts;
  auto margin = [&](const CopulaParams &p, double u) {
    return ts.integrate([&](double v) { return copula_density(p, {u, v}); }, eps, 1.0 - eps,
                        1e-10);
  };
  double norm_err = 0.0;
  double margin_err = 0.0;
  double exchange_err = 0.0;
  double rotation_err = 0.0;
  for (const auto &p : grid) {
    const double total =
        ts.integrate([&](double u) { return margin(p, u); }, eps, 1.0 - eps, 1e-8);
    norm_err = std::max(norm_err, std::abs(total - 1.0));
    for (int k = 1; k <= 9; ++k) {
      margin_err = std::max(margin_err, std::abs(margin(p, 0.1 * k) - 1.0));
    }
    const bool radial = p.family != CopulaFamily::SJC || p.tau_upper() == p.tau_lower();
    for (int i = 1; i < 20; ++i) {
      for (int j = 1; j < 20; ++j) {
        const double u = 0.05 * i;
        const double v = 0.05 * j;
        const double c = copula_density(p, {u, v});
        exchange_err = std::max(exchange_err, std::abs(c - copula_density(p, {v, u})));
        if (radial) {
          rotation_err =
              std::max(rotation_err, std::abs(c - copula_density(p, {1.0 - u, 1.0 - v})));
        }
      }
    }
  }
  double limit_err = 0.0;
  for (double tau : {-0.5, 0.0, 0.3, 0.7}) {
    for (int i = 1; i <= 21; ++i) {
      for (int j = 1; j <= 21; ++j) {
        const UnitPair x{i / 22.0, j / 22.0};
        limit_err = std::max(limit_err,
                             std::abs(copula_density(CopulaParams::student_t(tau, 1e6), x) -
                                      copula_density(CopulaParams::gaussian(tau), x)));
      }
    }
  }
  double fd_err = 0.0;
  const double h = 1e-4;
  for (const auto &[tu, tl] : std::vector<std::pair<double, double>>{
           {0.1, 0.6}, {0.7, 0.4}, {0.5, 0.5}, {0.9, 0.1}, {0.25, 0.8}}) {
    const detail::SymmetrizedJc sjc(tu, tl);
    for (int i = 1; i <= 9; ++i) {
      for (int j = 1; j <= 9; ++j) {
        const double u = 0.1 * i;
        const double v = 0.1 * j;
        const double fd = (sjc.cdf(u + h, v + h) - sjc.cdf(u + h, v - h) -
                           sjc.cdf(u - h, v + h) + sjc.cdf(u - h, v - h)) /
                          (4.0 * h * h);
        const double c = copula_density(CopulaParams::sjc(tu, tl), {u, v});
        fd_err = std::max(fd_err, std::abs(c - fd) / c);
      }
    }
  }
  Outcome o;
  o.pass = norm_err <= 1e-3 && margin_err <= 1e-3 && exchange_err <= 1e-10 &&
           rotation_err <= 1e-10 && limit_err < 1e-3 && fd_err < 1e-4;
  o.detail = "normalization " + fmt(norm_err) + ", margins " + fmt(margin_err) +
             ", exchange " + fmt(exchange_err) + ", rotation " + fmt(rotation_err) +
             ", t->Gaussian " + fmt(limit_err) + ", SJC vs cdf " + fmt(fd_err);
  return o;
}

// ---------------------------------------------------------------------------
// 2. EP against grid normalization of the exact posterior

struct EpBatch {
  int cases = 0;
  int not_converged = 0;
  double worst_mean = 0.0;
  double worst_var = 0.0;
};

// Evenly spaced inputs on [0, 1] with log-uniform lambda in [1, 100] is how the
// library uses the GP (time scaled to the window, evenly spaced pseudo-inputs).
// Random inputs with lambda in [1, 10] can put two points almost on top of each
// other, and there EP itself is off the exact posterior; that batch is reported
// but not gated.
EpBatch ep_batch(bool even_inputs) {
  EpBatch b;
  for (int n = 1; n <= 3; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 gen(1000 * static_cast<std::uint64_t>(n) + seed);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Inputs z(n, 1);
      for (int i = 0; i < n; ++i) {
        if (even_inputs) {
          z(i, 0) = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        } else {
          z(i, 0) = unif(gen);
        }
      }
      const double tau = 0.8 * unif(gen) - 0.2;
      const auto data =
          copula_sample(CopulaParams::gaussian(tau), static_cast<std::size_t>(n), seed + 77);
      GpPrior prior;
      prior.mean_const = 0.4 * unif(gen) - 0.2;
      if (even_inputs) {
        prior.hyper.lambda = Eigen::VectorXd::Constant(1, std::exp(std::log(100.0) * unif(gen)));
        prior.hyper.beta = 0.2 + 1.3 * unif(gen);
      } else {
        prior.hyper.lambda = Eigen::VectorXd::Constant(1, 1.0 + 9.0 * unif(gen));
        prior.hyper.beta = 0.5 + unif(gen);
      }
      prior.hyper.gamma = 0.01;
      prior.pseudo_inputs = z;
      EpOptions opts;
      opts.tolerance = 1e-8;
      opts.max_iterations = 1000;
      auto state = make_ep_state(CopulaFamily::Gaussian, z, {prior});
      ep_subroutine(state, 0, data, opts);
      ++b.cases;
      if (!state.latents[0].converged) {
        ++b.not_converged;
        continue;
      }
      const auto t = transform_for(CopulaFamily::Gaussian, 0);
      const auto ref = oracle::grid_posterior(
          kernel_matrix(z, z, prior.hyper, true), prior.mean_const,
          [&](int i, double f) {
            return copula_log_density(CopulaParams::gaussian(t(f)),
                                      data[static_cast<std::size_t>(i)]);
          },
          n == 3 ? 161 : 801);
      for (int i = 0; i < n; ++i) {
        b.worst_mean = std::max(b.worst_mean, std::abs(state.latents[0].q.mean()[i] - ref.mean[i]));
        b.worst_var = std::max(
            b.worst_var, std::abs(state.latents[0].q.variance()[i] - ref.var[i]) / ref.var[i]);
      }
    }
  }
  return b;
}

Outcome ep_oracle() {
  const auto even = ep_batch(true);
  const auto scattered = ep_batch(false);
  Outcome o;
  o.pass = even.not_converged == 0 && even.worst_mean <= 1e-2 && even.worst_var <= 0.2;
  o.detail = std::to_string(even.cases) + " problems, max |mean err| " + fmt(even.worst_mean) +
             ", max rel var err " + fmt(even.worst_var) + ", not converged " +
             std::to_string(even.not_converged) + " (random inputs, not gated: " +
             fmt(scattered.worst_mean) + ", " + fmt(scattered.worst_var) + ", " +
             std::to_string(scattered.not_converged) + ")";
  return o;
}

// ---------------------------------------------------------------------------
// 3. FITC with n0 = n

Outcome fitc_exactness() {
  double kernel_err = 0.0;
  double pred_err = 0.0;
  double diag_err = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(500 + seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 12;
    Inputs z(n, 1);
    for (int i = 0; i < n; ++i) {
      z(i, 0) = unif(gen);
    }
    KernelHyper h;
    h.lambda = Eigen::VectorXd::Constant(1, 1.0 + 20.0 * unif(gen));
    h.beta = 0.5 + unif(gen);
    h.gamma = 0.02;
    const double m = unif(gen) - 0.5;
    GpPrior prior{m, h, z};
    const auto f = fitc_decompose(z, prior);
    const Eigen::MatrixXd K = kernel_matrix(z, z, h, true);
    kernel_err = std::max(kernel_err, (f.dense() - K).cwiseAbs().maxCoeff());
    diag_err = std::max(diag_err, (f.D.array() - h.gamma).abs().maxCoeff());

    Eigen::VectorXd T(n);
    Eigen::VectorXd shift(n);
    for (int i = 0; i < n; ++i) {
      T[i] = 3.0 * unif(gen) - 0.2;
      shift[i] = 2.0 * unif(gen) - 1.0;
    }
    LatentPosterior q(std::make_shared<const FitcFactor>(f), m, T, shift);
    const Eigen::MatrixXd Kinv = K.inverse();
    Eigen::MatrixXd P = Kinv;
    P.diagonal() += T;
    const Eigen::MatrixXd S = P.inverse();
    const Eigen::VectorXd mvec = Eigen::VectorXd::Constant(n, m);
    const Eigen::VectorXd mean = S * (Kinv * mvec + shift);
    pred_err = std::max(pred_err, (q.mean() - mean).cwiseAbs().maxCoeff());
    pred_err = std::max(pred_err, (q.variance() - S.diagonal()).cwiseAbs().maxCoeff());
    for (double x : {-0.2, 0.37, 0.81, 1.3}) {
      Eigen::RowVectorXd query(1);
      query << x;
      const Eigen::VectorXd ks = kernel_matrix(z, Inputs(query), h, false).col(0);
      const Eigen::VectorXd a = Kinv * ks;
      const auto p = latent_predict(q, query);
      pred_err = std::max(pred_err, std::abs(p.mean - (m + a.dot(mean - mvec))));
      pred_err = std::max(pred_err,
                          std::abs(p.variance - (h.beta + h.gamma - ks.dot(a) + a.dot(S * a))));
    }
  }
  Outcome o;
  o.pass = kernel_err <= 1e-6 && pred_err <= 1e-6 && diag_err <= 1e-10;
  o.detail = "kernel " + fmt(kernel_err) + ", posterior/predictive " + fmt(pred_err) +
             ", diagonal correction " + fmt(diag_err);
  return o;
}

// ---------------------------------------------------------------------------
// 4, 5. Scaled synthetic comparisons

struct SyntheticRun {
  std::vector<std::string> methods;
  std::vector<double> averages;
  double tau_rmse = 0.0;
};

SyntheticRun synthetic_run(CopulaFamily family, std::uint64_t seed,
                           const std::vector<std::string> &names) {
  const auto d = gen_synthetic(family, 1200, seed);
  RollingConfig rc;
  rc.n_w = 500;
  rc.stride = 10;
  rc.seed = seed;
  rc.threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::unique_ptr<EvalMethod>> methods;
  for (const auto &n : names) {
    methods.push_back(make_method(n));
  }
  const auto r = rolling_eval(methods, d.series, rc);
  SyntheticRun out;
  out.methods = r.methods;
  out.averages = r.averages;
  // Posterior mean tau over every anchor window against the true path.
  if (family == CopulaFamily::StudentT) {
    const auto *gp = dynamic_cast<const GpccMethod *>(methods[0].get());
    double ss = 0.0;
    std::size_t count = 0;
    for (std::size_t a = rc.n_w; a < d.series.size(); a += rc.resolved_refit_period()) {
      const auto state = gp->anchor_state(a);
      if (!state) {
        return out.tau_rmse = INFINITY, out;
      }
      for (const auto &row : parameter_paths(*state, a - rc.n_w)) {
        const double e = row.bands[0].mean - d.truth[row.t].tau();
        ss += e * e;
        ++count;
      }
    }
    out.tau_rmse = std::sqrt(ss / static_cast<double>(count));
  }
  return out;
}

Outcome synthetic_student() {
  int ordered = 0;
  int rmse_ok = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = synthetic_run(CopulaFamily::StudentT, seed, {"GPCC-T", "CONST-T", "CONST-G"});
    const bool ok = r.averages[0] > r.averages[1] && r.averages[1] > r.averages[2];
    ordered += ok;
    rmse_ok += r.tau_rmse < 0.12;
    detail += " seed " + std::to_string(seed) + ": GPCC-T " + fmt(r.averages[0]) +
              " CONST-T " + fmt(r.averages[1]) + " CONST-G " + fmt(r.averages[2]) +
              (ok ? " ordered" : " NOT ordered") + ", tau RMSE " + fmt(r.tau_rmse, 3) + ";";
  }
  return {ordered >= 2 && rmse_ok == 3,
          "ordering on " + std::to_string(ordered) + "/3 seeds, RMSE < 0.12 on " +
              std::to_string(rmse_ok) + "/3;" + detail};
}

Outcome synthetic_sjc() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = synthetic_run(CopulaFamily::SJC, seed, {"GPCC-SJC", "CONST-SJC"});
    const bool ok = r.averages[0] > r.averages[1];
    wins += ok;
    detail += " seed " + std::to_string(seed) + ": GPCC-SJC " + fmt(r.averages[0]) +
              " CONST-SJC " + fmt(r.averages[1]) + ";";
  }
  return {wins >= 2, "GPCC-SJC ahead on " + std::to_string(wins) + "/3 seeds;" + detail};
}

// ---------------------------------------------------------------------------
// 6. Baselines

std::vector<UnitPair> regime_data(std::size_t segments, std::size_t length,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<UnitPair> out;
  for (std::size_t s = 0; s < segments; ++s) {
    const auto p = CopulaParams::student_t(s % 2 == 0 ? 0.1 : 0.9, 8.0);
    for (std::size_t i = 0; i < length; ++i) {
      out.push_back(sample_pair(p, rng));
    }
  }
  return out;
}

Outcome baseline_suite() {
  const auto em = fit_hmm(regime_data(6, 100, 20), {.restarts = 2});
  double worst_step = INFINITY;
  for (std::size_t i = 1; i < em.em_trace.size(); ++i) {
    worst_step = std::min(worst_step, em.em_trace[i] - em.em_trace[i - 1]);
  }
  const auto rec = fit_hmm(regime_data(10, 200, 21));
  double lo = rec.model.states[0].tau();
  double hi = rec.model.states[1].tau();
  if (lo > hi) {
    std::swap(lo, hi);
  }
  const double regime_err = std::max(std::abs(lo - 0.1), std::abs(hi - 0.9));

  // Hand-computed recursion values.
  const double tvc = tvc_recursion({0.5, 0.1, 0.8, 5.0}, 0.3, 0.4); // 0.5*0.1 + 0.1*0.3 + 0.8*0.4
  const double tvc_err = std::abs(tvc - 0.40);
  const double dsjcc = dsjcc_tail_recursion({1.0, 0.5, 0.2}, 0.4, 0.6);
  const double dsjcc_err = std::abs(dsjcc - (0.01 + 0.98 / (1.0 + std::exp(-1.32))));
  const double hand_err = std::max(tvc_err, dsjcc_err);

  const auto d = copula_sample(CopulaParams::student_t(0.4, 5.0), 500, 10);
  const auto restricted = fit_tvc(d, {.restarts = 1, .dynamic = false});
  const auto c = fit_const_model(CopulaFamily::StudentT, d);
  const double nest_err = std::abs(restricted.log_likelihood - c.log_likelihood);

  Outcome o;
  o.pass = em.em_trace.size() >= 2 && worst_step >= -1e-8 && regime_err <= 0.05 &&
           hand_err <= 1e-12 && nest_err <= 1e-3;
  o.detail = "EM min step " + fmt(worst_step) + " over " + std::to_string(em.em_trace.size()) +
             " iterations, regime tau " + fmt(lo, 3) + "/" + fmt(hi, 3) + ", recursion error " +
             fmt(hand_err) + ", TVC(0,0) vs CONST-T " + fmt(nest_err);
  return o;
}

// ---------------------------------------------------------------------------
// 7. PIT validity

ReturnSeries dated(std::vector<double> values) {
  ReturnSeries s;
  const Date start = *parse_iso_date("2000-01-03");
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.dates.push_back(start + std::chrono::days(static_cast<int>(i)));
  }
  s.values = std::move(values);
  return s;
}

Outcome pit_validity() {
  const GarchParams truth{0.2, 0.2, 0.1, 0.15, 0.70, 0.2};
  const GarchParams other{0.0, -0.1, 0.1, 0.1, 0.75, 0.1};
  const RollingPitOptions opts{.n_w = 500, .refit_every = 1};
  const auto r = rolling_pit(dated(simulate_garch(truth, 2500, 8)),
                             dated(simulate_garch(other, 2500, 9)), opts);
  std::vector<double> us;
  std::vector<double> vs;
  for (const auto &p : r.series.pairs) {
    us.push_back(p.u);
    vs.push_back(p.v);
  }
  const double p_u = ks_uniform(us).p_value;
  const double p_v = ks_uniform(vs).p_value;

  const auto pairs = copula_sample(CopulaParams::gaussian(0.4), 1500, 12);
  std::vector<double> zx;
  std::vector<double> zy;
  for (const auto &p : pairs) {
    zx.push_back(normal_quantile(p.u));
    zy.push_back(normal_quantile(p.v));
  }
  const auto c = rolling_pit(dated(simulate_garch(truth, zx)), dated(simulate_garch(other, zy)),
                             opts);
  const double tau = kendall_tau(c.series.pairs);
  Outcome o;
  o.pass = us.size() == 2000 && p_u > 0.01 && p_v > 0.01 && std::abs(tau - 0.4) <= 0.05;
  o.detail = "KS p-values " + fmt(p_u) + " / " + fmt(p_v) + " on " + std::to_string(us.size()) +
             " points (refit every step), pseudo-series tau " + fmt(tau) + " vs 0.4";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Determinism of the eval command

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("gpcc_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto d = gen_synthetic(CopulaFamily::StudentT, 560, 5);
  {
    std::ofstream out(dir / "series.csv");
    write_pseudo_series(out, d.series);
  }
  Config c;
  c.set("eval.input", (dir / "series.csv").string());
  c.set("eval.n_w", "500");
  c.set("eval.stride", "10");
  c.set("eval.refit_every", "3");
  c.set("eval.seed", "17");
  c.set("eval.report_text", "");
  c.set("threads", std::to_string(std::max(1u, std::thread::hardware_concurrency())));
  const Logger quiet(nullptr);
  c.set("eval.report", (dir / "report1.csv").string());
  c.set("eval.steps", (dir / "steps1.csv").string());
  const auto a = cmd_eval(c, quiet);
  c.set("eval.report", (dir / "report2.csv").string());
  c.set("eval.steps", (dir / "steps2.csv").string());
  const auto b = cmd_eval(c, quiet);

  bool identical = a.report.values.size() == b.report.values.size();
  std::size_t compared = 0;
  for (std::size_t m = 0; identical && m < a.report.values.size(); ++m) {
    for (std::size_t s = 0; s < a.report.values[m].size(); ++s) {
      const double x = a.report.values[m][s];
      const double y = b.report.values[m][s];
      identical = identical && std::memcmp(&x, &y, sizeof x) == 0;
      ++compared;
    }
  }
  const bool same_files = read_text_file((dir / "steps1.csv").string()) ==
                              read_text_file((dir / "steps2.csv").string()) &&
                          read_text_file((dir / "report1.csv").string()) ==
                              read_text_file((dir / "report2.csv").string());
  // Averages in the report against means of the stored steps.
  const auto steps = parse_csv(read_text_file((dir / "steps1.csv").string()));
  const auto rows = parse_report_csv(read_text_file((dir / "report1.csv").string()));
  double avg_err = 0.0;
  std::size_t missing = 0;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    const auto col = steps.require(rows[m].method);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < steps.rows.size(); ++r) {
      if (steps.rows[r][col].empty()) {
        ++missing;
        continue;
      }
      sum += parse_number(steps.rows[r][col], r + 2, rows[m].method);
      ++n;
    }
    avg_err = std::max(avg_err, std::abs(rows[m].average - sum / static_cast<double>(n)));
  }
  std::filesystem::remove_all(dir);
  Outcome o;
  o.pass = identical && same_files && avg_err <= 1e-12 && a.status == 0 && missing == 0;
  o.detail = std::to_string(compared) + " step values over " +
             std::to_string(a.report.methods.size()) + " methods " +
             (identical ? "bit-identical" : "DIFFER") + ", output files " +
             (same_files ? "identical" : "DIFFER") + ", max |average - step mean| " +
             fmt(avg_err) + ", missing " + std::to_string(missing);
  return o;
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"copula correctness", copula_suite},
      {"EP vs grid posterior", ep_oracle},
      {"FITC exactness", fitc_exactness},
      {"synthetic Student t ordering and tau recovery", synthetic_student},
      {"synthetic SJC ordering", synthetic_sjc},
      {"baseline suites", baseline_suite},
      {"PIT validity", pit_validity},
      {"eval determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::atoi(argv[i]));
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
