#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gpcc/baselines.hpp"

using namespace gpcc;

namespace {

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

std::vector<UnitPair> window_with(std::uint64_t seed) {
  return copula_sample(CopulaParams::gaussian(0.4), kRecursionWindow, seed);
}

} // namespace

TEST(FitConst, GaussianRecoversTau) {
  const auto d = copula_sample(CopulaParams::gaussian(0.3), 5000, 1);
  const auto m = fit_const_model(CopulaFamily::Gaussian, d);
  EXPECT_NEAR(m.params.tau(), 0.3, 0.02);
  EXPECT_GE(m.log_likelihood,
            copula_log_likelihood(CopulaParams::gaussian(0.3), d) - 1e-9);
}

TEST(FitConst, IndependenceGivesZeroTau) {
  const auto d = copula_sample(CopulaParams::gaussian(0.0), 5000, 2);
  EXPECT_NEAR(fit_const(CopulaFamily::Gaussian, d).tau(), 0.0, 0.02);
}

TEST(FitConst, StudentAndSjcRecoverParameters) {
  const auto t = copula_sample(CopulaParams::student_t(0.5, 4.0), 4000, 3);
  const auto mt = fit_const(CopulaFamily::StudentT, t);
  EXPECT_NEAR(mt.tau(), 0.5, 0.03);
  EXPECT_GT(mt.nu(), 2.5);
  EXPECT_LT(mt.nu(), 7.0);
  const auto s = copula_sample(CopulaParams::sjc(0.2, 0.6), 4000, 4);
  const auto ms = fit_const(CopulaFamily::SJC, s);
  EXPECT_NEAR(ms.tau_upper(), 0.2, 0.08);
  EXPECT_NEAR(ms.tau_lower(), 0.6, 0.08);
}

TEST(FitConst, BeatsEveryGridPoint) {
  const auto d = copula_sample(CopulaParams::student_t(0.3, 6.0), 400, 5);
  for (auto family : kAllFamilies) {
    const auto m = fit_const_model(family, d);
    EXPECT_NEAR(m.log_likelihood, copula_log_likelihood(m.params, d), 1e-8);
    for (double a = -0.9; a <= 0.9; a += 0.1) {
      for (double b : {1.5, 3.0, 6.0, 12.0, 50.0}) {
        CopulaParams p;
        switch (family) {
        case CopulaFamily::Gaussian:
          p = CopulaParams::gaussian(a);
          break;
        case CopulaFamily::StudentT:
          p = CopulaParams::student_t(a, b);
          break;
        case CopulaFamily::SJC:
          p = CopulaParams::sjc(0.5 + 0.5 * a, std::min(0.95, b / 60.0));
          break;
        }
        EXPECT_GE(m.log_likelihood, copula_log_likelihood(p, d) - 1e-9)
            << to_string(family) << " " << a << " " << b;
      }
    }
  }
}

TEST(FitConst, TooFewObservations) {
  const auto d = copula_sample(CopulaParams::gaussian(0.3), 9, 1);
  EXPECT_THROW(fit_const(CopulaFamily::Gaussian, d), ShapeError);
}

TEST(Tvc, RecursionHandValues) {
  TvcParams p{0.5, 0.1, 0.8, 5.0};
  EXPECT_NEAR(tvc_recursion(p, 0.3, 0.4), 0.40, 1e-12);
  TvcParams flat{0.35, 0.0, 0.0, 5.0};
  EXPECT_EQ(tvc_recursion(flat, -0.7, 0.9), 0.35);
  TvcParams any{0.2, 0.3, 0.6, 5.0};
  EXPECT_NEAR(tvc_recursion(any, 0.2, 0.2), 0.2, 1e-15);
}

TEST(Tvc, StepUsesWindowCorrelation) {
  const auto w = window_with(9);
  TvcParams p{0.5, 0.1, 0.8, 5.0};
  std::vector<double> u;
  std::vector<double> v;
  for (const auto &x : w) {
    u.push_back(x.u);
    v.push_back(x.v);
  }
  EXPECT_NEAR(tvc_step(p, 0.4, w), tvc_recursion(p, pearson(u, v), 0.4), 1e-15);
  EXPECT_THROW(tvc_step(p, 0.4, std::span(w).first(9)), ShapeError);
}

TEST(Tvc, RestrictedFitMatchesConstStudent) {
  const auto d = copula_sample(CopulaParams::student_t(0.4, 5.0), 500, 10);
  const auto c = fit_const_model(CopulaFamily::StudentT, d);
  const auto r = fit_tvc(d, {.restarts = 1, .dynamic = false});
  EXPECT_EQ(r.params.alpha, 0.0);
  EXPECT_EQ(r.params.beta, 0.0);
  EXPECT_NEAR(r.log_likelihood, c.log_likelihood, 1e-3);
}

TEST(Tvc, FullFitIsValidNestedAndDeterministic) {
  const auto d = copula_sample(CopulaParams::student_t(0.4, 5.0), 400, 11);
  const auto a = fit_tvc(d);
  const auto b = fit_tvc(d);
  EXPECT_LE(a.params.alpha + a.params.beta, 1.0);
  EXPECT_GE(a.params.alpha, 0.0);
  EXPECT_GE(a.params.beta, 0.0);
  EXPECT_GT(a.params.nu, 1.0);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_EQ(a.params.alpha, b.params.alpha);
  const auto c = fit_const_model(CopulaFamily::StudentT, d);
  EXPECT_GE(a.log_likelihood, c.log_likelihood - 1e-3);
  EXPECT_NEAR(a.log_likelihood, tvc_log_likelihood(a.params, d, a.rho0), 1e-9);
}

TEST(Tvc, PredictionMatchesRecursionReplay) {
  const auto d = copula_sample(CopulaParams::student_t(0.3, 6.0), 60, 12);
  TvcModel m;
  m.params = {0.3, 0.15, 0.7, 6.0};
  m.rho0 = 0.25;
  // Independent replay of the recursion.
  double rho = m.rho0;
  for (std::size_t t = 10; t <= d.size(); ++t) {
    double mu = 0.0;
    double mv = 0.0;
    for (std::size_t j = t - 10; j < t; ++j) {
      mu += d[j].u / 10.0;
      mv += d[j].v / 10.0;
    }
    double suv = 0.0;
    double suu = 0.0;
    double svv = 0.0;
    for (std::size_t j = t - 10; j < t; ++j) {
      suv += (d[j].u - mu) * (d[j].v - mv);
      suu += (d[j].u - mu) * (d[j].u - mu);
      svv += (d[j].v - mv) * (d[j].v - mv);
    }
    rho = 0.15 * 0.3 + 0.15 * suv / std::sqrt(suu * svv) + 0.7 * rho;
  }
  const UnitPair next{0.8, 0.7};
  const double expected = copula_log_density(
      CopulaParams::student_t(2.0 * std::asin(rho) / M_PI, 6.0), next);
  EXPECT_NEAR(baseline_predict_logdensity(m, d, next), expected, 1e-12);
}

TEST(Dsjcc, RecursionHandValues) {
  DsjccParams zero;
  const auto w = window_with(3);
  const auto z = dsjcc_step(zero, 0.3, 0.8, w);
  EXPECT_EQ(z.upper, 0.5);
  EXPECT_EQ(z.lower, 0.5);
  std::vector<UnitPair> diag;
  for (int i = 0; i < 10; ++i) {
    diag.push_back({0.05 + 0.09 * i, 0.05 + 0.09 * i});
  }
  EXPECT_EQ(window_abs_gap(diag), 0.0);
  DsjccTail t{1.0, 0.5, 0.2};
  EXPECT_NEAR(dsjcc_tail_recursion(t, 0.4, 0.6), 0.01 + 0.98 / (1.0 + std::exp(-1.32)),
              1e-12);
  EXPECT_THROW(dsjcc_step(zero, 0.3, 0.3, std::span(w).first(5)), ShapeError);
}

TEST(Dsjcc, OutputsStayInRange) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    DsjccParams p;
    p.upper = {40.0 * rng.uniform() - 20.0, 40.0 * rng.uniform() - 20.0,
               40.0 * rng.uniform() - 20.0};
    p.lower = {40.0 * rng.uniform() - 20.0, 40.0 * rng.uniform() - 20.0,
               40.0 * rng.uniform() - 20.0};
    const auto r = dsjcc_step(p, rng.uniform(), rng.uniform(), window_with(k));
    EXPECT_GE(r.upper, 0.01);
    EXPECT_LE(r.upper, 0.99);
    EXPECT_GE(r.lower, 0.01);
    EXPECT_LE(r.lower, 0.99);
  }
}

TEST(Dsjcc, FitIsDeterministicAndNestsConst) {
  const auto d = copula_sample(CopulaParams::sjc(0.3, 0.5), 300, 13);
  const auto a = fit_dsjcc(d);
  const auto b = fit_dsjcc(d);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_NEAR(a.log_likelihood, dsjcc_log_likelihood(a.params, d, a.init), 1e-9);
  const auto c = fit_const_model(CopulaFamily::SJC, d);
  EXPECT_GE(a.log_likelihood, c.log_likelihood - 1e-3);
}

TEST(Dsjcc, PredictionRollsRecursion) {
  const auto d = copula_sample(CopulaParams::sjc(0.3, 0.5), 40, 14);
  DsjccModel m;
  m.params.upper = {0.2, -0.5, 1.0};
  m.params.lower = {-0.1, 0.3, 0.5};
  m.init = {0.3, 0.45};
  TailPair tails = m.init;
  for (std::size_t t = 10; t <= d.size(); ++t) {
    double eps = 0.0;
    for (std::size_t j = t - 10; j < t; ++j) {
      eps += std::abs(d[j].u - d[j].v) / 10.0;
    }
    tails = {0.01 + 0.98 / (1.0 + std::exp(-(0.2 - 0.5 * eps + 1.0 * tails.upper))),
             0.01 + 0.98 / (1.0 + std::exp(-(-0.1 + 0.3 * eps + 0.5 * tails.lower)))};
  }
  const UnitPair next{0.1, 0.2};
  EXPECT_NEAR(baseline_predict_logdensity(m, d, next),
              copula_log_density(CopulaParams::sjc(tails.upper, tails.lower), next), 1e-12);
}

TEST(Hmm, EmIsMonotone) {
  const auto d = regime_data(6, 100, 20);
  HmmOptions o;
  o.restarts = 2;
  const auto f = fit_hmm(d, o);
  ASSERT_GE(f.em_trace.size(), 2u);
  for (std::size_t i = 1; i < f.em_trace.size(); ++i) {
    EXPECT_GE(f.em_trace[i] - f.em_trace[i - 1], -1e-8) << "iteration " << i;
  }
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(f.model.transition.row(i).sum(), 1.0, 1e-12);
  }
  EXPECT_NEAR(f.log_likelihood, hmm_log_likelihood(f.model, d), 1e-6);
}

TEST(Hmm, RecoversRegimes) {
  const auto d = regime_data(10, 200, 21);
  const auto f = fit_hmm(d);
  double lo = f.model.states[0].tau();
  double hi = f.model.states[1].tau();
  if (lo > hi) {
    std::swap(lo, hi);
  }
  EXPECT_NEAR(lo, 0.1, 0.05);
  EXPECT_NEAR(hi, 0.9, 0.05);
}

TEST(Hmm, FilterIsNormalized) {
  const auto d = regime_data(4, 50, 22);
  HmmCopula m;
  m.states = {CopulaParams::student_t(0.1, 5.0), CopulaParams::student_t(0.8, 4.0)};
  m.transition << 0.9, 0.1, 0.2, 0.8;
  const auto f = hmm_filter(m, d);
  for (const auto &p : f.filtered) {
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

TEST(Hmm, TiedStatesReproduceConstStudent) {
  const auto d = copula_sample(CopulaParams::student_t(0.4, 5.0), 300, 23);
  HmmOptions o;
  o.restarts = 1;
  o.tie_states = true;
  const auto f = fit_hmm(d, o);
  const auto c = fit_const_model(CopulaFamily::StudentT, d);
  EXPECT_NEAR(f.log_likelihood, c.log_likelihood, 1e-6);
}

TEST(Hmm, EqualStatesPredictLikeSingleCopula) {
  const auto d = copula_sample(CopulaParams::student_t(0.4, 5.0), 80, 24);
  HmmCopula m;
  m.states = {CopulaParams::student_t(0.4, 5.0), CopulaParams::student_t(0.4, 5.0)};
  m.transition << 0.7, 0.3, 0.4, 0.6;
  const UnitPair next{0.3, 0.2};
  EXPECT_NEAR(baseline_predict_logdensity(m, d, next),
              copula_log_density(m.states[0], next), 1e-12);
}

TEST(Hmm, TooFewObservations) {
  EXPECT_THROW(fit_hmm(copula_sample(CopulaParams::gaussian(0.3), 49, 1)), ShapeError);
}

TEST(BaselinePredict, ConstIsCopulaDensity) {
  ConstModel m{CopulaParams::gaussian(0.3), 0.0, true};
  const auto d = copula_sample(CopulaParams::gaussian(0.3), 20, 1);
  EXPECT_EQ(baseline_predict_logdensity(m, d, {0.2, 0.4}),
            copula_log_density(m.params, {0.2, 0.4}));
}
