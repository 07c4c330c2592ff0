#ifndef GPCC_STATS_HPP_
#define GPCC_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "gpcc/copula.hpp"
#include "gpcc/errors.hpp"

namespace gpcc {

inline double mean_of(std::span<const double> x) {
  if (x.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sd_of(std::span<const double> x) {
  if (x.size() < 2) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ShapeError("pearson: need two equal-length samples of size >= 2");
  }
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

// Merge sort that counts exchanges (Knight's algorithm).
inline std::uint64_t merge_count(std::vector<double> &a, std::vector<double> &tmp,
                                 std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) {
    return 0;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(a, tmp, lo, mid) + merge_count(a, tmp, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      swaps += mid - i;
      tmp[k++] = a[j++];
    } else {
      tmp[k++] = a[i++];
    }
  }
  while (i < mid) {
    tmp[k++] = a[i++];
  }
  while (j < hi) {
    tmp[k++] = a[j++];
  }
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

inline std::uint64_t tied_pairs(const std::vector<double> &sorted) {
  std::uint64_t t = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      t += run * (run - 1) / 2;
      run = 1;
    }
  }
  return t;
}

} // namespace detail

/// Kendall's tau-b in O(n log n).
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw ShapeError("kendall_tau: need two equal-length samples of size >= 2");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = detail::tied_pairs(xs);
  std::uint64_t n3 = 0; // pairs tied in both
  {
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
        ++run;
      } else {
        n3 += run * (run - 1) / 2;
        run = 1;
      }
    }
  }
  std::vector<double> tmp(n);
  const std::uint64_t swaps = detail::merge_count(ys, tmp, 0, n);
  const std::uint64_t n2 = detail::tied_pairs(ys);
  const double num = static_cast<double>(n0) - static_cast<double>(n1) -
                     static_cast<double>(n2) + static_cast<double>(n3) -
                     2.0 * static_cast<double>(swaps);
  const double den = std::sqrt(static_cast<double>(n0 - n1)) *
                     std::sqrt(static_cast<double>(n0 - n2));
  return den > 0.0 ? num / den : 0.0;
}

inline double kendall_tau(std::span<const UnitPair> pairs) {
  std::vector<double> u(pairs.size());
  std::vector<double> v(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    u[i] = pairs[i].u;
    v[i] = pairs[i].v;
  }
  return kendall_tau(u, v);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) {
    return 1.0;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) {
      break;
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS test against Uniform(0, 1), with the Stephens finite-sample
/// correction to the asymptotic p-value.
inline KsResult ks_uniform(std::span<const double> x) {
  if (x.empty()) {
    throw ShapeError("ks_uniform: empty sample");
  }
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f,
                  f - static_cast<double>(i) / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
  bool degenerate = false; // zero-variance differences
};

/// Classical two-sided paired t-test.
inline TTestResult paired_ttest(std::span<const double> a,
                                std::span<const double> b, double alpha = 0.05) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ShapeError("paired_ttest: need equal lengths >= 2");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  const double m = mean_of(d);
  double ss = 0.0;
  for (double v : d) {
    ss += (v - m) * (v - m);
  }
  TTestResult r;
  if (ss == 0.0) {
    if (m == 0.0) {
      return r; // identical samples: p = 1 by convention
    }
    r.degenerate = true;
    r.t_statistic = m > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.significant = true;
    return r;
  }
  const double n = static_cast<double>(d.size());
  const double se = std::sqrt(ss / (n - 1.0) / n);
  r.t_statistic = m / se;
  const boost::math::students_t dist(n - 1.0);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(
                        dist, std::abs(r.t_statistic)));
  r.significant = r.p_value < alpha;
  return r;
}

} // namespace gpcc

#endif // GPCC_STATS_HPP_
