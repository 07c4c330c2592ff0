#ifndef GPCC_TIMESERIES_HPP_
#define GPCC_TIMESERIES_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpcc/copula.hpp"
#include "gpcc/errors.hpp"

namespace gpcc {

using Date = std::chrono::sys_days;

/// Strict YYYY-MM-DD.
inline std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    return std::nullopt;
  }
  auto digits = [&](std::size_t from, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = from; i < from + len; ++i) {
      if (s[i] < '0' || s[i] > '9') {
        return -1;
      }
      v = 10 * v + (s[i] - '0');
    }
    return v;
  };
  const int y = digits(0, 4);
  const int m = digits(5, 2);
  const int d = digits(8, 2);
  if (y < 0 || m < 0 || d < 0) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    return std::nullopt;
  }
  return Date{ymd};
}

inline std::string format_iso_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Dated univariate series (log-returns once ingested).
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (dates.size() != values.size()) {
      throw ShapeError("return series: dates and values differ in length");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw DomainError("return series: non-finite value at " + format_iso_date(dates[i]));
      }
      if (i > 0 && !(dates[i - 1] < dates[i])) {
        throw DomainError("return series: dates not strictly increasing at " +
                          format_iso_date(dates[i]));
      }
    }
  }
};

/// Log-returns from a price series; the first date is dropped.
inline ReturnSeries log_returns(const ReturnSeries &prices) {
  ReturnSeries r;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    if (!(prices.values[i] > 0.0 && prices.values[i - 1] > 0.0)) {
      throw DomainError("log_returns: non-positive price at " +
                        format_iso_date(prices.dates[i]));
    }
    r.dates.push_back(prices.dates[i]);
    r.values.push_back(std::log(prices.values[i] / prices.values[i - 1]));
  }
  return r;
}

/// Throws AlignmentError naming up to five offending dates when the two
/// series do not share the same date sequence.
inline void require_aligned(const ReturnSeries &a, const ReturnSeries &b) {
  std::vector<std::string> bad;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n && bad.size() < 5; ++i) {
    if (i >= a.size()) {
      bad.push_back(format_iso_date(b.dates[i]) + " (only in second series)");
    } else if (i >= b.size()) {
      bad.push_back(format_iso_date(a.dates[i]) + " (only in first series)");
    } else if (a.dates[i] != b.dates[i]) {
      bad.push_back(format_iso_date(a.dates[i]) + " vs " + format_iso_date(b.dates[i]));
    }
  }
  if (!bad.empty()) {
    std::string msg = "series are not aligned; first mismatch at row ";
    std::size_t first = 0;
    while (first < std::min(a.size(), b.size()) && a.dates[first] == b.dates[first]) {
      ++first;
    }
    msg += std::to_string(first + 1) + ": ";
    for (std::size_t i = 0; i < bad.size(); ++i) {
      msg += (i ? ", " : "") + bad[i];
    }
    throw AlignmentError(msg);
  }
}

/// Copula pseudo-sample. `dates` is empty for synthetic series, which are
/// indexed by t = 0, 1, ...
struct PseudoSeries {
  std::vector<Date> dates;
  std::vector<UnitPair> pairs;

  std::size_t size() const { return pairs.size(); }
};

} // namespace gpcc

#endif // GPCC_TIMESERIES_HPP_
