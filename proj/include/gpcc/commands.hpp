#ifndef GPCC_COMMANDS_HPP_
#define GPCC_COMMANDS_HPP_

// Batch commands behind the gpcc tool. Each reads its inputs and settings
// from a Config, writes its CSV outputs and logs progress to `log`.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gpcc/config.hpp"
#include "gpcc/csv.hpp"
#include "gpcc/eval.hpp"
#include "gpcc/marginals.hpp"

namespace gpcc {

struct CommandResult {
  int status = 0; // 0 = every output written and no method failed outright
  std::vector<std::string> outputs;
};

class Logger {
public:
  explicit Logger(std::ostream *out = &std::cerr, int verbosity = 1)
      : out_(out), verbosity_(verbosity) {}

  void info(const std::string &msg) const { emit(1, "", msg); }
  void warn(const std::string &msg) const { emit(0, "warning: ", msg); }
  void debug(const std::string &msg) const { emit(2, "", msg); }

private:
  void emit(int level, const char *prefix, const std::string &msg) const {
    if (out_ && verbosity_ >= level) {
      *out_ << "gpcc: " << prefix << msg << '\n';
    }
  }
  std::ostream *out_;
  int verbosity_;
};

/// Writes `content` to `path` via a temporary file and rename, so a failed
/// run never leaves a truncated output. "-" writes to standard output.
inline void write_output(const std::string &path, const std::string &content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  const std::filesystem::path target(path);
  if (target.has_parent_path() && !std::filesystem::exists(target.parent_path())) {
    throw Error("output directory does not exist: " + target.parent_path().string());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      throw Error("cannot write " + path);
    }
  }
  std::filesystem::rename(tmp, target);
}

inline GpccSettings gp_settings(const Config &c) {
  GpccSettings s;
  s.pseudo_inputs = c.size("gp.pseudo_inputs");
  s.mc_draws = c.size("gp.mc_draws");
  s.lambda = c.real("gp.lambda");
  s.beta = c.real("gp.beta");
  s.gamma = c.real("gp.gamma");
  s.ep.max_evidence_evals = static_cast<int>(c.integer("gp.evidence_evals"));
  s.ep.max_iterations = static_cast<int>(c.integer("gp.ep_max_iterations"));
  s.ep.tolerance = c.real("gp.ep_tolerance");
  s.ep.damping = c.real("gp.damping");
  return s;
}

inline RollingConfig rolling_config(const Config &c) {
  RollingConfig r;
  r.n_w = c.size("eval.n_w");
  r.stride = c.size("eval.stride");
  r.refit_every = c.size("eval.refit_every");
  r.refit_period = c.size("eval.refit_period");
  r.seed = static_cast<std::uint64_t>(c.integer("eval.seed"));
  r.threads = static_cast<unsigned>(c.integer("threads"));
  r.validate();
  return r;
}

inline std::string require_path(const Config &c, std::string_view key) {
  auto p = c.str(key);
  if (p.empty()) {
    throw ConfigError(std::string(key) + " is required");
  }
  return p;
}

inline PseudoSeries read_pseudo_series(const std::string &path) {
  try {
    return parse_pseudo_series(read_csv_file(path));
  } catch (const CsvError &e) {
    const std::string what = e.what();
    throw CsvError(what.starts_with(path) ? what : path + ": " + what);
  }
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string truth_csv(const SyntheticData &d) {
  std::ostringstream out;
  std::vector<std::string> header{"t"};
  for (const auto &n : parameter_names(d.family)) {
    header.push_back(n);
  }
  write_csv_row(out, header);
  for (std::size_t t = 0; t < d.truth.size(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (std::size_t j = 0; j < parameter_count(d.family); ++j) {
      row.push_back(format_number(d.truth[t].values[j]));
    }
    write_csv_row(out, row);
  }
  return out.str();
}

} // namespace detail

inline CommandResult cmd_synth(const Config &c, const Logger &log = Logger()) {
  const auto family = parse_family(c.str("synth.family"));
  const auto length = c.size("synth.length");
  const auto seed = static_cast<std::uint64_t>(c.integer("synth.seed"));
  const auto d = gen_synthetic(family, length, seed);
  CommandResult r;
  std::ostringstream series;
  write_pseudo_series(series, d.series);
  write_output(require_path(c, "synth.output"), series.str());
  r.outputs.push_back(c.str("synth.output"));
  if (!c.str("synth.truth_output").empty()) {
    write_output(c.str("synth.truth_output"), detail::truth_csv(d));
    r.outputs.push_back(c.str("synth.truth_output"));
  }
  log.info("synth: " + std::string(to_string(family)) + ", " + std::to_string(length) +
           " points, seed " + std::to_string(seed));
  return r;
}

inline CommandResult cmd_pit(const Config &c, const Logger &log = Logger()) {
  const auto kind_name = c.str("pit.kind");
  const SeriesKind kind = kind_name == "return"  ? SeriesKind::Return
                          : kind_name == "price" ? SeriesKind::Price
                                                 : SeriesKind::Auto;
  auto load = [&](std::string_view key) {
    const auto path = require_path(c, key);
    try {
      return parse_return_series(read_csv_file(path), kind);
    } catch (const CsvError &e) {
      const std::string what = e.what();
      throw CsvError(what.starts_with(path) ? what : path + ": " + what);
    } catch (const DomainError &e) {
      throw DomainError(path + ": " + e.what());
    }
  };
  const auto x = load("pit.x");
  const auto y = load("pit.y");
  RollingPitOptions o;
  o.n_w = c.size("pit.n_w");
  o.refit_every = c.size("pit.refit_every");
  o.threads = static_cast<unsigned>(std::min<long long>(2, c.integer("threads")));
  if (x.size() <= o.n_w) {
    throw ShapeError("pit: series have " + std::to_string(x.size()) +
                     " returns; need more than n_W = " + std::to_string(o.n_w));
  }
  log.info("pit: " + std::to_string(x.size()) + " returns, n_W " + std::to_string(o.n_w) +
           ", refit every " + std::to_string(o.refit_every));
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = rolling_pit(x, y, o);
  for (int m = 0; m < 2; ++m) {
    if (res.refit_failures[static_cast<std::size_t>(m)] > 0) {
      log.warn("pit: " + std::to_string(res.refit_failures[static_cast<std::size_t>(m)]) +
               " GARCH refits failed on " + (m == 0 ? "x" : "y") + "; previous fits kept");
    }
  }
  std::ostringstream out;
  write_pseudo_series(out, res.series);
  write_output(require_path(c, "pit.output"), out.str());
  std::ostringstream done;
  done << "pit: wrote " << res.series.size() << " pairs in " << std::fixed
       << std::setprecision(1) << detail::seconds_since(t0) << " s";
  log.info(done.str());
  return {0, {c.str("pit.output")}};
}

struct EvalCommandResult : CommandResult {
  EvalReport report;
};

inline EvalCommandResult cmd_eval(const Config &c, const Logger &log = Logger()) {
  const auto series = read_pseudo_series(require_path(c, "eval.input"));
  const auto rc = rolling_config(c);
  if (series.size() <= rc.n_w) {
    throw ShapeError("eval: series has " + std::to_string(series.size()) +
                     " points; need more than n_W = " + std::to_string(rc.n_w));
  }
  const auto gp = gp_settings(c);
  std::vector<std::unique_ptr<EvalMethod>> methods;
  for (const auto &name : c.list("eval.methods")) {
    methods.push_back(make_method(name, gp));
  }
  log.info("eval: " + std::to_string(methods.size()) + " methods, " +
           std::to_string(evaluation_steps(series.size(), rc).size()) + " steps, " +
           std::to_string(rc.threads) + " threads");
  const auto t0 = std::chrono::steady_clock::now();
  EvalCommandResult r;
  r.report = rolling_eval(methods, series, rc);
  std::ostringstream done;
  done << "eval: finished in " << std::fixed << std::setprecision(1)
       << detail::seconds_since(t0) << " s";
  log.info(done.str());

  for (std::size_t m = 0; m < r.report.methods.size(); ++m) {
    if (r.report.evaluated[m] == 0) {
      log.warn(r.report.methods[m] + " failed at every step: " + r.report.first_error[m]);
      r.status = 1;
    } else if (r.report.missing[m] > 0) {
      log.warn(r.report.methods[m] + ": " + std::to_string(r.report.missing[m]) +
               " steps missing; first: " + r.report.first_error[m]);
    }
  }
  write_output(require_path(c, "eval.report"), render_report(r.report, ReportFormat::Csv));
  r.outputs.push_back(c.str("eval.report"));
  if (!c.str("eval.steps").empty()) {
    write_output(c.str("eval.steps"), render_steps_csv(r.report));
    r.outputs.push_back(c.str("eval.steps"));
  }
  if (!c.str("eval.report_text").empty()) {
    write_output(c.str("eval.report_text"), render_report(r.report, ReportFormat::Text));
    r.outputs.push_back(c.str("eval.report_text"));
  }
  return r;
}

namespace detail {

// Truth CSV from synth, keyed by t.
inline std::map<std::size_t, std::vector<double>> read_truth(const std::string &path,
                                                             CopulaFamily family) {
  const auto t = read_csv_file(path);
  const auto it = t.require("t");
  std::vector<std::size_t> cols;
  for (const auto &n : parameter_names(family)) {
    cols.push_back(t.require(n));
  }
  std::map<std::size_t, std::vector<double>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double step = parse_number(t.rows[r][it], r + 2, "t");
    std::vector<double> v;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      v.push_back(parse_number(t.rows[r][cols[j]], r + 2, t.header[cols[j]]));
    }
    out[static_cast<std::size_t>(step)] = std::move(v);
  }
  return out;
}

} // namespace detail

inline CommandResult cmd_paths(const Config &c, const Logger &log = Logger()) {
  const auto series = read_pseudo_series(require_path(c, "paths.input"));
  const auto family = parse_family(c.str("paths.family"));
  const std::size_t n_w = c.size("paths.n_w");
  const std::size_t end = c.size("paths.end") == 0 ? series.size() : c.size("paths.end");
  if (end > series.size() || end < n_w) {
    throw ShapeError("paths: need n_W <= end <= series length (" + std::to_string(n_w) +
                     ", " + std::to_string(end) + ", " + std::to_string(series.size()) + ")");
  }
  const std::size_t first = end - n_w;
  std::map<std::size_t, std::vector<double>> truth;
  if (!c.str("paths.truth").empty()) {
    truth = detail::read_truth(c.str("paths.truth"), family);
  }
  log.info("paths: fitting " + std::string(to_string(family)) + " on t = [" +
           std::to_string(first) + ", " + std::to_string(end) + ")");
  const auto t0 = std::chrono::steady_clock::now();
  const std::span<const UnitPair> window(series.pairs.data() + first, n_w);
  const auto state = fit_gpcc(family, window, gp_settings(c));
  const auto rows = parameter_paths(state, first);

  std::ostringstream out;
  std::vector<std::string> header{"t"};
  const bool dated = !series.dates.empty();
  if (dated) {
    header.push_back("date");
  }
  for (const auto &n : parameter_names(family)) {
    for (const char *suffix : {"_mean", "_median", "_q10", "_q90"}) {
      header.push_back(n + suffix);
    }
    if (!truth.empty()) {
      header.push_back(n + "_truth");
    }
  }
  write_csv_row(out, header);
  for (const auto &row : rows) {
    std::vector<std::string> f{std::to_string(row.t)};
    if (dated) {
      f.push_back(format_iso_date(series.dates[row.t]));
    }
    const auto tr = truth.find(row.t);
    for (std::size_t j = 0; j < row.bands.size(); ++j) {
      const auto &b = row.bands[j];
      for (double v : {b.mean, b.median, b.q10, b.q90}) {
        f.push_back(format_number(v));
      }
      if (!truth.empty()) {
        f.push_back(tr == truth.end() ? "" : format_number(tr->second[j]));
      }
    }
    write_csv_row(out, f);
  }
  write_output(require_path(c, "paths.output"), out.str());
  std::ostringstream done;
  done << "paths: wrote " << rows.size() << " rows in " << std::fixed << std::setprecision(1)
       << detail::seconds_since(t0) << " s";
  log.info(done.str());
  return {0, {c.str("paths.output")}};
}

} // namespace gpcc

#endif // GPCC_COMMANDS_HPP_
