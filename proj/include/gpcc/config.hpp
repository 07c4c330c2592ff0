#ifndef GPCC_CONFIG_HPP_
#define GPCC_CONFIG_HPP_

// Run configuration: flat dotted keys ("eval.n_w = 500"), '#' comments.
// Layers, lowest first: built-in defaults, config file, GPCC_* environment
// variables, command-line overrides. Unknown keys are rejected at every layer.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpcc/csv.hpp"
#include "gpcc/errors.hpp"

namespace gpcc {

enum class KeyType { Int, Real, String, Bool, List };

struct KeySpec {
  std::string key;
  KeyType type = KeyType::String;
  std::string default_value;
  std::string help;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool min_exclusive = false;
  std::vector<std::string> choices; // String / List items; empty = free text
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline const std::vector<KeySpec> &config_schema() {
  static const std::vector<KeySpec> keys = [] {
    const std::vector<std::string> methods{"GPCC-G", "GPCC-T", "GPCC-SJC", "HMM",
                                           "TVC",    "DSJCC",  "CONST-G",  "CONST-T",
                                           "CONST-SJC"};
    const std::vector<std::string> families{"gaussian", "student", "sjc"};
    std::vector<KeySpec> k;
    k.push_back({"threads", KeyType::Int, "1", "worker thread cap", 1, 1024});

    k.push_back({"synth.family", KeyType::String, "student", "copula family", 0, 0, false, families});
    k.push_back({"synth.length", KeyType::Int, "1200", "number of time steps", 2, 1e8});
    k.push_back({"synth.seed", KeyType::Int, "0", "random seed", 0, 9.007199254740992e15});
    k.push_back({"synth.output", KeyType::String, "synthetic.csv", "pseudo-series CSV (t,u,v)"});
    k.push_back({"synth.truth_output", KeyType::String, "synthetic_truth.csv",
                 "true parameter paths CSV; empty to skip"});

    k.push_back({"pit.x", KeyType::String, "", "first series CSV (date, return|price)"});
    k.push_back({"pit.y", KeyType::String, "", "second series CSV (date, return|price)"});
    k.push_back({"pit.kind", KeyType::String, "auto", "value column kind", 0, 0, false,
                 {"auto", "return", "price"}});
    k.push_back({"pit.n_w", KeyType::Int, "2016", "marginal fit window length", 250, 1e8});
    k.push_back({"pit.refit_every", KeyType::Int, "1", "GARCH refit every k steps", 1, 1e8});
    k.push_back({"pit.output", KeyType::String, "pseudo.csv", "pseudo-series CSV (date,u,v)"});

    k.push_back({"eval.input", KeyType::String, "", "pseudo-series CSV"});
    k.push_back({"eval.methods", KeyType::List,
                 "GPCC-G,GPCC-T,GPCC-SJC,HMM,TVC,DSJCC,CONST-G,CONST-T,CONST-SJC",
                 "methods, comma separated", 0, 0, false, methods});
    k.push_back({"eval.n_w", KeyType::Int, "500", "training window length", 50, 1e8});
    k.push_back({"eval.stride", KeyType::Int, "10", "steps between evaluations", 1, 1e8});
    k.push_back({"eval.refit_every", KeyType::Int, "25",
                 "GP hyperparameter refit every k evaluations", 1, 1e8});
    k.push_back({"eval.refit_period", KeyType::Int, "0",
                 "GP refit period in time steps; 0 = refit_every * stride", 0, 1e8});
    k.push_back({"eval.seed", KeyType::Int, "0", "Monte Carlo seed", 0, 9.007199254740992e15});
    k.push_back({"eval.report", KeyType::String, "report.csv", "summary CSV"});
    k.push_back({"eval.report_text", KeyType::String, "-",
                 "aligned text summary; '-' = stdout, empty to skip"});
    k.push_back({"eval.steps", KeyType::String, "steps.csv",
                 "per-step log-likelihood CSV; empty to skip"});

    k.push_back({"paths.input", KeyType::String, "", "pseudo-series CSV"});
    k.push_back({"paths.family", KeyType::String, "student", "copula family", 0, 0, false, families});
    k.push_back({"paths.n_w", KeyType::Int, "500", "window length", 2, 1e8});
    k.push_back({"paths.end", KeyType::Int, "0",
                 "window ends before this index; 0 = series length", 0, 1e8});
    k.push_back({"paths.truth", KeyType::String, "", "truth CSV from synth; empty for none"});
    k.push_back({"paths.output", KeyType::String, "paths.csv", "parameter band CSV"});

    k.push_back({"gp.pseudo_inputs", KeyType::Int, "30", "FITC pseudo-inputs per function", 1, 1e5});
    k.push_back({"gp.mc_draws", KeyType::Int, "1000", "draws for the predictive density", 1, 1e8});
    k.push_back({"gp.lambda", KeyType::Real, "50", "initial squared-exponential lengthscale", 0,
                 kUnbounded, true});
    k.push_back({"gp.beta", KeyType::Real, "0.5", "initial signal variance", 0, kUnbounded, true});
    k.push_back({"gp.gamma", KeyType::Real, "0.01", "initial noise variance", 0, kUnbounded, true});
    k.push_back({"gp.evidence_evals", KeyType::Int, "25",
                 "evidence evaluations per hyperparameter search", 1, 1e6});
    k.push_back({"gp.ep_max_iterations", KeyType::Int, "100", "EP passes per latent", 1, 1e6});
    k.push_back({"gp.ep_tolerance", KeyType::Real, "1e-4", "EP site convergence tolerance", 0,
                 kUnbounded, true});
    k.push_back({"gp.damping", KeyType::Real, "0.5", "EP damping factor", 0, 1, true});
    return k;
  }();
  return keys;
}

inline const KeySpec *find_key(std::string_view key) {
  for (const auto &k : config_schema()) {
    if (k.key == key) {
      return &k;
    }
  }
  return nullptr;
}

/// Environment variable for a key: GPCC_ + upper-case key with '.' -> '_'.
inline std::string env_name(std::string_view key) {
  std::string out = "GPCC_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) {
      out.push_back(item);
    }
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    return false;
  }
  return std::nullopt;
}

} // namespace detail

class Config {
public:
  Config() {
    for (const auto &k : config_schema()) {
      values_[k.key] = k.default_value;
      origin_[k.key] = "default";
    }
  }

  /// Sets a key after checking its value against the schema.
  void set(std::string_view key, std::string_view value, std::string_view origin = "override") {
    const auto *spec = find_key(key);
    if (!spec) {
      throw ConfigError("unknown key '" + std::string(key) + "' (" + std::string(origin) + ")");
    }
    check(*spec, detail::trim(value), origin);
    values_[spec->key] = detail::trim(value);
    origin_[spec->key] = std::string(origin);
  }

  /// "key = value" lines; blank lines and '#' comments ignored.
  void load_text(std::string_view text, std::string_view source) {
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      const auto body = detail::trim(std::string_view(line).substr(0, hash));
      if (body.empty()) {
        continue;
      }
      const auto eq = body.find('=');
      const std::string where = std::string(source) + ":" + std::to_string(line_no);
      if (eq == std::string::npos) {
        throw ConfigError(where + ": expected 'key = value'");
      }
      set(detail::trim(std::string_view(body).substr(0, eq)),
          std::string_view(body).substr(eq + 1), where);
    }
  }

  void load_file(const std::string &path) {
    std::string text;
    try {
      text = read_text_file(path);
    } catch (const CsvError &) {
      throw ConfigError("cannot open config file " + path);
    }
    load_text(text, path);
  }

  /// Applies every GPCC_* variable that names a known key. A GPCC_* variable
  /// that names no key is an error, so typos do not pass silently.
  void load_environment(char **environ_ptr) {
    if (!environ_ptr) {
      return;
    }
    for (char **e = environ_ptr; *e; ++e) {
      const std::string_view entry(*e);
      if (!entry.starts_with("GPCC_")) {
        continue;
      }
      const auto eq = entry.find('=');
      const auto name = entry.substr(0, eq);
      const auto value = eq == std::string_view::npos ? std::string_view{} : entry.substr(eq + 1);
      const KeySpec *spec = nullptr;
      for (const auto &k : config_schema()) {
        if (env_name(k.key) == name) {
          spec = &k;
        }
      }
      if (!spec) {
        throw ConfigError("unknown environment variable " + std::string(name));
      }
      set(spec->key, value, "env " + std::string(name));
    }
  }

  const std::string &raw(std::string_view key) const {
    const auto it = values_.find(std::string(key));
    if (it == values_.end()) {
      throw ConfigError("unknown key '" + std::string(key) + "'");
    }
    return it->second;
  }

  const std::string &origin(std::string_view key) const { return origin_.at(std::string(key)); }

  std::string str(std::string_view key) const { return raw(key); }

  long long integer(std::string_view key) const { return *detail::parse_int(raw(key)); }

  std::size_t size(std::string_view key) const { return static_cast<std::size_t>(integer(key)); }

  double real(std::string_view key) const { return *detail::parse_real(raw(key)); }

  bool boolean(std::string_view key) const { return *detail::parse_bool(raw(key)); }

  std::vector<std::string> list(std::string_view key) const { return detail::split_list(raw(key)); }

  /// Effective configuration in loadable file form.
  void write(std::ostream &out, bool with_help = true) const {
    std::string section;
    for (const auto &k : config_schema()) {
      const auto dot = k.key.find('.');
      const std::string s = dot == std::string::npos ? "" : k.key.substr(0, dot);
      if (s != section) {
        out << '\n';
        section = s;
      }
      if (with_help) {
        out << "# " << k.help;
        if (origin_.at(k.key) != "default") {
          out << " [" << origin_.at(k.key) << "]";
        }
        out << '\n';
      }
      out << k.key << " = " << values_.at(k.key) << '\n';
    }
  }

private:
  static void check(const KeySpec &k, const std::string &v, std::string_view origin) {
    auto fail = [&](const std::string &why) {
      throw ConfigError(k.key + " = '" + v + "' (" + std::string(origin) + "): " + why);
    };
    auto in_range = [&](double x) {
      const bool low_ok = k.min_exclusive ? x > k.min : x >= k.min;
      if (!low_ok || x > k.max) {
        std::ostringstream why;
        why << "must be " << (k.min_exclusive ? "> " : ">= ") << k.min;
        if (std::isfinite(k.max)) {
          why << " and <= " << k.max;
        }
        fail(why.str());
      }
    };
    auto in_choices = [&](const std::string &item) {
      if (!k.choices.empty() &&
          std::find(k.choices.begin(), k.choices.end(), item) == k.choices.end()) {
        std::string all;
        for (const auto &c : k.choices) {
          all += (all.empty() ? "" : ", ") + c;
        }
        fail("'" + item + "' is not one of: " + all);
      }
    };
    switch (k.type) {
    case KeyType::Int: {
      const auto x = detail::parse_int(v);
      if (!x) {
        fail("not an integer");
      }
      in_range(static_cast<double>(*x));
      break;
    }
    case KeyType::Real: {
      const auto x = detail::parse_real(v);
      if (!x) {
        fail("not a number");
      }
      in_range(*x);
      break;
    }
    case KeyType::Bool:
      if (!detail::parse_bool(v)) {
        fail("not a boolean");
      }
      break;
    case KeyType::String:
      in_choices(v);
      break;
    case KeyType::List: {
      const auto items = detail::split_list(v);
      if (items.empty()) {
        fail("list is empty");
      }
      for (std::size_t i = 0; i < items.size(); ++i) {
        in_choices(items[i]);
        if (std::find(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(i), items[i]) !=
            items.begin() + static_cast<std::ptrdiff_t>(i)) {
          fail("'" + items[i] + "' listed twice");
        }
      }
      break;
    }
    }
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;
};

} // namespace gpcc

#endif // GPCC_CONFIG_HPP_
