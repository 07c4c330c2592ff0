// gpcc: synthetic data, PIT pseudo-series, rolling evaluation and parameter
// path dumps for GP conditional copulas.
//
// Settings come from, lowest precedence first: built-in defaults, --config
// FILE, GPCC_* environment variables, --set key=value, command flags.
//
// Exit status: 0 ok, 1 run failure (including a method failing at every
// step), 2 usage or configuration error, 3 bad input data.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpcc/gpcc.hpp"

extern char **environ;

namespace {

struct Shortcut {
  std::string flag;
  std::string key;
  std::optional<std::string> value;
};

// Flags that set one config key each.
std::vector<Shortcut> shortcuts_for(const std::string &cmd) {
  if (cmd == "synth") {
    return {{"--family", "synth.family", {}},   {"--length", "synth.length", {}},
            {"--seed", "synth.seed", {}},       {"-o,--output", "synth.output", {}},
            {"--truth", "synth.truth_output", {}}};
  }
  if (cmd == "pit") {
    return {{"--x", "pit.x", {}},         {"--y", "pit.y", {}},
            {"--kind", "pit.kind", {}},   {"--n-w", "pit.n_w", {}},
            {"--refit-every", "pit.refit_every", {}}, {"-o,--output", "pit.output", {}}};
  }
  if (cmd == "eval") {
    return {{"-i,--input", "eval.input", {}},        {"--methods", "eval.methods", {}},
            {"--n-w", "eval.n_w", {}},               {"--stride", "eval.stride", {}},
            {"--refit-every", "eval.refit_every", {}}, {"--refit-period", "eval.refit_period", {}},
            {"--seed", "eval.seed", {}},             {"--report", "eval.report", {}},
            {"--steps", "eval.steps", {}},           {"--text", "eval.report_text", {}}};
  }
  if (cmd == "paths") {
    return {{"-i,--input", "paths.input", {}}, {"--family", "paths.family", {}},
            {"--n-w", "paths.n_w", {}},        {"--end", "paths.end", {}},
            {"--truth", "paths.truth", {}},    {"-o,--output", "paths.output", {}}};
  }
  return {};
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"GP conditional copulas: synthesis, PIT, rolling evaluation, parameter paths"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<int> threads;
  int verbose = 0;
  bool quiet = false;
  app.add_option("-c,--config", config_file, "config file of 'key = value' lines");
  app.add_option("--set", overrides, "override a key: --set eval.n_w=300 (repeatable)");
  app.add_option("-j,--threads", threads, "worker thread cap")->check(CLI::Range(1, 1024));
  app.add_flag("-v,--verbose", verbose, "more log output");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  std::map<std::string, std::vector<Shortcut>> shortcuts;
  std::map<std::string, CLI::App *> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "write a synthetic pseudo-series and its true parameter paths"},
      {"pit", "map two return series to a pseudo-series with rolling GARCH fits"},
      {"eval", "rolling one-step-ahead comparison of copula methods"},
      {"paths", "posterior mean and 0.1/0.9 bands of the parameters over a window"},
      {"show-config", "print the effective configuration"}};
  for (const auto &[name, help] : commands) {
    auto *sub = app.add_subcommand(name, help);
    subs[name] = sub;
    shortcuts[name] = shortcuts_for(name);
    for (auto &s : shortcuts[name]) {
      sub->add_option(s.flag, s.value, s.key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const gpcc::Logger log(&std::cerr, quiet ? 0 : 1 + verbose);
  std::string cmd;
  for (const auto &[name, sub] : subs) {
    if (sub->parsed()) {
      cmd = name;
    }
  }

  gpcc::Config cfg;
  try {
    if (!config_file.empty()) {
      cfg.load_file(config_file);
    }
    cfg.load_environment(environ);
    for (const auto &o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) {
        throw gpcc::ConfigError("--set expects key=value, got '" + o + "'");
      }
      cfg.set(o.substr(0, eq), o.substr(eq + 1), "--set");
    }
    for (const auto &s : shortcuts[cmd]) {
      if (s.value) {
        cfg.set(s.key, *s.value, "flag");
      }
    }
    if (threads) {
      cfg.set("threads", std::to_string(*threads), "flag");
    }
  } catch (const gpcc::ConfigError &e) {
    std::cerr << "gpcc: error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (cmd == "show-config") {
      cfg.write(std::cout);
      return 0;
    }
    gpcc::CommandResult r;
    if (cmd == "synth") {
      r = gpcc::cmd_synth(cfg, log);
    } else if (cmd == "pit") {
      r = gpcc::cmd_pit(cfg, log);
    } else if (cmd == "eval") {
      r = gpcc::cmd_eval(cfg, log);
    } else if (cmd == "paths") {
      r = gpcc::cmd_paths(cfg, log);
    }
    return r.status;
  } catch (const gpcc::ConfigError &e) {
    std::cerr << "gpcc: error: " << e.what() << '\n';
    return 2;
  } catch (const gpcc::CsvError &e) {
    std::cerr << "gpcc: input error: " << e.what() << '\n';
    return 3;
  } catch (const gpcc::AlignmentError &e) {
    std::cerr << "gpcc: input error: " << e.what() << '\n';
    return 3;
  } catch (const gpcc::ShapeError &e) {
    std::cerr << "gpcc: input error: " << e.what() << '\n';
    return 3;
  } catch (const gpcc::DomainError &e) {
    std::cerr << "gpcc: input error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "gpcc: error: " << e.what() << '\n';
    return 1;
  }
}
