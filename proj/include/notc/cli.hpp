// Command-line front end: run, aggregate and snapshot subcommands.
// Exit status: 0 success, 2 configuration/usage error, 1 runtime failure.
#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "notc/experiment.hpp"

namespace notc::cli {

inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kConfigError = 2;

namespace detail {

struct ConfigFlags {
  std::optional<std::string> config_file;
  std::vector<std::string> sets;
  // Flag name -> value, in the same vocabulary as the config file.
  std::map<std::string, std::string> flags;
};

inline void add_config_flags(CLI::App& app, ConfigFlags& cf) {
  app.add_option("--config", cf.config_file, "key=value settings file");
  for (const char* key : {"env", "runs", "trials", "window", "seed", "cells", "best", "novel"}) {
    app.add_option_function<std::string>(
        std::string("--") + key, [&cf, key](const std::string& v) { cf.flags[key] = v; }, std::string("override ") + key);
  }
  app.add_option("--set", cf.sets, "override any setting, KEY=VALUE (repeatable)");
}

inline ExperimentConfig resolve(const ConfigFlags& cf) {
  Settings s;
  if (cf.config_file) {
    std::ifstream in(*cf.config_file);
    if (!in) throw ConfigError("config", "cannot open '" + *cf.config_file + "'");
    s = parse_settings(in);
  }
  for (const auto& kv : cf.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(kv, "--set expects KEY=VALUE");
    s[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const auto& [k, v] : cf.flags) s[k] = v;
  return make_config(s);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

inline int main(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Novelty-Organizing Team of Classifiers on the mountain car"};
  app.require_subcommand(1);

  detail::ConfigFlags run_cf;
  std::string run_out = "results";
  bool debug_columns = false;
  auto* run = app.add_subcommand("run", "run an experiment and write records.csv, curve.csv and updates.csv");
  detail::add_config_flags(*run, run_cf);
  run->add_option("--out", run_out, "output directory");
  run->add_flag("--debug-columns", debug_columns, "append a v_max column to records.csv");

  std::string agg_in, agg_out;
  std::size_t agg_window = 100;
  auto* agg = app.add_subcommand("aggregate", "turn a records.csv into a learning curve");
  agg->add_option("--in", agg_in, "records csv")->required();
  agg->add_option("--window", agg_window, "trials per window");
  agg->add_option("--out", agg_out, "curve csv")->required();

  detail::ConfigFlags snap_cf;
  std::string snap_out;
  std::size_t snap_run = 0;
  auto* snap = app.add_subcommand("snapshot", "train one run and dump its final population");
  detail::add_config_flags(*snap, snap_cf);
  snap->add_option("--run", snap_run, "run id to train");
  snap->add_option("--out", snap_out, "snapshot file")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("notc");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*run) {
      const auto config = detail::resolve(run_cf);
      const auto records = run_experiment(config);
      std::filesystem::create_directories(run_out);
      const std::filesystem::path dir(run_out);
      std::ostringstream rec, curve, updates;
      write_records_csv(rec, records, debug_columns);
      write_curve_csv(curve, aggregate(records, config.window));
      write_updates_csv(updates, update_decay_report(records, config.window));
      detail::write_file(dir / "records.csv", rec.str());
      detail::write_file(dir / "curve.csv", curve.str());
      detail::write_file(dir / "updates.csv", updates.str());
      out << "wrote " << records.size() << " records to " << dir.string() << '\n';
    } else if (*agg) {
      if (agg_window == 0) throw ConfigError("window", "must be positive");
      std::ifstream in(agg_in);
      if (!in) throw std::runtime_error("cannot open " + agg_in);
      const auto records = read_records_csv(in);
      std::ostringstream curve;
      write_curve_csv(curve, aggregate(records, agg_window));
      detail::write_file(agg_out, curve.str());
    } else if (*snap) {
      const auto config = detail::resolve(snap_cf);
      if (snap_run >= config.n_runs) throw ConfigError("run", "must be below runs");
      const auto result = run_single(config, snap_run);
      std::ostringstream s;
      write_population_snapshot(s, result.learner);
      detail::write_file(snap_out, s.str());
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace notc::cli
