// Seeded multi-run experiment driver, learning-curve aggregation, Novelty Map
// update telemetry and the text formats they are written in.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "notc/learner.hpp"
#include "notc/mountain_car.hpp"

namespace notc {

using Rng = std::mt19937_64;

/// Raised for invalid configuration; `key()` names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  EnvKind env_kind = EnvKind::Mc;
  EnvConfig env = EnvConfig::preset(EnvKind::Mc);
  LearnerParams learner;
  std::size_t n_runs = 30;
  std::size_t n_trials = 20000;
  std::size_t window = 100;
  std::uint64_t base_seed = 0;
  /// Environment trial index of the first trial (selects the weather phase).
  std::size_t trial_offset = 0;

  void validate() const {
    if (n_runs == 0) throw ConfigError("runs", "must be positive");
    if (n_trials == 0) throw ConfigError("trials", "must be positive");
    if (window == 0) throw ConfigError("window", "must be positive");
    if (window > n_trials) throw ConfigError("window", "must not exceed trials");
    try {
      env.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("env", e.what());
    }
    try {
      learner.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("learner", e.what());
    }
    if (learner.spec.n_inputs != 2 || learner.spec.n_outputs != 1)
      throw ConfigError("learner", "mountain car needs a 2-input, 1-output network");
  }
};

struct TrialRecord {
  std::size_t run_id = 0;
  std::size_t trial = 0;
  std::size_t steps = 0;
  double accumulated_reward = 0.0;
  Phase phase = Phase::Normal;
  std::size_t map_updates_delta = 0;
  double v_max = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct CurvePoint {
  std::size_t window_index = 0;
  double mean_best_reward = 0.0;
  double std_best_reward = 0.0;
};

struct WindowUpdates {
  std::size_t window_index = 0;
  std::size_t updates = 0;
};

struct RunResult {
  std::vector<TrialRecord> records;
  Learner learner;
};

/// One run seeded with base_seed + run_id. Draw order: population
/// initialization, then per trial the reset observation noise, and per step
/// the actor choice followed by the step's observation noise; evolution
/// draws follow the trial that triggers it.
inline RunResult run_single(const ExperimentConfig& config, std::size_t run_id) {
  config.validate();
  Rng rng(config.base_seed + run_id);
  Learner learner(config.learner, rng);
  MountainCar env(config.env);
  std::vector<TrialRecord> records;
  records.reserve(config.n_trials);

  for (std::size_t t = 0; t < config.n_trials; ++t) {
    const std::size_t trial_index = config.trial_offset + t;
    const std::size_t updates_before = learner.map().update_count();
    const Phase phase = learner.phase();
    Observation obs = env.reset(trial_index, rng);
    double last_reward = 0.0;
    double accumulated = 0.0;
    std::size_t steps = 0;
    for (;;) {
      const Observation x = env.normalize(obs);
      const double a = learner.act(x, last_reward, rng);
      const StepResult r = env.step(a, rng);
      ++steps;
      accumulated += r.reward;
      if (r.terminal) {
        learner.end_trial(r.reward, accumulated);
        break;
      }
      obs = r.observation;
      last_reward = r.reward;
    }
    records.push_back({run_id, trial_index, steps, accumulated, phase,
                       learner.map().update_count() - updates_before, env.v_max()});
    learner.maybe_evolve(rng);
  }
  return {std::move(records), std::move(learner)};
}

/// All runs, ordered by (run_id, trial).
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<TrialRecord> all;
  all.reserve(config.n_runs * config.n_trials);
  for (std::size_t r = 0; r < config.n_runs; ++r) {
    auto run = run_single(config, r);
    all.insert(all.end(), run.records.begin(), run.records.end());
  }
  return all;
}

namespace detail {
inline std::map<std::size_t, std::vector<const TrialRecord*>> by_run(const std::vector<TrialRecord>& records) {
  std::map<std::size_t, std::vector<const TrialRecord*>> runs;
  for (const auto& r : records) runs[r.run_id].push_back(&r);
  for (auto& [id, v] : runs) {
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
  }
  return runs;
}
}  // namespace detail

/// Per run, the best reward of each consecutive `window`-trial block.
/// A partial final block is dropped.
inline std::map<std::size_t, std::vector<double>> window_maxima(const std::vector<TrialRecord>& records,
                                                                std::size_t window) {
  if (records.empty()) throw std::invalid_argument("window_maxima: no records");
  if (window == 0) throw std::invalid_argument("window_maxima: window must be positive");
  std::map<std::size_t, std::vector<double>> out;
  for (const auto& [id, trials] : detail::by_run(records)) {
    auto& maxima = out[id];
    for (std::size_t w = 0; (w + 1) * window <= trials.size(); ++w) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t k = w * window; k < (w + 1) * window; ++k) m = std::max(m, trials[k]->accumulated_reward);
      maxima.push_back(m);
    }
  }
  return out;
}

/// Learning curve: mean and population standard deviation across runs of
/// each window's best reward.
inline std::vector<CurvePoint> aggregate(const std::vector<TrialRecord>& records, std::size_t window) {
  const auto maxima = window_maxima(records, window);
  std::size_t n_windows = std::numeric_limits<std::size_t>::max();
  for (const auto& [id, m] : maxima) n_windows = std::min(n_windows, m.size());
  std::vector<CurvePoint> curve;
  for (std::size_t w = 0; w < n_windows; ++w) {
    double sum = 0.0;
    for (const auto& [id, m] : maxima) sum += m[w];
    const double n = static_cast<double>(maxima.size());
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& [id, m] : maxima) var += (m[w] - mean) * (m[w] - mean);
    curve.push_back({w, mean, std::sqrt(var / n)});
  }
  return curve;
}

/// Map updates per window summed over runs. Unlike the curve, a trailing
/// partial window is kept so the totals match the maps' update counters.
inline std::vector<WindowUpdates> update_decay_report(const std::vector<TrialRecord>& records, std::size_t window) {
  if (records.empty()) throw std::invalid_argument("update_decay_report: no records");
  if (window == 0) throw std::invalid_argument("update_decay_report: window must be positive");
  std::vector<WindowUpdates> out;
  for (const auto& [id, trials] : detail::by_run(records)) {
    for (std::size_t k = 0; k < trials.size(); ++k) {
      const std::size_t w = k / window;
      if (out.size() <= w) {
        const std::size_t old = out.size();
        out.resize(w + 1);
        for (std::size_t i = old; i <= w; ++i) out[i].window_index = i;
      }
      out[w].updates += trials[k]->map_updates_delta;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr const char* kRecordsHeader = "run_id,trial,steps,accumulated_reward,phase,map_updates_delta";
inline constexpr const char* kCurveHeader = "window_index,mean_best_reward,std_best_reward";
inline constexpr const char* kUpdatesHeader = "window_index,map_updates";

/// `with_v_max` appends a v_max debug column.
inline void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records, bool with_v_max = false) {
  os << kRecordsHeader << (with_v_max ? ",v_max" : "") << '\n';
  for (const auto& r : records) {
    os << r.run_id << ',' << r.trial << ',' << r.steps << ',' << format_real(r.accumulated_reward) << ','
       << to_string(r.phase) << ',' << r.map_updates_delta;
    if (with_v_max) os << ',' << format_real(r.v_max);
    os << '\n';
  }
}

inline std::vector<TrialRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("records csv: empty input");
  const bool with_v_max = line == std::string(kRecordsHeader) + ",v_max";
  if (line != kRecordsHeader && !with_v_max) throw std::runtime_error("records csv: unexpected header '" + line + "'");
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != (with_v_max ? 7u : 6u)) throw std::runtime_error("records csv: bad field count on line " + std::to_string(lineno));
    TrialRecord r;
    try {
      r.run_id = std::stoull(f[0]);
      r.trial = std::stoull(f[1]);
      r.steps = std::stoull(f[2]);
      r.accumulated_reward = std::stod(f[3]);
      if (f[4] == "NORMAL") r.phase = Phase::Normal;
      else if (f[4] == "REPLAY") r.phase = Phase::Replay;
      else throw std::invalid_argument("phase");
      r.map_updates_delta = std::stoull(f[5]);
      if (with_v_max) r.v_max = std::stod(f[6]);
    } catch (const std::exception&) {
      throw std::runtime_error("records csv: malformed value on line " + std::to_string(lineno));
    }
    out.push_back(r);
  }
  return out;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
  os << kCurveHeader << '\n';
  for (const auto& p : curve)
    os << p.window_index << ',' << format_real(p.mean_best_reward) << ',' << format_real(p.std_best_reward) << '\n';
}

inline void write_updates_csv(std::ostream& os, const std::vector<WindowUpdates>& report) {
  os << kUpdatesHeader << '\n';
  for (const auto& w : report) os << w.window_index << ',' << w.updates << '\n';
}

/// Population snapshot: a header line, then per cell its map weight array
/// (or "-" while the slot is unused) followed by one line per individual:
/// group, index, fitness, genes.
inline void write_population_snapshot(std::ostream& os, const Learner& learner) {
  const auto& pop = learner.population();
  const auto& map = learner.map();
  os << "notc-population 1\n";
  os << "cells " << pop.n_cells() << " best " << pop.n_best() << " novel " << pop.n_novel() << " genes "
     << pop.spec().chromosome_length() << '\n';
  auto individual = [&os](const char* group, std::size_t i, const Individual& ind) {
    os << group << ' ' << i << ' ' << format_real(ind.fitness);
    for (double g : ind.chromosome.genes) os << ' ' << format_real(g);
    os << '\n';
  };
  for (std::size_t c = 0; c < pop.n_cells(); ++c) {
    os << "cell " << c << " weights";
    if (c < map.size()) {
      for (double w : map.cell(c)) os << ' ' << format_real(w);
    } else {
      os << " -";
    }
    os << '\n';
    const auto& cell = pop.cell(c);
    for (std::size_t i = 0; i < cell.best.size(); ++i) individual("best", i, cell.best[i]);
    for (std::size_t i = 0; i < cell.novel.size(); ++i) individual("novel", i, cell.novel[i]);
  }
}

// ---------------------------------------------------------------------------
// key=value configuration

using Settings = std::map<std::string, std::string>;

/// Parses flat `key=value` lines; blank lines and `#` comments are skipped.
inline Settings parse_settings(std::istream& is) {
  Settings out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace detail {
inline std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

inline double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(d)) throw ConfigError(key, "expected a number, got '" + v + "'");
  return d;
}
}  // namespace detail

/// Keys accepted by apply_settings.
inline const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "env",        "runs",      "trials",          "window",          "seed",           "cells",
      "best",       "novel",     "hidden",          "eta",             "gamma",          "iota",
      "cr",         "f_min",     "f_max",           "noise_pos_sigma", "noise_vel_sigma", "weather_period",
      "step_cap",   "base_v_max", "reduced_v_max",  "trial_offset"};
  return keys;
}

/// Builds a config from defaults plus settings. The environment preset is
/// applied first so numeric overrides always win over it.
inline ExperimentConfig make_config(const Settings& settings) {
  ExperimentConfig c;
  const auto& known = setting_keys();
  for (const auto& [k, v] : settings) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(k, "unknown setting");
  }
  if (auto it = settings.find("env"); it != settings.end()) {
    const auto kind = parse_env_kind(it->second);
    if (!kind) throw ConfigError("env", "expected mc, mc-noisy or mc-weather, got '" + it->second + "'");
    c.env_kind = *kind;
    c.env = EnvConfig::preset(*kind);
  }
  using detail::to_count;
  using detail::to_real;
  for (const auto& [k, v] : settings) {
    if (k == "env") continue;
    else if (k == "runs") c.n_runs = to_count(k, v);
    else if (k == "trials") c.n_trials = to_count(k, v);
    else if (k == "window") c.window = to_count(k, v);
    else if (k == "seed") c.base_seed = to_count(k, v);
    else if (k == "cells") c.learner.map_size = to_count(k, v);
    else if (k == "best") c.learner.n_best = to_count(k, v);
    else if (k == "novel") c.learner.n_novel = to_count(k, v);
    else if (k == "hidden") c.learner.spec.n_hidden = to_count(k, v);
    else if (k == "eta") c.learner.eta = to_real(k, v);
    else if (k == "gamma") c.learner.gamma = to_real(k, v);
    else if (k == "iota") c.learner.iota = to_count(k, v);
    else if (k == "cr") c.learner.de.crossover_rate = to_real(k, v);
    else if (k == "f_min") c.learner.de.f_min = to_real(k, v);
    else if (k == "f_max") c.learner.de.f_max = to_real(k, v);
    else if (k == "noise_pos_sigma") c.env.noise_pos_sigma = to_real(k, v);
    else if (k == "noise_vel_sigma") c.env.noise_vel_sigma = to_real(k, v);
    else if (k == "weather_period") {
      const auto p = to_count(k, v);
      c.env.weather_period = p == 0 ? std::nullopt : std::optional<std::size_t>(p);
    }
    else if (k == "step_cap") c.env.step_cap = to_count(k, v);
    else if (k == "base_v_max") c.env.base_v_max = to_real(k, v);
    else if (k == "reduced_v_max") c.env.reduced_v_max = to_real(k, v);
    else if (k == "trial_offset") c.trial_offset = to_count(k, v);
  }
  c.learner.action_min = c.env.action_min;
  c.learner.action_max = c.env.action_max;
  c.validate();
  return c;
}

}  // namespace notc
