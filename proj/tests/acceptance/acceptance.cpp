// Acceptance suite. Runs every criterion at full scale and prints one
// PASS/FAIL line per criterion; exits nonzero if any criterion fails.
//
//   notc_acceptance            all criteria
//   notc_acceptance C1 C8      selected criteria only

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "notc/notc.hpp"

using namespace notc;

namespace {

constexpr std::size_t kRuns = 30;
constexpr std::size_t kTrials = 20000;
constexpr std::size_t kWindow = 100;
constexpr std::uint64_t kSeed = 1;
constexpr std::size_t kBaselineTrials = 1000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig base_config(EnvKind kind) {
  ExperimentConfig c;
  c.env_kind = kind;
  c.env = EnvConfig::preset(kind);
  c.n_runs = kRuns;
  c.n_trials = kTrials;
  c.window = kWindow;
  c.base_seed = kSeed;
  return c;
}

// Experiments are shared between criteria and computed on first use.
class Experiments {
 public:
  const std::vector<TrialRecord>& get(const std::string& name, const std::function<ExperimentConfig()>& make) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    auto recs = run_experiment(make());
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  (experiment " << name << ": " << recs.size() << " trials in " << fmt("%.1f", s) << " s)\n";
    return cache_.emplace(name, std::move(recs)).first->second;
  }

 private:
  std::map<std::string, std::vector<TrialRecord>> cache_;
};

double final_window_mean(const std::vector<TrialRecord>& rs) { return aggregate(rs, kWindow).back().mean_best_reward; }

double baseline(EnvKind kind) {
  Rng rng(kSeed + 1000003);
  return random_policy_baseline(EnvConfig::preset(kind), kBaselineTrials, rng);
}

// --- C1 -------------------------------------------------------------------

Verdict dynamics_oracle() {
  // Independent transcription of the car update.
  double pos = -0.5, vel = 0.0;
  Rng noise_rng(0), action_rng(12345);
  std::uniform_real_distribution<double> action(-1.0, 1.0);
  EnvConfig cfg;
  cfg.step_cap = 1000;
  MountainCar env(cfg);
  env.reset(0, noise_rng);
  double worst = 0.0;
  std::size_t steps = 0;
  for (; steps < 1000; ++steps) {
    const double a = action(action_rng);
    const auto r = env.step(a, noise_rng);
    vel = vel + a * 0.001 + std::cos(3 * pos) * (-0.0025);
    vel = std::fmin(std::fmax(vel, -0.07), 0.07);
    pos = pos + vel;
    if (vel < 0 && pos <= -1.2) {
      pos = -1.2;
      vel = 0;
    }
    worst = std::max({worst, std::abs(env.state().pos - pos), std::abs(env.state().vel - vel),
                      std::abs(r.observation[0] - pos), std::abs(r.observation[1] - vel)});
    if (r.terminal) {
      ++steps;
      break;
    }
  }
  return {worst <= 1e-12 && steps == 1000,
          "steps=" + std::to_string(steps) + " max|diff|=" + fmt("%.3g", worst) + " (tol 1e-12)"};
}

// --- C2 -------------------------------------------------------------------

struct BruteMap {
  std::size_t max_size;
  std::vector<std::vector<double>> cells;
  std::size_t updates = 0;

  static double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }

  void observe(const std::vector<double>& x) {
    if (cells.size() < max_size) {
      cells.push_back(x);
      ++updates;
      return;
    }
    double nx = std::numeric_limits<double>::infinity();
    for (const auto& c : cells) nx = std::min(nx, dist(x, c));
    std::size_t low = 0;
    double low_u = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double u = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < cells.size(); ++k)
        if (k != i) u = std::min(u, dist(cells[i], cells[k]));
      if (u < low_u) {
        low_u = u;
        low = i;
      }
    }
    if (nx > low_u) {
      cells[low] = x;
      ++updates;
    }
  }
};

Verdict novelty_map_oracle() {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t mismatches = 0, flood_updates = 0;
  for (int stream = 0; stream < 200; ++stream) {
    NoveltyMap map(2, 5);
    BruteMap brute{5, {}, 0};
    for (int t = 0; t < 200; ++t) {
      const std::vector<double> x{u(rng), u(rng)};
      map.observe(x);
      brute.observe(x);
    }
    if (map.cells() != brute.cells || map.update_count() != brute.updates) ++mismatches;

    // Present one input once, then flood with copies of it.
    const std::vector<double> x{u(rng), u(rng)};
    map.observe(x);
    const auto before = map.update_count();
    for (int k = 0; k < 5000; ++k) map.observe(x);
    flood_updates += map.update_count() - before;
  }
  return {mismatches == 0 && flood_updates == 0,
          "streams=200 mismatches=" + std::to_string(mismatches) + " flood_updates=" + std::to_string(flood_updates)};
}

// --- C3, C6 ---------------------------------------------------------------

Verdict learning_margin(const std::vector<TrialRecord>& rs, EnvKind kind, double margin, bool check_goals) {
  const double final_mean = final_window_mean(rs);
  const double base = baseline(kind);
  std::set<std::size_t> runs, goal_runs;
  for (const auto& r : rs) {
    runs.insert(r.run_id);
    if (r.accumulated_reward > -1000.0) goal_runs.insert(r.run_id);
  }
  const double goal_frac = static_cast<double>(goal_runs.size()) / runs.size();
  const bool ok = final_mean - base >= margin && (!check_goals || goal_frac >= 0.8);
  std::string d = "final_window_mean=" + fmt("%.2f", final_mean) + " random_baseline=" + fmt("%.2f", base) +
                  " margin=" + fmt("%.2f", final_mean - base) + " (need >= " + fmt("%.0f", margin) + ")";
  if (check_goals) d += " goal_runs=" + fmt("%.3f", goal_frac) + " (need >= 0.8)";
  return {ok, d};
}

// --- C4 -------------------------------------------------------------------

Verdict division_ablation(const std::vector<TrialRecord>& ten, const std::vector<TrialRecord>& two) {
  const auto m10 = window_maxima(ten, kWindow), m2 = window_maxima(two, kWindow);
  std::vector<double> diff;
  for (const auto& [run, w] : m10) diff.push_back(w.back() - m2.at(run).back());
  const double n = static_cast<double>(diff.size());
  double mean = 0;
  for (double d : diff) mean += d;
  mean /= n;
  double var = 0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= (n - 1);
  const double se = std::sqrt(var / n);
  // One-sided paired t-test for a reversal (10-cell worse than 2-cell).
  const boost::math::students_t dist(n - 1);
  const double t_crit = boost::math::quantile(dist, 0.05);
  const double t = se > 0 ? mean / se : (mean < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
  const bool reversed = t < t_crit;
  return {!reversed, "mean10=" + fmt("%.2f", final_window_mean(ten)) + " mean2=" + fmt("%.2f", final_window_mean(two)) +
                         " paired_diff=" + fmt("%.2f", mean) + " t=" + fmt("%.3f", t) + " t_crit(0.05)=" +
                         fmt("%.3f", t_crit) + (reversed ? " significantly reversed" : " not significantly reversed")};
}

// --- C5 -------------------------------------------------------------------

Verdict update_decay(const std::vector<TrialRecord>& rs) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_run;  // total, second half
  for (const auto& r : rs) {
    auto& [total, late] = per_run[r.run_id];
    total += r.map_updates_delta;
    if (r.trial >= kTrials / 2) late += r.map_updates_delta;
  }
  std::size_t ok_runs = 0;
  double worst = 0;
  for (const auto& [run, tl] : per_run) {
    const double frac = tl.first ? static_cast<double>(tl.second) / tl.first : 0.0;
    worst = std::max(worst, frac);
    ok_runs += frac <= 0.05;
  }
  const double share = static_cast<double>(ok_runs) / per_run.size();
  std::size_t total = 0;
  for (const auto& w : update_decay_report(rs, kWindow)) total += w.updates;
  return {share >= 0.9, "runs_with_late_share<=5%: " + fmt("%.3f", share) + " (need >= 0.9) worst_late_share=" +
                            fmt("%.4f", worst) + " total_updates=" + std::to_string(total)};
}

// --- C7 -------------------------------------------------------------------

Verdict weather_adaptation(const std::vector<TrialRecord>& rs, const ExperimentConfig& cfg) {
  const auto maxima = window_maxima(rs, kWindow);
  const std::vector<std::size_t> switches{10000, 20000, 30000};
  double cont_drop = 0, fresh_drop = 0;
  std::size_t n = 0;
  for (std::size_t s : switches) {
    for (const auto& [run, w] : maxima) {
      const double before = w.at(s / kWindow - 1);
      const double after = w.at(s / kWindow);
      // A freshly initialized learner meeting the post-switch problem.
      ExperimentConfig fresh = cfg;
      fresh.n_runs = 1;
      fresh.n_trials = kWindow;
      fresh.trial_offset = s;
      fresh.base_seed = cfg.base_seed + 7919 * (s / 10000) + 104729;
      const auto frs = run_single(fresh, run).records;
      double fresh_best = -std::numeric_limits<double>::infinity();
      for (const auto& r : frs) fresh_best = std::max(fresh_best, r.accumulated_reward);
      cont_drop += before - after;
      fresh_drop += before - fresh_best;
      ++n;
    }
  }
  cont_drop /= n;
  fresh_drop /= n;
  return {cont_drop < fresh_drop,
          "mean_drop_continuing=" + fmt("%.2f", cont_drop) + " mean_drop_fresh=" + fmt("%.2f", fresh_drop)};
}

// --- C8 -------------------------------------------------------------------

Verdict unit_properties() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  Rng rng(8);

  // Widrow-Hoff contraction.
  {
    std::uniform_real_distribution<double> u(-1000, 0), e(0.01, 1.0);
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      const double f = u(rng), t = u(rng), eta = e(rng);
      ok &= std::abs(std::abs(widrow_hoff(f, t, eta) - t) - (1 - eta) * std::abs(f - t)) <= 1e-9;
    }
    check(ok, "widrow-hoff contraction");
  }
  // Team constancy within trials, through the full harness loop.
  {
    Learner l(LearnerParams{}, rng);
    MountainCar env;
    bool ok = true;
    for (std::size_t t = 0; t < 300; ++t) {
      std::vector<std::optional<IndividualRef>> seen(10);
      auto obs = env.reset(t, rng);
      double last = 0, acc = 0;
      for (;;) {
        l.act(env.normalize(obs), last, rng);
        const auto a = l.action_set()->individual;
        if (seen[a.cell]) ok &= *seen[a.cell] == a;
        seen[a.cell] = a;
        const auto r = env.step(0.0, rng);
        acc += r.reward;
        if (r.terminal) {
          l.end_trial(r.reward, acc);
          break;
        }
        obs = r.observation;
        last = r.reward;
      }
      l.maybe_evolve(rng);
    }
    check(ok, "team constancy");
  }
  // Hall of fame capacity and ordering.
  {
    HallOfFame h(5);
    std::uniform_int_distribution<int> r(-1000, 0);
    bool ok = true;
    for (int i = 0; i < 5000; ++i) {
      TeamSnapshot s;
      s.reward = r(rng);
      s.members.resize(1);
      s.members[0] = MemberSnapshot{{}, {Chromosome{{double(i % 101)}}, 0}};
      h.consider(s);
      ok &= h.size() <= 5;
      for (std::size_t k = 1; k < h.size(); ++k) ok &= h[k - 1].reward >= h[k].reward;
    }
    check(ok, "hall of fame capacity/order");
  }
  // Evolve conserves sizes and resets novel fitness.
  {
    Population p(MlpSpec{}, 10, 10, 10, rng);
    HallOfFame h(5);
    bool ok = true;
    for (int g = 0; g < 20; ++g) {
      Team t(10);
      for (CellId c = 0; c < 10; c += 2) p.actor_for(c, t, rng);
      t.accumulated_reward = -g;
      h.consider(p.snapshot(t));
      p.evolve(h, DeParams{}, rng);
      ok &= p.total_size() == 200;
      for (const auto& c : p.cells()) {
        ok &= c.best.size() == 10 && c.novel.size() == 10;
        for (const auto& i : c.novel) ok &= i.fitness == -1.0 && i.chromosome.size() == 41;
      }
    }
    check(ok, "evolve size conservation");
  }
  // DE genes come from base or mutant.
  {
    bool ok = true;
    const MlpSpec spec;
    for (int i = 0; i < 2000; ++i) {
      const auto b = random_chromosome(spec, rng), r1 = random_chromosome(spec, rng), r2 = random_chromosome(spec, rng),
                 r3 = random_chromosome(spec, rng);
      const double f = std::uniform_real_distribution<double>(0, 2)(rng);
      const auto t = de_trial(b, r1, r2, r3, DeParams{}, rng, f);
      for (std::size_t j = 0; j < t.size(); ++j)
        ok &= t.genes[j] == b.genes[j] || t.genes[j] == r1.genes[j] + f * (r2.genes[j] - r3.genes[j]);
    }
    check(ok, "DE gene provenance");
  }
  check(MlpSpec{2, 10, 1}.chromosome_length() == 41, "chromosome length 41");
  // Evolution at exactly 200 learning trials.
  {
    Learner l(LearnerParams{}, rng);
    bool ok = true;
    for (int t = 1; t <= 200; ++t) {
      l.act(std::vector<double>{0.3, 0.6}, 0, rng);
      l.end_trial(-1, -1);
      ok &= l.maybe_evolve(rng) == (t == 200);
    }
    check(ok && l.generations() == 1, "evolution trigger at 200");
  }
  // Deterministic CSV reproduction.
  {
    ExperimentConfig c = base_config(EnvKind::McNoisy);
    c.n_runs = 2;
    c.n_trials = 300;
    std::ostringstream a, b;
    write_records_csv(a, run_experiment(c));
    write_records_csv(b, run_experiment(c));
    check(a.str() == b.str(), "deterministic CSV");
  }
  std::string d = failed.empty() ? "all property checks hold" : "failed:";
  for (const auto& f : failed) d += " [" + f + "]";
  return {failed.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only(argv + 1, argv + argc);
  auto want = [&](const std::string& id) { return only.empty() || only.count(id); };
  Experiments ex;
  auto mc = [] { return base_config(EnvKind::Mc); };
  auto noisy = [] { return base_config(EnvKind::McNoisy); };
  auto two_cell = [] {
    auto c = base_config(EnvKind::Mc);
    c.learner.map_size = 2;
    c.learner.n_best = 50;
    c.learner.n_novel = 50;
    return c;
  };
  auto weather = [] {
    auto c = base_config(EnvKind::McWeather);
    c.n_trials = 40000;
    return c;
  };

  struct Criterion {
    std::string id, title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"C1", "dynamics oracle", dynamics_oracle},
      {"C2", "novelty map oracle", novelty_map_oracle},
      {"C3", "learning occurs (mc)", [&] { return learning_margin(ex.get("mc", mc), EnvKind::Mc, 200.0, true); }},
      {"C4", "division ablation (10 vs 2 cells)",
       [&] { return division_ablation(ex.get("mc", mc), ex.get("mc-2cell", two_cell)); }},
      {"C5", "novelty map update decay", [&] { return update_decay(ex.get("mc", mc)); }},
      {"C6", "noisy variant",
       [&] { return learning_margin(ex.get("mc-noisy", noisy), EnvKind::McNoisy, 100.0, false); }},
      {"C7", "unstable weather adaptation",
       [&] { return weather_adaptation(ex.get("mc-weather", weather), weather()); }},
      {"C8", "unit/property checks", unit_properties},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!want(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.id << " " << c.title << ": " << v.detail << " ["
              << fmt("%.1f", s) << " s]" << std::endl;
    failures += !v.pass;
  }
  std::cout << (failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED") << std::endl;
  return failures ? 1 : 0;
}
