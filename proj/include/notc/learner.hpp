// The NOTC control loop: winner-cell action selection, Widrow-Hoff credit
// assignment, team rewards, hall-of-fame replay trials and evolution timing.
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "notc/genome.hpp"
#include "notc/novelty_map.hpp"
#include "notc/population.hpp"

namespace notc {

struct LearnerParams {
  double eta = 0.1;
  double gamma = 0.99;
  std::size_t iota = 10;
  std::size_t map_size = 10;
  std::size_t n_best = 10;
  std::size_t n_novel = 10;
  DeParams de;
  MlpSpec spec;
  double action_min = -1.0;
  double action_max = 1.0;

  std::size_t subpopulation_size() const noexcept { return n_best + n_novel; }
  /// Learning trials per generation.
  std::size_t evolution_trigger() const noexcept { return subpopulation_size() * iota; }
  std::size_t hof_capacity() const noexcept { return std::max<std::size_t>(1, n_best / 2); }

  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("LearnerParams: eta must lie in (0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("LearnerParams: gamma must lie in [0, 1]");
    if (iota == 0) throw std::invalid_argument("LearnerParams: iota must be positive");
    if (map_size == 0) throw std::invalid_argument("LearnerParams: map_size must be positive");
    if (n_best < 2 || n_novel == 0) throw std::invalid_argument("LearnerParams: need n_best >= 2 and n_novel >= 1");
    if (!(action_min < action_max)) throw std::invalid_argument("LearnerParams: empty action range");
    de.validate();
    spec.validate();
  }
};

enum class Phase { Normal, Replay };

inline const char* to_string(Phase p) { return p == Phase::Normal ? "NORMAL" : "REPLAY"; }

/// F <- F + eta (target - F)
constexpr double widrow_hoff(double fitness, double target, double eta) noexcept {
  return fitness + eta * (target - fitness);
}

/// The individual that produced the previous action, awaiting credit.
struct ActionSet {
  IndividualRef individual;
};

class Learner {
 public:
  template <class Rng>
  Learner(const LearnerParams& params, Rng& rng)
      : params_((params.validate(), params)),
        map_(params.spec.n_inputs, params.map_size),
        population_(params.spec, params.map_size, params.n_best, params.n_novel, rng),
        hof_(params.hof_capacity()),
        team_(params.map_size),
        out_(params.spec.n_outputs) {}

  const LearnerParams& params() const noexcept { return params_; }
  const NoveltyMap& map() const noexcept { return map_; }
  const Population& population() const noexcept { return population_; }
  Population& population() noexcept { return population_; }
  const HallOfFame& hof() const noexcept { return hof_; }
  const Team& team() const noexcept { return team_; }
  const std::optional<ActionSet>& action_set() const noexcept { return prev_; }
  Phase phase() const noexcept { return replay_.empty() ? Phase::Normal : Phase::Replay; }
  std::size_t trial_counter() const noexcept { return trials_; }
  std::size_t trials_since_evolution() const noexcept { return since_evolution_; }
  std::size_t generations() const noexcept { return generations_; }
  std::size_t replay_pending() const noexcept { return replay_.size(); }

  /// One step: route the (normalized) observation through the map, pick the
  /// winner cell's team member, credit the previous actor with
  /// `last_reward` plus the discounted best fitness of the winner cell, and
  /// return the actor's clamped output. `last_reward` is ignored on the
  /// first step of a trial.
  template <class Rng>
  double act(std::span<const double> observation, double last_reward, Rng& rng) {
    const CellId winner = map_.observe(observation);
    const IndividualRef actor = choose_actor(winner, rng);

    if (prev_) {
      const double target = last_reward + params_.gamma * population_.cell(winner).max_fitness();
      credit(target);
    }

    const Individual& ind = population_.at(actor);
    forward_into(params_.spec, ind.chromosome.genes, observation, out_);
    prev_ = ActionSet{actor};
    return std::clamp(out_[0], params_.action_min, params_.action_max);
  }

  /// Closes the trial: terminal credit without a successor term, then the
  /// team is offered to the hall of fame (or, in a replay trial, the replayed
  /// entry's reward is re-measured).
  void end_trial(double final_reward, double accumulated_reward) {
    if (prev_) credit(final_reward);
    team_.accumulated_reward = accumulated_reward;
    if (!replay_.empty()) {
      hof_.overwrite_reward(replay_.front().entry, accumulated_reward);
      replay_.pop_front();
    } else {
      hof_.consider(population_.snapshot(team_));
      ++since_evolution_;
    }
    ++trials_;
    prev_.reset();
    team_ = Team(params_.map_size);
  }

  /// Runs a generation once enough learning trials have elapsed and queues
  /// one replay trial per hall-of-fame team.
  template <class Rng>
  bool maybe_evolve(Rng& rng) {
    if (since_evolution_ < params_.evolution_trigger()) return false;
    population_.evolve(hof_, params_.de, rng);
    since_evolution_ = 0;
    ++generations_;
    // Entry k's members were copied into best slot k of each cell.
    for (std::size_t k = 0; k < hof_.size(); ++k) {
      Replay r{hof_[k], std::vector<std::optional<MemberRef>>(params_.map_size)};
      for (std::size_t c = 0; c < params_.map_size; ++c) {
        if (hof_[k].members[c]) r.members[c] = MemberRef{Group::Best, k};
      }
      replay_.push_back(std::move(r));
    }
    return true;
  }

  /// Members dictated for the current replay trial, if any.
  const std::vector<std::optional<MemberRef>>* replay_members() const {
    return replay_.empty() ? nullptr : &replay_.front().members;
  }

 private:
  struct Replay {
    TeamSnapshot entry;
    std::vector<std::optional<MemberRef>> members;
  };

  template <class Rng>
  IndividualRef choose_actor(CellId winner, Rng& rng) {
    auto& slot = team_.members[winner];
    if (!slot && !replay_.empty()) slot = replay_.front().members[winner];
    return population_.actor_for(winner, team_, rng);
  }

  void credit(double target) {
    Individual& ind = population_.at(prev_->individual);
    ind.fitness = widrow_hoff(ind.fitness, target, params_.eta);
  }

  LearnerParams params_;
  NoveltyMap map_;
  Population population_;
  HallOfFame hof_;
  Team team_;
  std::optional<ActionSet> prev_;
  std::deque<Replay> replay_;
  std::size_t trials_ = 0;
  std::size_t since_evolution_ = 0;
  std::size_t generations_ = 0;
  std::vector<double> out_;
};

}  // namespace notc
