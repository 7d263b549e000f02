// Novelty Map population: one subpopulation (best + novel groups) per map
// cell, per-trial teams, the hall of fame, and the evolution procedure.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "notc/genome.hpp"
#include "notc/novelty_map.hpp"

namespace notc {

inline constexpr double kInitialBestFitness = 0.0;
inline constexpr double kInitialNovelFitness = -1.0;

enum class Group : std::uint8_t { Best, Novel };

struct Individual {
  Chromosome chromosome;
  double fitness = 0.0;

  friend bool operator==(const Individual&, const Individual&) = default;
};

/// Position of an individual inside one cell's subpopulation.
struct MemberRef {
  Group group = Group::Best;
  std::size_t index = 0;

  friend bool operator==(const MemberRef&, const MemberRef&) = default;
};

struct IndividualRef {
  CellId cell = 0;
  MemberRef member;

  friend bool operator==(const IndividualRef&, const IndividualRef&) = default;
};

struct Cell {
  std::vector<Individual> best;
  std::vector<Individual> novel;

  std::size_t size() const noexcept { return best.size() + novel.size(); }

  Individual& at(MemberRef m) { return m.group == Group::Best ? best.at(m.index) : novel.at(m.index); }
  const Individual& at(MemberRef m) const {
    return m.group == Group::Best ? best.at(m.index) : novel.at(m.index);
  }

  /// Flat position k over best followed by novel.
  MemberRef ref_of(std::size_t k) const {
    return k < best.size() ? MemberRef{Group::Best, k} : MemberRef{Group::Novel, k - best.size()};
  }

  double max_fitness() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& i : best) m = std::max(m, i.fitness);
    for (const auto& i : novel) m = std::max(m, i.fitness);
    return m;
  }
};

/// One acting individual per activated cell; std::nullopt is the don't-care
/// symbol for cells not activated during the trial.
struct Team {
  std::vector<std::optional<MemberRef>> members;
  double accumulated_reward = 0.0;

  explicit Team(std::size_t n_cells = 0) : members(n_cells) {}
};

struct MemberSnapshot {
  MemberRef ref;
  Individual individual;

  friend bool operator==(const MemberSnapshot&, const MemberSnapshot&) = default;
};

/// A team frozen at the end of its trial. Members are stored by value so
/// later changes to the population cannot alter the record.
struct TeamSnapshot {
  std::vector<std::optional<MemberSnapshot>> members;
  double reward = 0.0;

  /// Same cells activated with the same chromosomes.
  bool same_members(const TeamSnapshot& other) const {
    if (members.size() != other.members.size()) return false;
    for (std::size_t c = 0; c < members.size(); ++c) {
      const auto& a = members[c];
      const auto& b = other.members[c];
      if (a.has_value() != b.has_value()) return false;
      if (a && a->individual.chromosome != b->individual.chromosome) return false;
    }
    return true;
  }
};

/// Teams with the highest accumulated reward, best first.
class HallOfFame {
 public:
  explicit HallOfFame(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("HallOfFame: capacity must be positive");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<TeamSnapshot>& entries() const noexcept { return entries_; }
  const TeamSnapshot& operator[](std::size_t i) const { return entries_.at(i); }

  /// Returns true when the hall changed. A member-identical team keeps a
  /// single entry holding the better of the two rewards.
  bool consider(TeamSnapshot team) {
    for (auto& e : entries_) {
      if (e.same_members(team)) {
        if (team.reward <= e.reward) return false;
        e.reward = team.reward;
        resort();
        return true;
      }
    }
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(team));
    } else if (team.reward > entries_.back().reward) {
      entries_.back() = std::move(team);
    } else {
      return false;
    }
    resort();
    return true;
  }

  /// Replaces the stored reward of the entry member-identical to `team`.
  bool overwrite_reward(const TeamSnapshot& team, double reward) {
    for (auto& e : entries_) {
      if (e.same_members(team)) {
        e.reward = reward;
        resort();
        return true;
      }
    }
    return false;
  }

 private:
  void resort() {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const TeamSnapshot& a, const TeamSnapshot& b) { return a.reward > b.reward; });
  }

  std::size_t capacity_;
  std::vector<TeamSnapshot> entries_;
};

class Population {
 public:
  /// Cells are allocated up front, one per map slot. Draw order: for each
  /// cell, the best group's chromosomes, then the novel group's.
  template <class Rng>
  Population(const MlpSpec& spec, std::size_t n_cells, std::size_t n_best, std::size_t n_novel, Rng& rng)
      : spec_(spec) {
    spec.validate();
    if (n_cells == 0 || n_best == 0 || n_novel == 0) {
      throw std::invalid_argument("Population: cell and group sizes must be positive");
    }
    cells_.resize(n_cells);
    for (auto& cell : cells_) {
      cell.best.reserve(n_best);
      cell.novel.reserve(n_novel);
      for (std::size_t i = 0; i < n_best; ++i)
        cell.best.push_back({random_chromosome(spec, rng), kInitialBestFitness});
      for (std::size_t i = 0; i < n_novel; ++i)
        cell.novel.push_back({random_chromosome(spec, rng), kInitialNovelFitness});
    }
  }

  const MlpSpec& spec() const noexcept { return spec_; }
  std::size_t n_cells() const noexcept { return cells_.size(); }
  std::size_t n_best() const noexcept { return cells_.front().best.size(); }
  std::size_t n_novel() const noexcept { return cells_.front().novel.size(); }
  std::size_t subpopulation_size() const noexcept { return n_best() + n_novel(); }
  std::size_t total_size() const noexcept { return n_cells() * subpopulation_size(); }

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(CellId c) const { return cells_.at(c); }
  Cell& cell(CellId c) { return cells_.at(c); }

  Individual& at(IndividualRef r) { return cell(r.cell).at(r.member); }
  const Individual& at(IndividualRef r) const { return cell(r.cell).at(r.member); }

  /// The team's member for `c`, choosing one uniformly over the cell's
  /// individuals on the cell's first activation in the trial.
  template <class Rng>
  IndividualRef actor_for(CellId c, Team& team, Rng& rng) const {
    auto& slot = team.members.at(c);
    if (!slot) {
      const auto& sub = cell(c);
      const auto k = std::uniform_int_distribution<std::size_t>(0, sub.size() - 1)(rng);
      slot = sub.ref_of(k);
    }
    return {c, *slot};
  }

  TeamSnapshot snapshot(const Team& team) const {
    TeamSnapshot s;
    s.reward = team.accumulated_reward;
    s.members.resize(team.members.size());
    for (std::size_t c = 0; c < team.members.size(); ++c) {
      if (const auto& m = team.members[c]) s.members[c] = MemberSnapshot{*m, cell(c).at(*m)};
    }
    return s;
  }

  /// One generation. Per cell: the first half of the best group comes from
  /// hall-of-fame teams in rank order (random cell individuals for
  /// don't-care or missing entries), the rest of the best group from the
  /// fittest individuals over best and novel, and every novel slot is
  /// rebuilt by indexing or DE with even odds.
  ///
  /// Draw order: per cell, one index draw per random hall-of-fame
  /// substitute; then per cell and novel slot, a coin, followed by either
  /// one index draw or three distinct donor draws and the DE draws.
  template <class Rng>
  void evolve(const HallOfFame& hof, const DeParams& de, Rng& rng) {
    const std::size_t nb = n_best(), nn = n_novel();
    const std::size_t from_hof = nb / 2;

    std::vector<std::vector<Individual>> next_best(cells_.size());
    for (CellId c = 0; c < cells_.size(); ++c) {
      const Cell& old = cells_[c];
      auto& dst = next_best[c];
      dst.reserve(nb);
      for (std::size_t k = 0; k < from_hof; ++k) {
        const MemberSnapshot* m = nullptr;
        if (k < hof.size() && hof[k].members.size() > c && hof[k].members[c]) m = &*hof[k].members[c];
        if (m) {
          // Keep the live fitness estimate if the recorded slot still holds
          // the same chromosome.
          const Individual& live = old.at(m->ref);
          dst.push_back(live.chromosome == m->individual.chromosome ? live : m->individual);
        } else {
          const auto r = std::uniform_int_distribution<std::size_t>(0, old.size() - 1)(rng);
          dst.push_back(old.at(old.ref_of(r)));
        }
      }
      std::vector<std::size_t> order(old.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return old.at(old.ref_of(a)).fitness > old.at(old.ref_of(b)).fitness;
      });
      for (std::size_t k = 0; dst.size() < nb; ++k) dst.push_back(old.at(old.ref_of(order[k % order.size()])));
    }

    for (CellId c = 0; c < cells_.size(); ++c) cells_[c].best = std::move(next_best[c]);

    // Donor pool for indexing and DE: every surviving individual.
    std::vector<Chromosome> pool;
    pool.reserve(cells_.size() * nb);
    for (const auto& cell : cells_)
      for (const auto& i : cell.best) pool.push_back(i.chromosome);

    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (auto& cell : cells_) {
      cell.novel.clear();
      for (std::size_t j = 0; j < nn; ++j) {
        Chromosome child;
        if (coin(rng) || pool.size() < 3) {
          child = index_copy<Rng>(pool, rng);
        } else {
          const std::size_t a = pick(rng);
          std::size_t b, d;
          do b = pick(rng); while (b == a);
          do d = pick(rng); while (d == a || d == b);
          child = de_trial(cell.best[j % nb].chromosome, pool[a], pool[b], pool[d], de, rng);
        }
        cell.novel.push_back({std::move(child), kInitialNovelFitness});
      }
    }
  }

 private:
  MlpSpec spec_;
  std::vector<Cell> cells_;
};

}  // namespace notc
