// Novelty Map: a bounded input-space quantizer whose cells are the most
// unique inputs seen so far. Cells hold raw inputs (no prototype adaptation),
// so the map does not drift toward frequently visited regions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace notc {

using CellId = std::size_t;

/// Euclidean distance between two equally sized arrays.
inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Smallest distance from arrays[index] to any other member of arrays.
/// Throws std::invalid_argument for a singleton set or mismatched dimensions.
inline double uniqueness(std::size_t index, std::span<const std::vector<double>> arrays) {
  if (arrays.size() < 2) {
    throw std::invalid_argument("uniqueness: needs at least two arrays");
  }
  if (index >= arrays.size()) {
    throw std::out_of_range("uniqueness: index " + std::to_string(index) + " out of range");
  }
  const auto& self = arrays[index];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    if (arrays[k].size() != self.size()) {
      throw std::invalid_argument("uniqueness: dimension mismatch");
    }
    if (k == index) continue;
    best = std::min(best, euclidean(self, arrays[k]));
  }
  return best;
}

class NoveltyMap {
 public:
  NoveltyMap(std::size_t dimension, std::size_t max_size)
      : dim_(dimension), max_size_(max_size) {
    if (dimension == 0) throw std::invalid_argument("NoveltyMap: dimension must be positive");
    if (max_size == 0) throw std::invalid_argument("NoveltyMap: max_size must be positive");
    data_.reserve(dim_ * max_size_);
    uniq_.reserve(max_size_);
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t max_size() const noexcept { return max_size_; }
  std::size_t size() const noexcept { return uniq_.size(); }
  bool empty() const noexcept { return uniq_.empty(); }
  bool full() const noexcept { return size() == max_size_; }

  /// Number of cell-value modifications (initial inserts and replacements).
  std::size_t update_count() const noexcept { return updates_; }

  std::span<const double> cell(CellId id) const {
    if (id >= size()) throw std::out_of_range("NoveltyMap: no cell " + std::to_string(id));
    return {data_.data() + id * dim_, dim_};
  }

  std::vector<std::vector<double>> cells() const {
    std::vector<std::vector<double>> out;
    out.reserve(size());
    for (CellId c = 0; c < size(); ++c) {
      auto w = cell(c);
      out.emplace_back(w.begin(), w.end());
    }
    return out;
  }

  /// Uniqueness of a stored cell within the current cell set (cached).
  double cell_uniqueness(CellId id) const {
    if (size() < 2) throw std::invalid_argument("cell_uniqueness: map holds fewer than two cells");
    if (id >= size()) throw std::out_of_range("cell_uniqueness: no cell " + std::to_string(id));
    return uniq_[id];
  }

  /// Presents an input: fills the map while it has room, otherwise replaces
  /// the least unique cell when the input is strictly more unique. Returns
  /// the cell closest to the input after the update.
  CellId observe(std::span<const double> input) {
    check_dim(input);
    if (!full()) {
      data_.insert(data_.end(), input.begin(), input.end());
      uniq_.push_back(0.0);
      ++updates_;
      refresh();
      return nearest(input);
    }
    // A single-cell map has no defined cell uniqueness, so it never replaces.
    if (size() < 2) return 0;

    double best_sq = std::numeric_limits<double>::infinity();
    CellId winner = 0;
    for (CellId c = 0; c < size(); ++c) {
      const double d = squared(input, c);
      if (d < best_sq) {
        best_sq = d;
        winner = c;
      }
    }
    if (std::sqrt(best_sq) > min_uniq_) {
      const CellId victim = min_cell_;
      std::copy(input.begin(), input.end(), data_.begin() + victim * dim_);
      ++updates_;
      refresh();
      return victim;
    }
    return winner;
  }

  /// Closest cell without touching the map. Ties go to the lowest index.
  CellId nearest(std::span<const double> input) const {
    if (empty()) throw std::logic_error("NoveltyMap::nearest on empty map");
    check_dim(input);
    double best_sq = std::numeric_limits<double>::infinity();
    CellId winner = 0;
    for (CellId c = 0; c < size(); ++c) {
      const double d = squared(input, c);
      if (d < best_sq) {
        best_sq = d;
        winner = c;
      }
    }
    return winner;
  }

 private:
  void check_dim(std::span<const double> input) const {
    if (input.size() != dim_) {
      throw std::invalid_argument("NoveltyMap: input has dimension " + std::to_string(input.size()) +
                                  ", map expects " + std::to_string(dim_));
    }
  }

  double squared(std::span<const double> input, CellId c) const {
    const double* w = data_.data() + c * dim_;
    double sum = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double d = input[i] - w[i];
      sum += d * d;
    }
    return sum;
  }

  // Recomputes every cell's uniqueness and the lowest one. Runs only when the
  // cell set changes, which stops happening once the map settles.
  void refresh() {
    const std::size_t n = size();
    min_uniq_ = std::numeric_limits<double>::infinity();
    min_cell_ = 0;
    if (n < 2) return;
    for (CellId i = 0; i < n; ++i) {
      double best_sq = std::numeric_limits<double>::infinity();
      for (CellId k = 0; k < n; ++k) {
        if (k == i) continue;
        best_sq = std::min(best_sq, squared(cell(i), k));
      }
      uniq_[i] = std::sqrt(best_sq);
      if (uniq_[i] < min_uniq_) {
        min_uniq_ = uniq_[i];
        min_cell_ = i;
      }
    }
  }

  std::size_t dim_;
  std::size_t max_size_;
  std::vector<double> data_;
  std::vector<double> uniq_;
  double min_uniq_ = std::numeric_limits<double>::infinity();
  CellId min_cell_ = 0;
  std::size_t updates_ = 0;
};

}  // namespace notc
