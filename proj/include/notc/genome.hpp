// Fixed-topology single-hidden-layer perceptrons with a direct encoding, and
// the two reproduction operators (differential evolution and indexing).
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace notc {

/// Topology of one individual. The input layer is identity without bias,
/// hidden neurons use tanh, outputs are identity.
struct MlpSpec {
  std::size_t n_inputs = 2;
  std::size_t n_hidden = 10;
  std::size_t n_outputs = 1;

  /// Genes are laid out as W1 (hidden x inputs, row-major), b1, W2
  /// (outputs x hidden, row-major), b2.
  constexpr std::size_t chromosome_length() const noexcept {
    return n_inputs * n_hidden + n_hidden + n_hidden * n_outputs + n_outputs;
  }

  void validate() const {
    if (n_inputs == 0 || n_hidden == 0 || n_outputs == 0) {
      throw std::invalid_argument("MlpSpec: layer sizes must be positive");
    }
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct Chromosome {
  std::vector<double> genes;

  std::size_t size() const noexcept { return genes.size(); }
  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

struct DeParams {
  double crossover_rate = 0.2;
  double f_min = 0.0;
  double f_max = 2.0;

  void validate() const {
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
      throw std::invalid_argument("DeParams: crossover_rate must lie in [0, 1]");
    }
    if (!(f_min <= f_max)) throw std::invalid_argument("DeParams: f_min must not exceed f_max");
  }
};

namespace detail {
inline void check_length(const MlpSpec& spec, std::size_t n, const char* what) {
  if (n != spec.chromosome_length()) {
    throw std::invalid_argument(std::string(what) + ": chromosome has " + std::to_string(n) +
                                " genes, spec needs " + std::to_string(spec.chromosome_length()));
  }
}
}  // namespace detail

/// Allocation-free forward pass. `out` must have n_outputs elements.
inline void forward_into(const MlpSpec& spec, std::span<const double> genes,
                         std::span<const double> input, std::span<double> out) {
  const std::size_t ni = spec.n_inputs, nh = spec.n_hidden, no = spec.n_outputs;
  const double* w1 = genes.data();
  const double* b1 = w1 + ni * nh;
  const double* w2 = b1 + nh;
  const double* b2 = w2 + nh * no;
  for (std::size_t o = 0; o < no; ++o) out[o] = b2[o];
  for (std::size_t h = 0; h < nh; ++h) {
    double z = b1[h];
    for (std::size_t i = 0; i < ni; ++i) z += w1[h * ni + i] * input[i];
    const double a = std::tanh(z);
    for (std::size_t o = 0; o < no; ++o) out[o] += w2[o * nh + h] * a;
  }
}

inline std::vector<double> forward(const MlpSpec& spec, const Chromosome& chromosome,
                                   std::span<const double> input) {
  detail::check_length(spec, chromosome.size(), "forward");
  if (input.size() != spec.n_inputs) {
    throw std::invalid_argument("forward: input has " + std::to_string(input.size()) +
                                " values, spec needs " + std::to_string(spec.n_inputs));
  }
  std::vector<double> out(spec.n_outputs);
  forward_into(spec, chromosome.genes, input, out);
  return out;
}

/// Genes i.i.d. uniform in [-1, 1].
template <class Rng>
Chromosome random_chromosome(const MlpSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> gene(-1.0, 1.0);
  Chromosome c;
  c.genes.resize(spec.chromosome_length());
  for (auto& g : c.genes) g = gene(rng);
  return c;
}

/// DE/rand/1/bin trial vector: mutant = r1 + F (r2 - r3), binomially crossed
/// with `base` with one forced mutant gene. `weight` fixes F; otherwise F is
/// drawn once per call from [f_min, f_max].
///
/// Draw order: F (if not fixed), j_rand, then one uniform per gene.
template <class Rng>
Chromosome de_trial(const Chromosome& base, const Chromosome& r1, const Chromosome& r2,
                    const Chromosome& r3, const DeParams& params, Rng& rng,
                    std::optional<double> weight = std::nullopt) {
  const std::size_t n = base.size();
  if (r1.size() != n || r2.size() != n || r3.size() != n) {
    throw std::invalid_argument("de_trial: chromosome lengths differ");
  }
  if (n == 0) throw std::invalid_argument("de_trial: empty chromosome");
  const double f = weight ? *weight : std::uniform_real_distribution<double>(params.f_min, params.f_max)(rng);
  const std::size_t j_rand = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Chromosome trial = base;
  for (std::size_t j = 0; j < n; ++j) {
    const bool take = unit(rng) < params.crossover_rate || j == j_rand;
    if (take) trial.genes[j] = r1.genes[j] + f * (r2.genes[j] - r3.genes[j]);
  }
  return trial;
}

/// Uniformly chosen copy from the population.
template <class Rng>
Chromosome index_copy(std::span<const Chromosome> population, Rng& rng) {
  if (population.empty()) throw std::invalid_argument("index_copy: empty population");
  const auto k = std::uniform_int_distribution<std::size_t>(0, population.size() - 1)(rng);
  return population[k];
}

}  // namespace notc
