#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "genesel/dataset.hpp"

namespace genesel::ga {

using Rng = std::mt19937_64;

/// Binary mask over the stage-1 genes. A set bit selects the gene.
struct Chromosome {
  std::vector<std::uint8_t> bits;
  std::optional<double> fitness;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t count() const noexcept;
  /// Positions of set bits, ascending.
  std::vector<std::size_t> selected() const;

  bool operator==(const Chromosome&) const = default;
};

using Population = std::vector<Chromosome>;

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t iterations = 50;
  double crossover_prob = 0.8;
  double mutation_prob = 0.01;
  std::size_t tournament_size = 2;
  std::size_t elitism_count = 1;
  std::size_t fitness_knn_k = 5;
  std::size_t fitness_folds = 5;
  /// Independent GA runs; the best result over all runs is kept.
  std::size_t restarts = 1;
  /// Worker threads for fitness evaluation; 0 picks the hardware count.
  std::size_t threads = 0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const GaConfig&) const = default;
};

/// Sets one uniformly chosen bit when the mask is empty. Returns true if it did.
bool repair(Chromosome& c, Rng& rng);

Population init_population(std::size_t n_genes, const GaConfig& cfg, Rng& rng);

/// Mean accuracy of a stratified internal cross-validation of k-NN on the
/// genes selected by `chrom`. Folds depend only on cfg.seed and the labels.
/// Falls back to leave-one-out when there are fewer samples than folds.
double evaluate_fitness(const Chromosome& chrom, const Dataset& ds, const GaConfig& cfg);

/// Computes and caches the fitness on `chrom` if it is not already cached.
double fitness(Chromosome& chrom, const Dataset& ds, const GaConfig& cfg);

/// Lexicographic preference: higher fitness, then fewer selected genes.
/// Both chromosomes must carry a cached fitness.
bool fitter(const Chromosome& a, const Chromosome& b);

/// Index of the tournament winner. Contestants are drawn with replacement;
/// ties on (fitness, size) go to the lower population index.
std::size_t tournament_select(const Population& pop, const GaConfig& cfg, Rng& rng);

/// With probability crossover_prob, swaps each locus independently with
/// probability 1/2. Children are repaired and their caches cleared.
std::pair<Chromosome, Chromosome> uniform_crossover(const Chromosome& a, const Chromosome& b,
                                                    const GaConfig& cfg, Rng& rng);

/// Flips each bit with probability mutation_prob, then repairs.
Chromosome mutate(Chromosome c, const GaConfig& cfg, Rng& rng);

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t best_size = 0;

  bool operator==(const GenerationStats&) const = default;
};

struct GaTrace {
  std::vector<GenerationStats> generations;

  void write_csv(std::ostream& out) const;
};

struct GaResult {
  Chromosome best;
  GaTrace trace;
  /// Distinct chromosomes whose fitness was computed.
  std::size_t evaluations = 0;
};

/// Generational GA with elitism, `cfg.iterations` generations after the
/// initial population. Returns the best chromosome ever seen under
/// (fitness desc, set-bit count asc, selected positions lexicographically asc).
GaResult evolve(const Dataset& ds, const GaConfig& cfg);

/// Maps set bits back to the original gene indices.
GeneSubset decode(const Chromosome& best, std::span<const GeneIndex> stage1_genes);

}  // namespace genesel::ga
