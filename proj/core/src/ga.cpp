#include "genesel/ga.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "genesel/classifiers.hpp"
#include "genesel/error.hpp"

namespace genesel::ga {

std::size_t Chromosome::count() const noexcept {
  return static_cast<std::size_t>(std::ranges::count(bits, std::uint8_t{1}));
}

std::vector<std::size_t> Chromosome::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.push_back(i);
  }
  return out;
}

void GaConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be >= 2");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw ConfigError("crossover_prob must be in [0, 1]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw ConfigError("mutation_prob must be in [0, 1]");
  }
  if (tournament_size < 1 || tournament_size > population_size) {
    throw ConfigError("tournament_size must be in [1, population_size]");
  }
  if (elitism_count >= population_size) throw ConfigError("elitism_count must be < population_size");
  if (fitness_knn_k < 1) throw ConfigError("fitness_knn_k must be >= 1");
  if (fitness_folds < 2) throw ConfigError("fitness_folds must be >= 2");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
}

bool repair(Chromosome& c, Rng& rng) {
  if (c.bits.empty() || c.count() > 0) return false;
  std::uniform_int_distribution<std::size_t> pick(0, c.bits.size() - 1);
  c.bits[pick(rng)] = 1;
  return true;
}

Population init_population(std::size_t n_genes, const GaConfig& cfg, Rng& rng) {
  if (n_genes < 1) throw ValidationError("chromosome length must be >= 1");
  Population pop(cfg.population_size);
  std::bernoulli_distribution coin(0.5);
  for (auto& c : pop) {
    c.bits.resize(n_genes);
    for (auto& b : c.bits) b = coin(rng) ? 1 : 0;
    repair(c, rng);
  }
  return pop;
}

double evaluate_fitness(const Chromosome& chrom, const Dataset& ds, const GaConfig& cfg) {
  if (chrom.size() != ds.n_genes()) {
    throw ValidationError("chromosome length " + std::to_string(chrom.size()) +
                          " does not match " + std::to_string(ds.n_genes()) + " genes");
  }
  const auto genes = chrom.selected();
  if (genes.empty()) throw ValidationError("chromosome selects no gene");
  const Dataset projected = project(ds, genes);
  const std::size_t m = ds.n_samples();
  const std::size_t k = m < cfg.fitness_folds ? m : cfg.fitness_folds;
  const FoldPlan plan = make_folds(ds.labels(), k, 1, cfg.seed);

  double acc_sum = 0.0;
  std::size_t scored_folds = 0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    const auto test_rows = plan.test_indices(0, fold);
    if (test_rows.empty()) continue;
    const Dataset train = projected.subset_rows(plan.train_indices(0, fold));
    const std::size_t neighbours = std::min(cfg.fitness_knn_k, train.n_samples());
    std::size_t correct = 0;
    for (std::size_t row : test_rows) {
      const ClassIndex y = classifiers::knn_vote(train.values(), train.labels(), ds.n_classes(),
                                                 projected.values().row(row), neighbours);
      correct += y == ds.labels()[row] ? 1 : 0;
    }
    acc_sum += static_cast<double>(correct) / static_cast<double>(test_rows.size());
    ++scored_folds;
  }
  return acc_sum / static_cast<double>(scored_folds);
}

double fitness(Chromosome& chrom, const Dataset& ds, const GaConfig& cfg) {
  if (!chrom.fitness) chrom.fitness = evaluate_fitness(chrom, ds, cfg);
  return *chrom.fitness;
}

bool fitter(const Chromosome& a, const Chromosome& b) {
  if (*a.fitness != *b.fitness) return *a.fitness > *b.fitness;
  return a.count() < b.count();
}

std::size_t tournament_select(const Population& pop, const GaConfig& cfg, Rng& rng) {
  if (pop.empty()) throw ValidationError("tournament on an empty population");
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::size_t winner = pick(rng);
  for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
    const std::size_t challenger = pick(rng);
    if (fitter(pop[challenger], pop[winner]) ||
        (!fitter(pop[winner], pop[challenger]) && challenger < winner)) {
      winner = challenger;
    }
  }
  return winner;
}

std::pair<Chromosome, Chromosome> uniform_crossover(const Chromosome& a, const Chromosome& b,
                                                    const GaConfig& cfg, Rng& rng) {
  if (a.size() != b.size()) throw ValidationError("crossover of chromosomes of unequal length");
  Chromosome first{a.bits, std::nullopt};
  Chromosome second{b.bits, std::nullopt};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < cfg.crossover_prob) {
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < first.bits.size(); ++i) {
      if (coin(rng)) std::swap(first.bits[i], second.bits[i]);
    }
  }
  repair(first, rng);
  repair(second, rng);
  return {std::move(first), std::move(second)};
}

Chromosome mutate(Chromosome c, const GaConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& b : c.bits) {
    if (unit(rng) < cfg.mutation_prob) b ^= 1;
  }
  repair(c, rng);
  c.fitness.reset();
  return c;
}

void GaTrace::write_csv(std::ostream& out) const {
  out << "generation,best_fitness,mean_fitness,best_size\n";
  const auto old_precision = out.precision(17);
  for (const auto& g : generations) {
    out << g.generation << ',' << g.best_fitness << ',' << g.mean_fitness << ',' << g.best_size
        << '\n';
  }
  out.precision(old_precision);
}

GeneSubset decode(const Chromosome& best, std::span<const GeneIndex> stage1_genes) {
  if (best.size() != stage1_genes.size()) {
    throw ValidationError("chromosome length does not match the stage-1 gene list");
  }
  GeneSubset out;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (best.bits[i]) out.push_back(stage1_genes[i]);
  }
  return out;
}

namespace {

// Total order used for the reported optimum.
bool preferred(const Chromosome& a, const Chromosome& b) {
  if (fitter(a, b)) return true;
  if (fitter(b, a)) return false;
  return a.selected() < b.selected();
}

class FitnessEvaluator {
 public:
  FitnessEvaluator(const Dataset& ds, const GaConfig& cfg) : ds_(ds), cfg_(cfg) {
    threads_ = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  }

  void evaluate(Population& pop) {
    std::vector<std::size_t> pending;
    std::map<std::vector<std::uint8_t>, std::size_t> first_pending;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (pop[i].fitness) continue;
      if (auto it = memo_.find(pop[i].bits); it != memo_.end()) {
        pop[i].fitness = it->second;
      } else if (first_pending.try_emplace(pop[i].bits, i).second) {
        pending.push_back(i);
      }
    }
    std::vector<double> values(pending.size(), 0.0);
    run_parallel(pending.size(), [&](std::size_t t) {
      values[t] = evaluate_fitness(pop[pending[t]], ds_, cfg_);
    });
    for (std::size_t t = 0; t < pending.size(); ++t) memo_[pop[pending[t]].bits] = values[t];
    for (auto& c : pop) {
      if (!c.fitness) c.fitness = memo_.at(c.bits);
    }
  }

  std::size_t evaluations() const noexcept { return memo_.size(); }

 private:
  template <typename Fn>
  void run_parallel(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(threads_, n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const Dataset& ds_;
  const GaConfig& cfg_;
  std::size_t threads_ = 1;
  std::map<std::vector<std::uint8_t>, double> memo_;
};

GenerationStats stats_of(const Population& pop, std::size_t generation) {
  std::size_t best = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    sum += *pop[i].fitness;
    if (fitter(pop[i], pop[best])) best = i;
  }
  return {generation, *pop[best].fitness, sum / static_cast<double>(pop.size()), pop[best].count()};
}

}  // namespace

GaResult evolve(const Dataset& ds, const GaConfig& cfg) {
  cfg.validate();
  FitnessEvaluator evaluator(ds, cfg);
  GaResult overall;
  bool have_overall = false;

  for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    Rng rng(seq);
    Population pop = init_population(ds.n_genes(), cfg, rng);
    GaTrace trace;
    Chromosome best;
    bool have_best = false;

    for (std::size_t gen = 0;; ++gen) {
      evaluator.evaluate(pop);
      trace.generations.push_back(stats_of(pop, gen));
      for (const auto& c : pop) {
        if (!have_best || preferred(c, best)) {
          best = c;
          have_best = true;
        }
      }
      if (gen == cfg.iterations) break;

      std::vector<std::size_t> order(pop.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return fitter(pop[a], pop[b]); });

      Population next;
      next.reserve(pop.size());
      for (std::size_t e = 0; e < cfg.elitism_count; ++e) next.push_back(pop[order[e]]);
      while (next.size() < pop.size()) {
        const std::size_t i = tournament_select(pop, cfg, rng);
        const std::size_t j = tournament_select(pop, cfg, rng);
        auto [first, second] = uniform_crossover(pop[i], pop[j], cfg, rng);
        next.push_back(mutate(std::move(first), cfg, rng));
        if (next.size() < pop.size()) next.push_back(mutate(std::move(second), cfg, rng));
      }
      pop = std::move(next);
    }

    if (!have_overall || preferred(best, overall.best)) {
      overall.best = std::move(best);
      overall.trace = std::move(trace);
      have_overall = true;
    }
  }
  overall.evaluations = evaluator.evaluations();
  return overall;
}

}  // namespace genesel::ga
