#include <algorithm>
#include <random>

#include "genesel/dataset.hpp"
#include "genesel/error.hpp"

namespace genesel {

FoldPlan make_folds(std::span<const ClassIndex> labels, std::size_t k, std::size_t rounds,
                    std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be >= 2");
  if (k > labels.size()) {
    throw ValidationError("fold count " + std::to_string(k) + " exceeds sample count " +
                          std::to_string(labels.size()));
  }
  ClassIndex max_label = -1;
  for (ClassIndex y : labels) {
    if (y < 0) throw ValidationError("negative class label");
    max_label = std::max(max_label, y);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  FoldPlan plan;
  plan.k = k;
  plan.rounds = rounds;
  plan.seed = seed;
  plan.assignments.assign(rounds, std::vector<std::size_t>(labels.size(), 0));
  for (std::size_t round = 0; round < rounds; ++round) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(round)};
    std::mt19937_64 rng(seq);
    // Deal each shuffled class round-robin; carrying the fold cursor across
    // classes keeps overall fold sizes within one of each other.
    std::size_t cursor = 0;
    for (auto members : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t idx : members) {
        plan.assignments[round][idx] = cursor;
        cursor = (cursor + 1) % k;
      }
    }
  }
  return plan;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t round, std::size_t fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignments.at(round);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t round, std::size_t fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignments.at(round);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != fold) out.push_back(i);
  }
  return out;
}

}  // namespace genesel
