#include <algorithm>

#include "genesel/error.hpp"
#include "genesel/metrics.hpp"

namespace genesel::metrics {

CvSummary cross_validate(std::span<const GeneIndex> genes, const Dataset& ds,
                         const classifiers::ClassifierSpec& spec, const FoldPlan& plan) {
  if (plan.n_samples() != ds.n_samples()) {
    throw ValidationError("fold plan covers " + std::to_string(plan.n_samples()) +
                          " samples, dataset has " + std::to_string(ds.n_samples()));
  }
  const Dataset projected = project(ds, genes);
  std::vector<FoldResult> results;
  std::vector<FoldId> skipped;
  for (std::size_t round = 0; round < plan.rounds; ++round) {
    for (std::size_t fold = 0; fold < plan.k; ++fold) {
      const auto train_rows = plan.train_indices(round, fold);
      const auto test_rows = plan.test_indices(round, fold);
      if (test_rows.empty()) continue;
      const Dataset train = projected.subset_rows(train_rows);
      std::vector<bool> present(ds.n_classes(), false);
      for (ClassIndex y : train.labels()) present[static_cast<std::size_t>(y)] = true;
      if (std::ranges::find(present, false) != present.end()) {
        skipped.push_back({round, fold});
        continue;
      }
      const Dataset test = projected.subset_rows(test_rows);
      const auto model = classifiers::train(spec, train);
      const auto predicted = model.predict(test);
      const auto cm = confusion(test.labels(), predicted, ds.n_classes());
      FoldResult r;
      r.id = {round, fold};
      r.n_test = test_rows.size();
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        r.n_correct += predicted[i] == test.labels()[i] ? 1 : 0;
      }
      r.metrics = compute_metrics(cm);
      results.push_back(r);
    }
  }
  return summarize(std::move(results), std::move(skipped));
}

}  // namespace genesel::metrics
