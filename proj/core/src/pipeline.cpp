#include "genesel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "genesel/error.hpp"

namespace genesel::pipeline {

std::string to_string(Protocol protocol) {
  return protocol == Protocol::paper ? "paper" : "nested";
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "paper") return Protocol::paper;
  if (name == "nested") return Protocol::nested;
  throw ConfigError("unknown protocol '" + name + "'");
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  boost.seed = s;
  ga.seed = s;
  for (auto& spec : eval_classifiers) spec.seed = s;
}

void PipelineConfig::validate() const {
  boost.validate();
  ga.validate();
  if (eval_classifiers.empty()) throw ConfigError("no evaluation classifier configured");
  for (const auto& spec : eval_classifiers) spec.validate();
  if (cv_k < 2) throw ConfigError("cv_k must be >= 2");
  if (cv_rounds < 1) throw ConfigError("cv_rounds must be >= 1");
  if (impute_neighbors < 1) throw ConfigError("impute_neighbors must be >= 1");
}

GeneSubset PipelineReport::stage1_indices() const {
  GeneSubset out;
  for (const auto& g : stage1_genes) out.push_back(g.index);
  return out;
}

GeneSubset PipelineReport::final_indices() const {
  GeneSubset out;
  for (const auto& g : final_genes) out.push_back(g.index);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  const double s = std::chrono::duration<double>(Clock::now() - start).count();
  return std::round(s * 1000.0) / 1000.0;
}

bool has_every_class(const Dataset& ds) {
  std::vector<bool> present(ds.n_classes(), false);
  for (ClassIndex y : ds.labels()) present[static_cast<std::size_t>(y)] = true;
  return std::ranges::find(present, false) == present.end();
}

}  // namespace

Stage1Result run_stage1(const Dataset& ds, const boosting::BoostParams& params) {
  Stage1Result r;
  r.model = boosting::fit(ds, params);
  r.importance = boosting::importances(r.model);
  r.genes = boosting::select_nonzero(r.importance);
  return r;
}

SelectionResult select_genes(const Dataset& ds, const PipelineConfig& cfg) {
  SelectionResult r;
  auto start = Clock::now();
  try {
    r.stage1 = run_stage1(ds, cfg.boost);
  } catch (const EmptySelectionError& e) {
    throw EmptySelectionError(std::string("stage 1 on '") + ds.name() + "' (" +
                              std::to_string(ds.n_samples()) + " samples, " +
                              std::to_string(ds.n_genes()) + " genes): " + e.what());
  }
  r.stage1_seconds = seconds_since(start);

  start = Clock::now();
  const Dataset reduced = project(ds, r.stage1.genes);
  r.ga = ga::evolve(reduced, cfg.ga);
  r.final_genes = ga::decode(r.ga.best, r.stage1.genes);
  r.stage2_seconds = seconds_since(start);
  return r;
}

PipelineReport run_pipeline(const Dataset& ds, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineReport report;
  report.dataset = ds.name();
  report.n_samples = ds.n_samples();
  report.n_genes = ds.n_genes();
  report.n_classes = ds.n_classes();
  report.config = cfg;

  const SelectionResult sel = select_genes(ds, cfg);
  for (GeneIndex g : sel.stage1.genes) {
    report.stage1_genes.push_back({g, ds.gene_ids()[g], sel.stage1.importance.total_gain[g]});
  }
  for (GeneIndex g : sel.final_genes) {
    report.final_genes.push_back({g, ds.gene_ids()[g], sel.stage1.importance.total_gain[g]});
  }
  report.ga_best_fitness = *sel.ga.best.fitness;
  report.ga_evaluations = sel.ga.evaluations;
  report.runtimes.stage1 = sel.stage1_seconds;
  report.runtimes.stage2 = sel.stage2_seconds;

  const auto start = Clock::now();
  const FoldPlan plan = make_folds(ds.labels(), cfg.cv_k, cfg.cv_rounds, cfg.seed);
  if (cfg.protocol == Protocol::paper) {
    const GeneSubset final_genes = report.final_indices();
    for (const auto& spec : cfg.eval_classifiers) {
      report.evaluations.push_back({spec, metrics::cross_validate(final_genes, ds, spec, plan)});
    }
  } else {
    std::vector<std::vector<metrics::FoldResult>> folds(cfg.eval_classifiers.size());
    std::vector<metrics::FoldId> skipped;
    for (std::size_t round = 0; round < plan.rounds; ++round) {
      for (std::size_t fold = 0; fold < plan.k; ++fold) {
        const auto test_rows = plan.test_indices(round, fold);
        if (test_rows.empty()) continue;
        Dataset train = ds.subset_rows(plan.train_indices(round, fold));
        Dataset test = ds.subset_rows(test_rows);
        if (!has_every_class(train)) {
          skipped.push_back({round, fold});
          continue;
        }
        if (cfg.refit_scaling_per_fold) {
          const auto stats = fit_minmax(train);
          train = apply_minmax(train, stats);
          test = apply_minmax(test, stats);
        }
        const SelectionResult inner = select_genes(train, cfg);
        report.nested_final_sizes.push_back(inner.final_genes.size());
        const Dataset train_sel = project(train, inner.final_genes);
        const Dataset test_sel = project(test, inner.final_genes);
        for (std::size_t c = 0; c < cfg.eval_classifiers.size(); ++c) {
          const auto model = classifiers::train(cfg.eval_classifiers[c], train_sel);
          const auto predicted = model.predict(test_sel);
          metrics::FoldResult r;
          r.id = {round, fold};
          r.n_test = test_rows.size();
          for (std::size_t i = 0; i < predicted.size(); ++i) {
            r.n_correct += predicted[i] == test_sel.labels()[i] ? 1 : 0;
          }
          r.metrics = metrics::compute_metrics(
              metrics::confusion(test_sel.labels(), predicted, ds.n_classes()));
          folds[c].push_back(r);
        }
      }
    }
    for (std::size_t c = 0; c < cfg.eval_classifiers.size(); ++c) {
      report.evaluations.push_back(
          {cfg.eval_classifiers[c], metrics::summarize(std::move(folds[c]), skipped)});
    }
  }
  report.runtimes.evaluation = seconds_since(start);
  return report;
}

metrics::WilcoxonResult compare_reports(const std::vector<metrics::CvSummary>& a,
                                        const std::vector<metrics::CvSummary>& b, double alpha) {
  if (a.size() != b.size()) {
    throw ValidationError("report lists are not aligned (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + " datasets)");
  }
  if (a.size() < 5) throw ValidationError("comparison needs at least 5 paired datasets");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i) {
    x.push_back(a[i].accuracy.mean);
    y.push_back(b[i].accuracy.mean);
  }
  return metrics::wilcoxon_signed_rank(x, y, metrics::ZeroPolicy::discard, alpha);
}

std::vector<ComparisonRow> compare_report_sets(const std::vector<PipelineReport>& a,
                                               const std::vector<PipelineReport>& b,
                                               double alpha) {
  auto index_by_name = [](const std::vector<PipelineReport>& reports, const char* side) {
    std::map<std::string, const PipelineReport*> out;
    for (const auto& r : reports) {
      if (!out.emplace(r.dataset, &r).second) {
        throw ValidationError(std::string("duplicate dataset '") + r.dataset + "' in set " + side);
      }
    }
    return out;
  };
  const auto by_a = index_by_name(a, "A");
  const auto by_b = index_by_name(b, "B");
  if (by_a.size() != by_b.size()) {
    throw ValidationError("report sets cover different numbers of datasets");
  }
  for (const auto& [name, _] : by_a) {
    if (!by_b.contains(name)) throw ValidationError("dataset '" + name + "' missing from set B");
  }

  auto classifier_names = [](const PipelineReport& r) {
    std::set<std::string> names;
    for (const auto& e : r.evaluations) names.insert(classifiers::to_string(e.spec.kind));
    return names;
  };
  std::set<std::string> common = classifier_names(*by_a.begin()->second);
  for (const auto* set : {&by_a, &by_b}) {
    for (const auto& [_, r] : *set) {
      std::set<std::string> keep;
      std::ranges::set_intersection(common, classifier_names(*r), std::inserter(keep, keep.end()));
      common = std::move(keep);
    }
  }
  if (common.empty()) throw ValidationError("no classifier is evaluated in every report");

  auto summary_for = [](const PipelineReport& r, const std::string& clf) {
    for (const auto& e : r.evaluations) {
      if (classifiers::to_string(e.spec.kind) == clf) return e.summary;
    }
    throw ValidationError("classifier missing");
  };

  std::vector<ComparisonRow> rows;
  for (const auto& clf : common) {
    ComparisonRow row;
    row.classifier = clf;
    std::vector<metrics::CvSummary> sa, sb;
    for (const auto& [name, ra] : by_a) {
      row.datasets.push_back(name);
      sa.push_back(summary_for(*ra, clf));
      sb.push_back(summary_for(*by_b.at(name), clf));
      row.accuracy_a.push_back(sa.back().accuracy.mean);
      row.accuracy_b.push_back(sb.back().accuracy.mean);
    }
    row.result = compare_reports(sa, sb, alpha);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace genesel::pipeline
