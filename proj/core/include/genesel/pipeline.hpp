#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "genesel/boosting.hpp"
#include "genesel/classifiers.hpp"
#include "genesel/dataset.hpp"
#include "genesel/ga.hpp"
#include "genesel/metrics.hpp"

namespace genesel::pipeline {

/// paper: select genes on the whole dataset, then cross-validate the
/// classifiers on the chosen subset. nested: repeat both selection stages
/// inside every outer training fold and score only the held-out fold.
enum class Protocol { paper, nested };

std::string to_string(Protocol protocol);
Protocol protocol_from_string(const std::string& name);

struct PipelineConfig {
  boosting::BoostParams boost;
  ga::GaConfig ga;
  std::vector<classifiers::ClassifierSpec> eval_classifiers = {
      {.kind = classifiers::Kind::linear_svm}, {.kind = classifiers::Kind::gaussian_nb}};
  std::size_t cv_k = 10;
  std::size_t cv_rounds = 10;
  Protocol protocol = Protocol::paper;
  std::size_t impute_neighbors = 5;
  /// nested only: refit min-max scaling on each outer training fold.
  bool refit_scaling_per_fold = true;
  std::uint64_t seed = 0;

  /// Copies `seed` into every component so one number fixes the whole run.
  void set_seed(std::uint64_t s);
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

struct SelectedGene {
  GeneIndex index = 0;
  std::string id;
  double gain = 0.0;

  bool operator==(const SelectedGene&) const = default;
};

struct ClassifierEvaluation {
  classifiers::ClassifierSpec spec;
  metrics::CvSummary summary;

  bool operator==(const ClassifierEvaluation&) const = default;
};

/// Wall-clock seconds, rounded to milliseconds.
struct Runtimes {
  double stage1 = 0.0;
  double stage2 = 0.0;
  double evaluation = 0.0;

  bool operator==(const Runtimes&) const = default;
};

struct PipelineReport {
  static constexpr int kSchemaVersion = 1;

  std::string dataset;
  std::size_t n_samples = 0;
  std::size_t n_genes = 0;
  std::size_t n_classes = 0;
  std::vector<SelectedGene> stage1_genes;
  std::vector<SelectedGene> final_genes;
  double ga_best_fitness = 0.0;
  std::size_t ga_evaluations = 0;
  std::vector<ClassifierEvaluation> evaluations;
  /// nested only: number of finally selected genes in each outer fold.
  std::vector<std::size_t> nested_final_sizes;
  Runtimes runtimes;
  PipelineConfig config;
  std::string preprocessing;

  std::size_t stage1_size() const noexcept { return stage1_genes.size(); }
  std::size_t final_size() const noexcept { return final_genes.size(); }
  GeneSubset stage1_indices() const;
  GeneSubset final_indices() const;

  bool operator==(const PipelineReport&) const = default;
};

/// Stage 1 alone: boosted-tree importances and the positive-gain subset.
struct Stage1Result {
  boosting::BoostedEnsemble model;
  boosting::ImportanceReport importance;
  GeneSubset genes;
};

Stage1Result run_stage1(const Dataset& ds, const boosting::BoostParams& params);

/// Stage 1 followed by the GA on the stage-1 projection.
struct SelectionResult {
  Stage1Result stage1;
  ga::GaResult ga;
  GeneSubset final_genes;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
};

SelectionResult select_genes(const Dataset& ds, const PipelineConfig& cfg);

/// Runs the whole two-stage selection and evaluation. `ds` must already be
/// imputed and normalized.
PipelineReport run_pipeline(const Dataset& ds, const PipelineConfig& cfg);

/// Paired test of per-dataset mean CV accuracies (a[i] vs b[i]).
metrics::WilcoxonResult compare_reports(const std::vector<metrics::CvSummary>& a,
                                        const std::vector<metrics::CvSummary>& b,
                                        double alpha = 0.05);

struct ComparisonRow {
  std::string classifier;
  std::vector<std::string> datasets;
  std::vector<double> accuracy_a;
  std::vector<double> accuracy_b;
  metrics::WilcoxonResult result;
};

/// Aligns two report sets by dataset name and runs compare_reports once per
/// classifier present in every report.
std::vector<ComparisonRow> compare_report_sets(const std::vector<PipelineReport>& a,
                                               const std::vector<PipelineReport>& b,
                                               double alpha = 0.05);

struct JsonOptions {
  /// Wall-clock runtimes differ between otherwise identical runs, so they are
  /// opt-in.
  bool include_runtimes = false;
};

std::string to_json(const PipelineReport& report, const JsonOptions& options = {});
PipelineReport report_from_json(const std::string& text);
/// Gene-count funnel, CV metrics as "mean (+/- std)" percentages and runtimes.
std::string to_markdown(const PipelineReport& report);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace genesel::pipeline
