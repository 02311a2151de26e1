#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genesel/classifiers.hpp"
#include "genesel/dataset.hpp"

namespace genesel::metrics {

/// counts[actual][predicted].
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  std::size_t n_classes() const noexcept { return counts.size(); }
  std::size_t total() const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const ClassIndex> actual, std::span<const ClassIndex> predicted,
                          std::size_t n_classes);

/// Accuracy plus macro-averaged (unweighted over classes) precision, recall
/// and F-score. A class whose denominator is zero contributes 0.
struct MetricReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f_score = 0.0;

  bool operator==(const MetricReport&) const = default;
};

MetricReport compute_metrics(const ConfusionMatrix& cm);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  bool operator==(const MeanStd&) const = default;
};

MeanStd mean_std(std::span<const double> values);

struct FoldId {
  std::size_t round = 0;
  std::size_t fold = 0;

  bool operator==(const FoldId&) const = default;
};

struct FoldResult {
  FoldId id;
  std::size_t n_test = 0;
  std::size_t n_correct = 0;
  MetricReport metrics;

  bool operator==(const FoldResult&) const = default;
};

/// Mean and population std of each metric over all scored folds.
struct CvSummary {
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  MeanStd f_score;
  std::vector<FoldResult> folds;
  /// Folds whose training partition lacked a class and were not scored.
  std::vector<FoldId> skipped;

  bool operator==(const CvSummary&) const = default;
};

CvSummary summarize(std::vector<FoldResult> folds, std::vector<FoldId> skipped = {});

/// Repeated k-fold evaluation of `spec` on `ds` restricted to `genes`.
CvSummary cross_validate(std::span<const GeneIndex> genes, const Dataset& ds,
                         const classifiers::ClassifierSpec& spec, const FoldPlan& plan);

enum class ZeroPolicy { discard, pratt };
enum class WilcoxonMethod { exact, normal_approx };

std::string to_string(ZeroPolicy policy);
ZeroPolicy zero_policy_from_string(const std::string& name);
std::string to_string(WilcoxonMethod method);

struct WilcoxonResult {
  double w_statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;      // two-sided
  std::size_t n_effective = 0;
  WilcoxonMethod method = WilcoxonMethod::exact;
  ZeroPolicy zero_policy = ZeroPolicy::discard;
  bool degenerate = false;   // every difference was zero
  double alpha = 0.05;
  bool significant = false;  // p_value < alpha
};

/// Largest effective sample size for which the exact null distribution is used.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Paired two-sided signed-rank test on d = x - y. Ties get midranks.
///
/// The exact null distribution (all 2^n sign assignments of the ranks) is
/// used when n_effective <= kWilcoxonExactLimit, the tie- and
/// continuity-corrected normal approximation otherwise. `force` overrides
/// that choice.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    ZeroPolicy zero_policy = ZeroPolicy::discard,
                                    double alpha = 0.05,
                                    std::optional<WilcoxonMethod> force = std::nullopt);

}  // namespace genesel::metrics
