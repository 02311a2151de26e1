#include "genesel/metrics.hpp"

#include <cmath>
#include <numeric>

#include "genesel/error.hpp"

namespace genesel::metrics {

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

ConfusionMatrix confusion(std::span<const ClassIndex> actual, std::span<const ClassIndex> predicted,
                          std::size_t n_classes) {
  if (actual.size() != predicted.size()) {
    throw ValidationError("confusion: " + std::to_string(actual.size()) + " actual vs " +
                          std::to_string(predicted.size()) + " predicted labels");
  }
  ConfusionMatrix cm;
  cm.counts.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const auto a = static_cast<std::size_t>(actual[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (actual[i] < 0 || predicted[i] < 0 || a >= n_classes || p >= n_classes) {
      throw ValidationError("confusion: class index out of range");
    }
    ++cm.counts[a][p];
  }
  return cm;
}

MetricReport compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw ValidationError("metrics of an empty confusion matrix");
  const std::size_t c = cm.n_classes();
  std::size_t trace = 0;
  for (std::size_t k = 0; k < c; ++k) trace += cm.counts[k][k];

  double p_sum = 0.0;
  double r_sum = 0.0;
  double f_sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double tp = static_cast<double>(cm.counts[k][k]);
    double predicted = 0.0;
    double actual = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      predicted += static_cast<double>(cm.counts[j][k]);
      actual += static_cast<double>(cm.counts[k][j]);
    }
    const double precision = predicted > 0.0 ? tp / predicted : 0.0;
    const double recall = actual > 0.0 ? tp / actual : 0.0;
    const double f = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    p_sum += precision;
    r_sum += recall;
    f_sum += f;
  }
  const double denom = static_cast<double>(c);
  return {static_cast<double>(trace) / static_cast<double>(total), p_sum / denom, r_sum / denom,
          f_sum / denom};
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

CvSummary summarize(std::vector<FoldResult> folds, std::vector<FoldId> skipped) {
  CvSummary s;
  std::vector<double> acc, prec, rec, f;
  for (const auto& r : folds) {
    acc.push_back(r.metrics.accuracy);
    prec.push_back(r.metrics.macro_precision);
    rec.push_back(r.metrics.macro_recall);
    f.push_back(r.metrics.macro_f_score);
  }
  s.accuracy = mean_std(acc);
  s.precision = mean_std(prec);
  s.recall = mean_std(rec);
  s.f_score = mean_std(f);
  s.folds = std::move(folds);
  s.skipped = std::move(skipped);
  return s;
}

}  // namespace genesel::metrics
