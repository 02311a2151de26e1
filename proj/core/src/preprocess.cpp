#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "genesel/dataset.hpp"
#include "genesel/error.hpp"

namespace genesel {

Dataset impute_knn(const Dataset& ds, const MissingMask& mask, std::size_t n_neighbors) {
  if (n_neighbors < 1) throw ValidationError("impute_knn: n_neighbors must be >= 1");
  if (mask.empty()) return ds;

  const std::size_t m = ds.n_samples();
  const std::size_t n = ds.n_genes();
  std::vector<char> missing(m * n, 0);
  for (auto [r, c] : mask.cells) {
    if (r >= m || c >= n) throw ValidationError("missing-value mask coordinate out of bounds");
    missing[r * n + c] = 1;
  }
  auto observed = [&](std::size_t r, std::size_t c) { return missing[r * n + c] == 0; };

  std::vector<double> column_mean(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < m; ++r) {
      if (observed(r, c)) {
        sum += ds.values()(r, c);
        ++count;
      }
    }
    if (count == 0) {
      throw ValidationError("gene '" + ds.gene_ids()[c] + "' has no observed values");
    }
    column_mean[c] = sum / static_cast<double>(count);
  }

  // Partial distances use only the original observed entries, so the result
  // does not depend on the order in which cells are filled.
  auto partial_distance = [&](std::size_t a, std::size_t b) {
    double sum = 0.0;
    std::size_t usable = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (observed(a, c) && observed(b, c)) {
        const double d = ds.values()(a, c) - ds.values()(b, c);
        sum += d * d;
        ++usable;
      }
    }
    if (usable == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(sum * static_cast<double>(n) / static_cast<double>(usable));
  };

  Matrix out = ds.values();
  std::vector<std::pair<double, std::size_t>> candidates;
  std::size_t cached_row = m;
  std::vector<double> row_distance(m);
  for (auto [r, c] : mask.cells) {
    if (r != cached_row) {
      for (std::size_t other = 0; other < m; ++other) {
        row_distance[other] = other == r ? 0.0 : partial_distance(r, other);
      }
      cached_row = r;
    }
    candidates.clear();
    for (std::size_t other = 0; other < m; ++other) {
      if (other == r || !observed(other, c) || !std::isfinite(row_distance[other])) continue;
      candidates.emplace_back(row_distance[other], other);
    }
    if (candidates.empty()) {
      out(r, c) = column_mean[c];
      continue;
    }
    const std::size_t take = std::min(n_neighbors, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += ds.values()(candidates[i].second, c);
    out(r, c) = sum / static_cast<double>(take);
  }
  return ds.with_values(std::move(out));
}

MinMaxStats fit_minmax(const Dataset& ds) {
  MinMaxStats stats;
  stats.min.assign(ds.n_genes(), std::numeric_limits<double>::infinity());
  stats.max.assign(ds.n_genes(), -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    auto row = ds.values().row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      stats.min[c] = std::min(stats.min[c], row[c]);
      stats.max[c] = std::max(stats.max[c], row[c]);
    }
  }
  return stats;
}

Dataset apply_minmax(const Dataset& ds, const MinMaxStats& stats) {
  if (stats.min.size() != ds.n_genes() || stats.max.size() != ds.n_genes()) {
    throw ValidationError("min-max statistics do not match the gene count");
  }
  Matrix out(ds.n_samples(), ds.n_genes());
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    auto src = ds.values().row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) {
      const double range = stats.max[c] - stats.min[c];
      dst[c] = range > 0.0 ? (src[c] - stats.min[c]) / range : 0.0;
    }
  }
  return ds.with_values(std::move(out));
}

Dataset normalize_minmax(const Dataset& ds) { return apply_minmax(ds, fit_minmax(ds)); }

}  // namespace genesel
