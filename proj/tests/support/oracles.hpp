#pragma once

// Slow, direct reference implementations used only by tests. Each one is
// written from the definition rather than from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "genesel/boosting.hpp"
#include "genesel/dataset.hpp"
#include "genesel/ga.hpp"

namespace oracle {

using genesel::ClassIndex;
using genesel::Matrix;

// ---------------------------------------------------------------- boosting

/// Regularized objective of one leaf at weight w: G w + (H + lambda) w^2 / 2 + gamma.
inline double leaf_objective(double g, double h, double w, double lambda, double gamma) {
  return g * w + 0.5 * (h + lambda) * w * w + gamma;
}

/// Minimizer of the (convex) leaf objective on [-1e6, 1e6]. Comparing
/// objective values stalls near sqrt(epsilon) on a flat minimum, so the
/// search bisects on the sign of the slope G + (H + lambda) w instead.
inline double argmin_leaf(double g, double h, double lambda) {
  double lo = -1e6;
  double hi = 1e6;
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g + (h + lambda) * mid > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Coarse ternary search on objective values; only good to ~1e-7.
inline double ternary_argmin_leaf(double g, double h, double lambda) {
  double lo = -1e6;
  double hi = 1e6;
  for (int it = 0; it < 300; ++it) {
    const double a = lo + (hi - lo) / 3.0;
    const double b = hi - (hi - lo) / 3.0;
    if (leaf_objective(g, h, a, lambda, 0.0) < leaf_objective(g, h, b, lambda, 0.0)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return 0.5 * (lo + hi);
}

/// Objective of one leaf minus the objective of two leaves, each at its own
/// optimal weight -G/(H+lambda), evaluated directly.
inline double objective_drop(double gl, double hl, double gr, double hr, double lambda,
                             double gamma) {
  auto best = [&](double g, double h) {
    const double w = -g / (h + lambda);
    return leaf_objective(g, h, w, lambda, gamma);
  };
  return best(gl + gr, hl + hr) - (best(gl, hl) + best(gr, hr));
}

struct Node {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;
  double gain = 0.0;
};

/// Exhaustive tree growth. For every feature, candidate thresholds are the
/// midpoints of consecutive distinct values among `rows`; partition sums are
/// recomputed from scratch for every candidate. Candidates are scanned by
/// feature then threshold, a later one wins only if it beats the incumbent by
/// the library's relative tie tolerance, and a split is kept iff its gain is
/// positive. Nodes are emitted depth-first (parent, left subtree, right subtree).
inline int grow(std::vector<Node>& out, const Matrix& x, const std::vector<double>& g,
                const std::vector<double>& h, const std::vector<std::size_t>& rows,
                std::size_t depth, const genesel::boosting::BoostParams& p) {
  double gs = 0.0, hs = 0.0;
  for (auto i : rows) {
    gs += g[i];
    hs += h[i];
  }
  const int me = static_cast<int>(out.size());
  out.push_back({});

  bool have = false;
  int best_f = -1;
  double best_t = 0.0, best_gain = 0.0;
  if (depth < p.max_depth) {
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::vector<double> vals;
      for (auto i : rows) vals.push_back(x(i, f));
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
        double thr = vals[t] + (vals[t + 1] - vals[t]) / 2.0;
        if (thr <= vals[t]) thr = vals[t + 1];
        double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
        for (auto i : rows) {
          if (x(i, f) < thr) {
            gl += g[i];
            hl += h[i];
          } else {
            gr += g[i];
            hr += h[i];
          }
        }
        const double gain = objective_drop(gl, hl, gr, hr, p.lambda, p.gamma);
        const double tol =
            genesel::boosting::kGainTieTolerance * std::max(1.0, std::abs(best_gain));
        if (!have || gain > best_gain + tol) {
          have = true;
          best_f = static_cast<int>(f);
          best_t = thr;
          best_gain = gain;
        }
      }
    }
  }
  if (!have || !(best_gain > 0.0)) {
    out[static_cast<std::size_t>(me)].weight = argmin_leaf(gs, hs, p.lambda);
    return me;
  }
  std::vector<std::size_t> l, r;
  for (auto i : rows) (x(i, static_cast<std::size_t>(best_f)) < best_t ? l : r).push_back(i);
  const int li = grow(out, x, g, h, l, depth + 1, p);
  const int ri = grow(out, x, g, h, r, depth + 1, p);
  auto& n = out[static_cast<std::size_t>(me)];
  n.feature = best_f;
  n.threshold = best_t;
  n.left = li;
  n.right = ri;
  n.gain = best_gain;
  return me;
}

inline double eval_tree(const std::vector<Node>& t, std::span<const double> row) {
  std::size_t at = 0;
  while (t[at].feature >= 0) {
    at = static_cast<std::size_t>(row[static_cast<std::size_t>(t[at].feature)] < t[at].threshold
                                      ? t[at].left
                                      : t[at].right);
  }
  return t[at].weight;
}

/// Squared-loss boosting with subsample = 1, starting from the target mean.
inline std::vector<std::vector<Node>> fit_squared(const Matrix& x, const std::vector<double>& y,
                                                  const genesel::boosting::BoostParams& p) {
  const std::size_t m = x.rows();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(m);
  std::vector<double> raw(m, mean);
  std::vector<std::size_t> rows(m);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<std::vector<Node>> trees;
  for (std::size_t t = 0; t < p.n_estimators; ++t) {
    std::vector<double> g(m), h(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) g[i] = raw[i] - y[i];
    std::vector<Node> tree;
    grow(tree, x, g, h, rows, 0, p);
    for (std::size_t i = 0; i < m; ++i) raw[i] += p.learning_rate * eval_tree(tree, x.row(i));
    trees.push_back(std::move(tree));
  }
  return trees;
}

/// Central difference of f at r.
inline double central_diff(const std::function<double(double)>& f, double r, double step) {
  return (f(r + step) - f(r - step)) / (2.0 * step);
}

// ---------------------------------------------------------------- wilcoxon

/// Two-sided exact p-value by enumerating every sign assignment of the
/// midranks of the nonzero |d|: the share of assignments whose
/// min(W+, W-) is at most the observed one.
inline double wilcoxon_enumerate(const std::vector<double>& d) {
  std::vector<double> mags;
  std::vector<int> signs;
  for (double v : d) {
    if (v != 0.0) {
      mags.push_back(std::abs(v));
      signs.push_back(v > 0 ? 1 : -1);
    }
  }
  const std::size_t n = mags.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      less += mags[j] < mags[i];
      equal += mags[j] == mags[i];
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double total = 0, plus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (signs[i] > 0) plus += rank[i];
  }
  const double observed = std::min(plus, total - plus);
  std::uint64_t hits = 0;
  const std::uint64_t cases = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < cases; ++mask) {
    double wp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) wp += rank[i];
    }
    if (std::min(wp, total - wp) <= observed + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cases);
}

// ---------------------------------------------------------------- classifiers

/// k-NN by sorting every training row by (squared distance, index), then a
/// vote whose ties go to the class met first in that order.
inline ClassIndex knn_sort(const Matrix& x, const std::vector<ClassIndex>& y, std::size_t n_classes,
                           std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) s += (x(i, j) - q[j]) * (x(i, j) - q[j]);
    order.emplace_back(s, i);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> votes(n_classes, 0);
  for (std::size_t t = 0; t < k; ++t) ++votes[static_cast<std::size_t>(y[order[t].second])];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  for (std::size_t t = 0; t < k; ++t) {
    const auto c = static_cast<std::size_t>(y[order[t].second]);
    if (votes[c] == top) return static_cast<ClassIndex>(c);
  }
  return 0;
}

// ---------------------------------------------------------------- imputation

/// Imputed value of cell (r, c): mean of column c over the n nearest rows
/// observing c, with distance sqrt(N / usable * sum over mutually observed
/// coordinates). Ties in distance go to the lower row.
inline double impute_cell(const Matrix& x, const genesel::MissingMask& mask, std::size_t r,
                          std::size_t c, std::size_t n) {
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (i == r || mask.contains(i, c)) continue;
    double s = 0;
    std::size_t usable = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (mask.contains(i, j) || mask.contains(r, j)) continue;
      s += (x(i, j) - x(r, j)) * (x(i, j) - x(r, j));
      ++usable;
    }
    // A row sharing no observed coordinate has no defined distance.
    if (usable == 0) continue;
    cand.emplace_back(std::sqrt(s * static_cast<double>(x.cols()) / static_cast<double>(usable)), i);
  }
  if (cand.empty()) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (mask.contains(i, c)) continue;
      sum += x(i, c);
      ++count;
    }
    return sum / static_cast<double>(count);
  }
  std::sort(cand.begin(), cand.end());
  const std::size_t use = std::min(n, cand.size());
  double sum = 0;
  for (std::size_t t = 0; t < use; ++t) sum += x(cand[t].second, c);
  return sum / static_cast<double>(use);
}

// ---------------------------------------------------------------- GA

struct SubsetScore {
  std::vector<std::uint8_t> bits;
  double fitness = 0.0;
  std::size_t count = 0;
};

/// Fitness of every nonempty subset of the genes, via the library's fitness
/// function, listed in mask order 1..2^N-1.
inline std::vector<SubsetScore> all_subsets(const genesel::Dataset& ds,
                                            const genesel::ga::GaConfig& cfg) {
  std::vector<SubsetScore> out;
  const std::size_t n = ds.n_genes();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    genesel::ga::Chromosome c;
    c.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.bits[i] = (mask >> i & 1U) ? 1 : 0;
    out.push_back({c.bits, genesel::ga::evaluate_fitness(c, ds, cfg), c.count()});
  }
  return out;
}

/// Best subset under (fitness desc, count asc, selected positions asc) and
/// the number of subsets sharing its (fitness, count).
inline std::pair<SubsetScore, std::size_t> lexicographic_best(
    const std::vector<SubsetScore>& all) {
  auto positions = [](const std::vector<std::uint8_t>& b) {
    std::vector<std::size_t> p;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i]) p.push_back(i);
    }
    return p;
  };
  SubsetScore best = all.front();
  for (const auto& s : all) {
    if (s.fitness > best.fitness ||
        (s.fitness == best.fitness &&
         (s.count < best.count ||
          (s.count == best.count && positions(s.bits) < positions(best.bits))))) {
      best = s;
    }
  }
  std::size_t ties = 0;
  for (const auto& s : all) ties += s.fitness == best.fitness && s.count == best.count;
  return {best, ties};
}

}  // namespace oracle
