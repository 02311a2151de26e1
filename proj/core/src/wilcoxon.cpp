#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "genesel/error.hpp"
#include "genesel/metrics.hpp"

namespace genesel::metrics {

std::string to_string(ZeroPolicy policy) {
  return policy == ZeroPolicy::discard ? "discard" : "pratt";
}

ZeroPolicy zero_policy_from_string(const std::string& name) {
  if (name == "discard" || name == "wilcox") return ZeroPolicy::discard;
  if (name == "pratt") return ZeroPolicy::pratt;
  throw ConfigError("unknown zero policy '" + name + "'");
}

std::string to_string(WilcoxonMethod method) {
  return method == WilcoxonMethod::exact ? "exact" : "normal_approx";
}

namespace {

// Doubled midranks of `values` (1-based ranks; ties share the average).
std::vector<std::int64_t> doubled_midranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::int64_t> ranks(values.size(), 0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = doubled;
    i = j + 1;
  }
  return ranks;
}

// P(min(W+, W-) <= w) under the sign-symmetric null, by counting sign
// assignments with a subset-sum table over doubled ranks.
double exact_p(const std::vector<std::int64_t>& ranks2, std::int64_t w2) {
  const std::int64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  std::int64_t reach = 0;
  for (std::int64_t r : ranks2) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (ways[static_cast<std::size_t>(s)] != 0.0) {
        ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
      }
    }
    reach += r;
  }
  double hits = 0.0;
  for (std::int64_t s = 0; s <= total; ++s) {
    if (s <= w2 || s >= total - w2) hits += ways[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(ranks2.size())));
}

double normal_p(const std::vector<std::int64_t>& ranks2, double w) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t r2 : ranks2) {
    const double r = static_cast<double>(r2) / 2.0;
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / 2.0;
  const double sd = std::sqrt(sum_sq / 4.0);
  if (!(sd > 0.0)) return 1.0;
  const double z = std::min(0.0, (w - mean + 0.5) / sd);
  return std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    ZeroPolicy zero_policy, double alpha,
                                    std::optional<WilcoxonMethod> force) {
  if (x.size() != y.size()) {
    throw ValidationError("wilcoxon: samples have different lengths (" +
                          std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
  if (x.empty()) throw ValidationError("wilcoxon: empty samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("wilcoxon: alpha must be in (0, 1)");

  WilcoxonResult result;
  result.zero_policy = zero_policy;
  result.alpha = alpha;

  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];

  std::vector<double> magnitudes;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (zero_policy == ZeroPolicy::pratt || diff[i] != 0.0) {
      magnitudes.push_back(std::abs(diff[i]));
      source.push_back(i);
    }
  }
  const auto all_ranks = doubled_midranks(magnitudes);

  std::vector<std::int64_t> ranks2;
  std::int64_t plus2 = 0;
  std::int64_t minus2 = 0;
  for (std::size_t t = 0; t < source.size(); ++t) {
    const double d = diff[source[t]];
    if (d == 0.0) continue;
    ranks2.push_back(all_ranks[t]);
    (d > 0.0 ? plus2 : minus2) += all_ranks[t];
  }
  result.n_effective = ranks2.size();
  result.w_plus = static_cast<double>(plus2) / 2.0;
  result.w_minus = static_cast<double>(minus2) / 2.0;
  result.w_statistic = std::min(result.w_plus, result.w_minus);

  if (ranks2.empty()) {
    result.degenerate = true;
    result.p_value = 1.0;
    result.significant = false;
    return result;
  }

  result.method = force.value_or(result.n_effective <= kWilcoxonExactLimit
                                     ? WilcoxonMethod::exact
                                     : WilcoxonMethod::normal_approx);
  if (result.method == WilcoxonMethod::exact) {
    result.p_value = exact_p(ranks2, std::min(plus2, minus2));
  } else {
    result.p_value = normal_p(ranks2, result.w_statistic);
  }
  result.significant = result.p_value < alpha;
  return result;
}

}  // namespace genesel::metrics
