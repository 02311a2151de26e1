#include "genesel/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "genesel/error.hpp"

namespace genesel::boosting {

std::string to_string(Loss loss) { return loss == Loss::squared ? "squared" : "logistic"; }

Loss loss_from_string(const std::string& name) {
  if (name == "squared") return Loss::squared;
  if (name == "logistic") return Loss::logistic;
  throw ConfigError("unknown loss '" + name + "'");
}

void BoostParams::validate() const {
  if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must be in (0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (loss != Loss::squared && loss != Loss::logistic) throw ConfigError("unknown loss");
}

namespace {

double sigmoid(double r) {
  if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
  const double e = std::exp(r);
  return e / (1.0 + e);
}

}  // namespace

GradHess grad_hess(Loss loss, double y, double raw) {
  switch (loss) {
    case Loss::squared:
      return {raw - y, 1.0};
    case Loss::logistic: {
      const double p = sigmoid(raw);
      return {p - y, std::max(p * (1.0 - p), kMinHessian)};
    }
  }
  throw ConfigError("unknown loss");
}

double loss_value(Loss loss, double y, double raw) {
  switch (loss) {
    case Loss::squared:
      return 0.5 * (y - raw) * (y - raw);
    case Loss::logistic:
      // log(1 + e^r) - y r, evaluated without overflow.
      return std::max(raw, 0.0) + std::log1p(std::exp(-std::abs(raw))) - y * raw;
  }
  throw ConfigError("unknown loss");
}

double leaf_weight(double sum_grad, double sum_hess, double lambda) {
  const double denom = sum_hess + lambda;
  if (!(denom > 0.0)) {
    throw DegenerateLeafError("leaf has H + lambda = " + std::to_string(denom));
  }
  return -sum_grad / denom;
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double lambda, double gamma) {
  auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
  return 0.5 * (score(grad_left, hess_left) + score(grad_right, hess_right) -
                score(grad_left + grad_right, hess_left + hess_right)) -
         gamma;
}

double Tree::evaluate(std::span<const double> x) const {
  std::size_t at = 0;
  while (!nodes[at].is_leaf()) {
    const auto& node = nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[at].weight;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::ranges::count_if(nodes, [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<std::vector<double>> BoostedEnsemble::predict_raw(const Matrix& x) const {
  if (x.cols() != n_genes) {
    throw ValidationError("model expects " + std::to_string(n_genes) + " genes, data has " +
                          std::to_string(x.cols()));
  }
  std::vector<std::vector<double>> raw(n_outputs, std::vector<double>(x.rows(), 0.0));
  for (std::size_t o = 0; o < n_outputs; ++o) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double r = base_score[o];
      for (const auto& round : trees) r += params.learning_rate * round[o].evaluate(x.row(i));
      raw[o][i] = r;
    }
  }
  return raw;
}

namespace {

struct SplitChoice {
  int feature = TreeNode::kLeaf;
  double threshold = 0.0;
  double gain = 0.0;
};

bool better_gain(double candidate, double incumbent) {
  return candidate > incumbent + kGainTieTolerance * std::max(1.0, std::abs(incumbent));
}

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted_rows,
             std::span<const double> grad, std::span<const double> hess, const BoostParams& p)
      : x_(x), sorted_rows_(sorted_rows), grad_(grad), hess_(hess), params_(p),
        member_(x.rows(), 0) {}

  Tree grow(std::vector<std::size_t> rows) {
    Tree tree;
    build(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int build(Tree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    double g_sum = 0.0;
    double h_sum = 0.0;
    for (std::size_t i : rows) {
      g_sum += grad_[i];
      h_sum += hess_[i];
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitChoice best;
    if (depth < params_.max_depth && rows.size() >= 2) best = find_split(rows, g_sum, h_sum);
    if (best.feature == TreeNode::kLeaf || !(best.gain > 0.0)) {
      tree.nodes[static_cast<std::size_t>(index)].weight = leaf_weight(g_sum, h_sum, params_.lambda);
      return index;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto f = static_cast<std::size_t>(best.feature);
    for (std::size_t i : rows) (x_(i, f) < best.threshold ? left : right).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    const int l = build(tree, std::move(left), depth + 1);
    const int r = build(tree, std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    node.gain = best.gain;
    return index;
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows, double g_sum, double h_sum) {
    for (std::size_t i : rows) member_[i] = 1;
    SplitChoice best;
    bool have = false;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      double g_left = 0.0;
      double h_left = 0.0;
      bool started = false;
      double prev = 0.0;
      for (std::size_t i : sorted_rows_[f]) {
        if (!member_[i]) continue;
        const double v = x_(i, f);
        if (started && v != prev) {
          double threshold = prev + (v - prev) / 2.0;
          if (threshold <= prev) threshold = v;
          const double gain = split_gain(g_left, h_left, g_sum - g_left, h_sum - h_left,
                                         params_.lambda, params_.gamma);
          if (!have || better_gain(gain, best.gain)) {
            best = {static_cast<int>(f), threshold, gain};
            have = true;
          }
        }
        g_left += grad_[i];
        h_left += hess_[i];
        prev = v;
        started = true;
      }
    }
    for (std::size_t i : rows) member_[i] = 0;
    return best;
  }

  const Matrix& x_;
  const std::vector<std::vector<std::size_t>>& sorted_rows_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const BoostParams& params_;
  std::vector<char> member_;
};

double initial_score(Loss loss, const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  if (loss == Loss::squared) return mean;
  const double p = std::clamp(mean, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

}  // namespace

BoostedEnsemble fit(const Matrix& x, const std::vector<std::vector<double>>& targets,
                    const BoostParams& params) {
  params.validate();
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (m == 0 || n == 0) throw ValidationError("cannot fit on an empty matrix");
  if (targets.empty()) throw ValidationError("no targets given");
  for (const auto& y : targets) {
    if (y.size() != m) throw ValidationError("target length does not match sample count");
    for (double v : y) {
      if (!std::isfinite(v)) throw ValidationError("non-finite target");
      if (params.loss == Loss::logistic && v != 0.0 && v != 1.0) {
        throw ValidationError("logistic loss requires 0/1 targets");
      }
    }
  }
  for (double v : x.data()) {
    if (std::isnan(v)) throw ValidationError("expression matrix contains NaN");
  }

  BoostedEnsemble model;
  model.params = params;
  model.n_genes = n;
  model.n_outputs = targets.size();
  for (const auto& y : targets) model.base_score.push_back(initial_score(params.loss, y));

  std::vector<std::vector<std::size_t>> sorted_rows(n, std::vector<std::size_t>(m));
  for (std::size_t f = 0; f < n; ++f) {
    auto& order = sorted_rows[f];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }

  std::vector<std::vector<double>> raw(model.n_outputs);
  for (std::size_t o = 0; o < model.n_outputs; ++o) raw[o].assign(m, model.base_score[o]);

  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> all_rows(m);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  const auto n_sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(m))));

  std::vector<double> grad(m, 0.0);
  std::vector<double> hess(m, 0.0);
  for (std::size_t round = 0; round < params.n_estimators; ++round) {
    std::vector<std::size_t> rows = all_rows;
    if (n_sub < m) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(n_sub);
      std::ranges::sort(rows);
    }
    auto& round_trees = model.trees.emplace_back();
    for (std::size_t o = 0; o < model.n_outputs; ++o) {
      for (std::size_t i : rows) {
        const auto gh = grad_hess(params.loss, targets[o][i], raw[o][i]);
        grad[i] = gh.g;
        hess[i] = gh.h;
      }
      TreeGrower grower(x, sorted_rows, grad, hess, params);
      Tree tree = grower.grow(rows);
      for (std::size_t i = 0; i < m; ++i) {
        raw[o][i] += params.learning_rate * tree.evaluate(x.row(i));
      }
      round_trees.push_back(std::move(tree));
    }
  }
  return model;
}

BoostedEnsemble fit(const Dataset& ds, const BoostParams& params) {
  const std::size_t c = ds.n_classes();
  if (c < 2) throw ValidationError("classification requires at least two classes");
  std::vector<std::vector<double>> targets;
  if (c == 2) {
    targets.emplace_back(ds.labels().begin(), ds.labels().end());
  } else {
    for (std::size_t k = 0; k < c; ++k) {
      auto& t = targets.emplace_back(ds.n_samples(), 0.0);
      for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        t[i] = static_cast<std::size_t>(ds.labels()[i]) == k ? 1.0 : 0.0;
      }
    }
  }
  return fit(ds.values(), targets, params);
}

std::vector<ClassIndex> predict_class(const BoostedEnsemble& model, const Matrix& x) {
  const auto raw = model.predict_raw(x);
  std::vector<ClassIndex> out(x.rows(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (model.n_outputs == 1) {
      const double r = raw[0][i];
      // An exact tie goes to the lower class.
      const bool positive = model.params.loss == Loss::logistic ? r > 0.0 : r > 0.5;
      out[i] = positive ? 1 : 0;
    } else {
      std::size_t best = 0;
      for (std::size_t o = 1; o < model.n_outputs; ++o) {
        if (raw[o][i] > raw[best][i]) best = o;
      }
      out[i] = static_cast<ClassIndex>(best);
    }
  }
  return out;
}

std::vector<ClassIndex> predict_class(const BoostedEnsemble& model, const Dataset& ds) {
  return predict_class(model, ds.values());
}

std::vector<double> predict_value(const BoostedEnsemble& model, const Matrix& x) {
  return model.predict_raw(x).front();
}

ImportanceReport importances(const BoostedEnsemble& model) {
  ImportanceReport report;
  report.total_gain.assign(model.n_genes, 0.0);
  report.split_count.assign(model.n_genes, 0);
  for (const auto& round : model.trees) {
    for (const auto& tree : round) {
      for (const auto& node : tree.nodes) {
        if (node.is_leaf()) continue;
        const auto f = static_cast<std::size_t>(node.feature);
        report.total_gain[f] += node.gain;
        report.split_count[f] += 1;
      }
    }
  }
  report.ranking.resize(model.n_genes);
  std::iota(report.ranking.begin(), report.ranking.end(), GeneIndex{0});
  std::ranges::stable_sort(report.ranking, [&](GeneIndex a, GeneIndex b) {
    return report.total_gain[a] > report.total_gain[b];
  });
  return report;
}

GeneSubset select_nonzero(const ImportanceReport& report) {
  GeneSubset out;
  for (GeneIndex g = 0; g < report.total_gain.size(); ++g) {
    if (report.total_gain[g] > 0.0) out.push_back(g);
  }
  if (out.empty()) {
    throw EmptySelectionError(
        "no gene has positive importance; the labels may be independent of the data");
  }
  return out;
}

}  // namespace genesel::boosting
