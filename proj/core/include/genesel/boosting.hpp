#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genesel/dataset.hpp"

namespace genesel::boosting {

enum class Loss { squared, logistic };

std::string to_string(Loss loss);
Loss loss_from_string(const std::string& name);

struct BoostParams {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 3;
  double subsample = 0.75;
  double learning_rate = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  Loss loss = Loss::logistic;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is outside its valid range.
  void validate() const;

  bool operator==(const BoostParams&) const = default;
};

/// First and second derivative of the loss with respect to the raw score.
struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

/// Squared: L = (y - r)^2 / 2. Logistic: L = -y log p - (1-y) log(1-p), p = sigmoid(r).
/// The Hessian is floored at kMinHessian.
GradHess grad_hess(Loss loss, double y, double raw);
double loss_value(Loss loss, double y, double raw);

inline constexpr double kMinHessian = 1e-16;

/// Minimizer of G*w + (H + lambda) * w^2 / 2, i.e. -G / (H + lambda).
double leaf_weight(double sum_grad, double sum_hess, double lambda);

/// Reduction of the regularized second-order objective obtained by splitting a
/// leaf with sums (GL+GR, HL+HR) into two leaves, minus gamma.
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double lambda, double gamma);

/// Candidate gains within this relative distance of the incumbent are treated
/// as ties and resolved by (feature, threshold) order.
inline constexpr double kGainTieTolerance = 1e-12;

/// Flat tree node. A node with feature == kLeaf is a leaf carrying `weight`.
/// Internal nodes send x[feature] < threshold to `left`.
struct TreeNode {
  static constexpr int kLeaf = -1;

  int feature = kLeaf;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;
  /// Accepted split gain (internal nodes only).
  double gain = 0.0;

  bool is_leaf() const noexcept { return feature == kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

/// Regression tree stored as a node array; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  /// Unscaled leaf weight reached by `x`.
  double evaluate(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;
};

/// Additive ensemble. trees[round][output].
struct BoostedEnsemble {
  std::vector<std::vector<Tree>> trees;
  std::vector<double> base_score;  // one per output
  BoostParams params;
  std::size_t n_genes = 0;
  std::size_t n_outputs = 1;

  /// Raw scores per sample and output: base + sum_t eta * f_t(x).
  std::vector<std::vector<double>> predict_raw(const Matrix& x) const;

  bool operator==(const BoostedEnsemble&) const = default;
};

/// Greedy exact tree boosting. `targets[o][i]` is the target of output o for
/// sample i; all outputs share the same per-round row subsample.
BoostedEnsemble fit(const Matrix& x, const std::vector<std::vector<double>>& targets,
                    const BoostParams& params);

/// Classification entry point: one logistic output for two classes, one
/// one-vs-rest output per class otherwise.
BoostedEnsemble fit(const Dataset& ds, const BoostParams& params);

/// Class index per sample. Binary models threshold sigmoid(raw) at 0.5;
/// multi-output models take the argmax (lowest index on ties).
std::vector<ClassIndex> predict_class(const BoostedEnsemble& model, const Dataset& ds);
std::vector<ClassIndex> predict_class(const BoostedEnsemble& model, const Matrix& x);

/// Raw score of output 0 per sample (regression use).
std::vector<double> predict_value(const BoostedEnsemble& model, const Matrix& x);

struct ImportanceReport {
  std::vector<double> total_gain;
  std::vector<std::size_t> split_count;
  /// Genes by total_gain descending, ties by ascending index.
  std::vector<GeneIndex> ranking;
};

ImportanceReport importances(const BoostedEnsemble& model);

/// Genes with strictly positive total gain, ascending. Throws
/// EmptySelectionError when there are none.
GeneSubset select_nonzero(const ImportanceReport& report);

std::string to_json(const BoostedEnsemble& model);
BoostedEnsemble ensemble_from_json(const std::string& text);

}  // namespace genesel::boosting
