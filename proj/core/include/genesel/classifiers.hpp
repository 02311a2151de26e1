#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "genesel/dataset.hpp"

namespace genesel::classifiers {

enum class Kind { knn, gaussian_nb, linear_svm };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

struct ClassifierSpec {
  Kind kind = Kind::knn;
  std::size_t knn_k = 5;
  double svm_c = 1.0;
  std::size_t svm_epochs = 200;
  double nb_var_smoothing = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ClassifierSpec&) const = default;
};

struct KnnModel {
  Matrix x;
  std::vector<ClassIndex> y;
  std::size_t k = 5;
  std::size_t n_classes = 0;
};

struct GaussianNbModel {
  std::vector<double> log_prior;             // per class
  std::vector<std::vector<double>> mean;     // [class][gene]
  std::vector<std::vector<double>> variance; // [class][gene], floored
  double variance_floor = 0.0;
};

/// One-vs-rest linear scorers. A binary model holds a single scorer whose
/// positive side is class 1.
struct LinearSvmModel {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  std::size_t n_classes = 0;
};

class TrainedClassifier {
 public:
  using Model = std::variant<KnnModel, GaussianNbModel, LinearSvmModel>;

  TrainedClassifier(Model model, std::size_t n_genes, std::size_t n_classes)
      : model_(std::move(model)), n_genes_(n_genes), n_classes_(n_classes) {}

  std::vector<ClassIndex> predict(const Matrix& x) const;
  std::vector<ClassIndex> predict(const Dataset& ds) const { return predict(ds.values()); }

  const Model& model() const noexcept { return model_; }
  std::size_t n_genes() const noexcept { return n_genes_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

 private:
  Model model_;
  std::size_t n_genes_;
  std::size_t n_classes_;
};

TrainedClassifier train(const ClassifierSpec& spec, const Dataset& ds);

/// Brute-force k-nearest-neighbour vote for one query row.
///
/// Neighbours are ordered by (squared distance, training index). Vote ties go
/// to the tied class whose nearest member is closest, then to the lowest
/// class index.
ClassIndex knn_vote(const Matrix& train_x, std::span<const ClassIndex> train_y,
                    std::size_t n_classes, std::span<const double> query, std::size_t k);

}  // namespace genesel::classifiers
