#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace genesel {

using ClassIndex = int;
using GeneIndex = std::size_t;
using GeneSubset = std::vector<GeneIndex>;

/// Dense row-major matrix of doubles. Rows are samples, columns are genes.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Adopts row-major `data`; its size must be rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Sample-by-gene expression matrix with class labels.
///
/// Immutable once constructed; the constructor enforces the shape and label
/// invariants every downstream stage relies on (matching dimensions, labels in
/// 0..C-1, every class present).
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix values, std::vector<ClassIndex> labels, std::vector<std::string> gene_ids,
          std::vector<std::string> class_names, std::string name = {});

  const Matrix& values() const noexcept { return values_; }
  const std::vector<ClassIndex>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& gene_ids() const noexcept { return gene_ids_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::string& name() const noexcept { return name_; }

  std::size_t n_samples() const noexcept { return values_.rows(); }
  std::size_t n_genes() const noexcept { return values_.cols(); }
  std::size_t n_classes() const noexcept { return class_names_.size(); }

  /// Same genes and classes, only the listed samples (in the given order).
  /// Unlike the constructor this does not require every class to be present.
  Dataset subset_rows(std::span<const std::size_t> rows) const;

  /// Same labels and metadata with a replaced value matrix of identical shape.
  Dataset with_values(Matrix values) const;

  bool operator==(const Dataset&) const = default;

 private:
  friend Dataset project(const Dataset& ds, std::span<const GeneIndex> genes);

  struct Unchecked {};
  Dataset(Unchecked, Matrix values, std::vector<ClassIndex> labels,
          std::vector<std::string> gene_ids, std::vector<std::string> class_names,
          std::string name);

  Matrix values_;
  std::vector<ClassIndex> labels_;
  std::vector<std::string> gene_ids_;
  std::vector<std::string> class_names_;
  std::string name_;
};

/// (row, col) coordinates that were missing at load time, sorted row-major.
struct MissingMask {
  std::vector<std::pair<std::size_t, std::size_t>> cells;

  bool empty() const noexcept { return cells.empty(); }
  std::size_t size() const noexcept { return cells.size(); }
  bool contains(std::size_t row, std::size_t col) const;

  bool operator==(const MissingMask&) const = default;
};

enum class LabelColumn { first, last };

struct CsvOptions {
  LabelColumn label_column = LabelColumn::last;
  std::string missing_token = "NA";
};

struct LoadedDataset {
  Dataset dataset;
  MissingMask mask;
};

/// Reads a header + rows CSV. Missing cells (empty or `missing_token`) are
/// zero-filled and recorded in the mask. Class labels get contiguous indices in
/// order of first appearance.
LoadedDataset load_csv(const std::string& path, const CsvOptions& options = {});
LoadedDataset read_csv(std::istream& in, const CsvOptions& options = {},
                       std::string name = {});

/// Writes `ds` in the format `read_csv` accepts. Cells listed in `mask` are
/// written as `options.missing_token`.
void write_csv(std::ostream& out, const Dataset& ds, const MissingMask& mask = {},
               const CsvOptions& options = {});
void save_csv(const std::string& path, const Dataset& ds, const MissingMask& mask = {},
              const CsvOptions& options = {});

/// Replaces every masked cell by the mean of its column over the
/// `n_neighbors` nearest samples that observe that column. Distances are
/// Euclidean over mutually observed coordinates, scaled up by N / usable.
Dataset impute_knn(const Dataset& ds, const MissingMask& mask, std::size_t n_neighbors = 5);

/// Per-column range statistics, replayable on held-out data.
struct MinMaxStats {
  std::vector<double> min;
  std::vector<double> max;

  bool operator==(const MinMaxStats&) const = default;
};

MinMaxStats fit_minmax(const Dataset& ds);
/// (v - min) / (max - min) per column; constant columns map to 0.
Dataset apply_minmax(const Dataset& ds, const MinMaxStats& stats);
Dataset normalize_minmax(const Dataset& ds);

/// Column slice. `genes` must be nonempty, strictly increasing and in bounds.
Dataset project(const Dataset& ds, std::span<const GeneIndex> genes);

/// Stratified, repeated k-fold assignment.
struct FoldPlan {
  std::size_t k = 0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  /// assignments[round][sample] is the fold index in 0..k-1.
  std::vector<std::vector<std::size_t>> assignments;

  std::size_t n_samples() const noexcept {
    return assignments.empty() ? 0 : assignments.front().size();
  }
  std::vector<std::size_t> test_indices(std::size_t round, std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t round, std::size_t fold) const;

  bool operator==(const FoldPlan&) const = default;
};

FoldPlan make_folds(std::span<const ClassIndex> labels, std::size_t k, std::size_t rounds,
                    std::uint64_t seed);

}  // namespace genesel
