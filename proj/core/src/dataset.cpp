#include "genesel/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "genesel/error.hpp"

namespace genesel {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ValidationError("matrix data size mismatch");
}

Dataset::Dataset(Matrix values, std::vector<ClassIndex> labels, std::vector<std::string> gene_ids,
                 std::vector<std::string> class_names, std::string name)
    : Dataset(Unchecked{}, std::move(values), std::move(labels), std::move(gene_ids),
              std::move(class_names), std::move(name)) {
  if (labels_.size() != values_.rows()) {
    throw ValidationError("dataset has " + std::to_string(values_.rows()) + " rows but " +
                          std::to_string(labels_.size()) + " labels");
  }
  if (gene_ids_.size() != values_.cols()) {
    throw ValidationError("dataset has " + std::to_string(values_.cols()) + " columns but " +
                          std::to_string(gene_ids_.size()) + " gene ids");
  }
  if (class_names_.empty()) throw ValidationError("dataset has no classes");
  std::vector<bool> seen(class_names_.size(), false);
  for (ClassIndex y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_names_.size()) {
      throw ValidationError("label " + std::to_string(y) + " outside 0.." +
                            std::to_string(class_names_.size() - 1));
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw ValidationError("class '" + class_names_[c] + "' has no samples");
  }
}

Dataset::Dataset(Unchecked, Matrix values, std::vector<ClassIndex> labels,
                 std::vector<std::string> gene_ids, std::vector<std::string> class_names,
                 std::string name)
    : values_(std::move(values)),
      labels_(std::move(labels)),
      gene_ids_(std::move(gene_ids)),
      class_names_(std::move(class_names)),
      name_(std::move(name)) {}

Dataset Dataset::subset_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), n_genes());
  std::vector<ClassIndex> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_samples()) throw ValidationError("row index out of range");
    std::ranges::copy(values_.row(rows[i]), out.row(i).begin());
    labels.push_back(labels_[rows[i]]);
  }
  return Dataset(Unchecked{}, std::move(out), std::move(labels), gene_ids_, class_names_, name_);
}

Dataset Dataset::with_values(Matrix values) const {
  if (values.rows() != n_samples() || values.cols() != n_genes()) {
    throw ValidationError("replacement matrix shape mismatch");
  }
  return Dataset(Unchecked{}, std::move(values), labels_, gene_ids_, class_names_, name_);
}

bool MissingMask::contains(std::size_t row, std::size_t col) const {
  return std::ranges::binary_search(cells, std::pair{row, col});
}

Dataset project(const Dataset& ds, std::span<const GeneIndex> genes) {
  if (genes.empty()) throw ValidationError("gene subset is empty");
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (genes[i] >= ds.n_genes()) {
      throw ValidationError("gene index " + std::to_string(genes[i]) + " out of range (N=" +
                            std::to_string(ds.n_genes()) + ")");
    }
    if (i > 0 && genes[i] <= genes[i - 1]) {
      throw ValidationError(genes[i] == genes[i - 1] ? "duplicate gene index in subset"
                                                     : "gene subset is not sorted");
    }
  }
  Matrix out(ds.n_samples(), genes.size());
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    auto src = ds.values().row(r);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < genes.size(); ++j) dst[j] = src[genes[j]];
  }
  std::vector<std::string> ids;
  ids.reserve(genes.size());
  for (GeneIndex g : genes) ids.push_back(ds.gene_ids()[g]);
  return Dataset(Dataset::Unchecked{}, std::move(out), ds.labels(), std::move(ids),
                 ds.class_names(), ds.name());
}

}  // namespace genesel
