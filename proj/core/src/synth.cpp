#include "genesel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "genesel/error.hpp"

namespace genesel::synth {

void SynthSpec::validate() const {
  if (n_classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (n_samples < n_classes) throw ConfigError("fewer samples than classes");
  if (n_genes < 1) throw ConfigError("synthetic data needs at least one gene");
  if (n_informative > n_genes) throw ConfigError("n_informative exceeds n_genes");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
    throw ConfigError("missing_fraction must be in [0, 1)");
  }
}

SynthResult generate_synth(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t m = spec.n_samples;
  const std::size_t n = spec.n_genes;
  const std::size_t c = spec.n_classes;

  std::vector<ClassIndex> labels(m);
  for (std::size_t i = 0; i < m; ++i) labels[i] = static_cast<ClassIndex>(i % c);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<GeneIndex> genes(n);
  std::iota(genes.begin(), genes.end(), GeneIndex{0});
  std::shuffle(genes.begin(), genes.end(), rng);
  GeneSubset informative(genes.begin(), genes.begin() + static_cast<std::ptrdiff_t>(spec.n_informative));
  std::ranges::sort(informative);

  const double spacing = std::max(2.0 * spec.noise_sigma, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix values(m, n);
  std::vector<std::size_t> class_order(c);
  std::size_t next_informative = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool planted = next_informative < informative.size() && informative[next_informative] == j;
    if (planted) {
      ++next_informative;
      std::iota(class_order.begin(), class_order.end(), std::size_t{0});
      std::shuffle(class_order.begin(), class_order.end(), rng);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double shift =
          planted ? spacing * static_cast<double>(class_order[static_cast<std::size_t>(labels[i])]) : 0.0;
      values(i, j) = shift + spec.noise_sigma * noise(rng);
    }
  }

  MissingMask mask;
  const auto n_missing =
      static_cast<std::size_t>(std::llround(spec.missing_fraction * static_cast<double>(m * n)));
  if (n_missing > 0) {
    std::vector<std::size_t> cells(m * n);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(n_missing);
    // Keep at least one observed value per gene.
    std::vector<std::size_t> missing_in_col(n, 0);
    std::ranges::sort(cells);
    for (std::size_t cell : cells) {
      const std::size_t i = cell / n;
      const std::size_t j = cell % n;
      if (missing_in_col[j] + 1 >= m) continue;
      ++missing_in_col[j];
      mask.cells.emplace_back(i, j);
      values(i, j) = 0.0;
    }
  }

  std::vector<std::string> gene_ids(n);
  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  for (std::size_t j = 0; j < n; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "g%0*zu", width, j);
    gene_ids[j] = buf;
  }
  std::vector<std::string> class_names(c);
  for (std::size_t k = 0; k < c; ++k) class_names[k] = "class" + std::to_string(k);

  return {Dataset(std::move(values), std::move(labels), std::move(gene_ids), std::move(class_names),
                  "synth"),
          std::move(mask), std::move(informative)};
}

}  // namespace genesel::synth
