#pragma once

#include <cstddef>
#include <cstdint>

#include "genesel/dataset.hpp"

namespace genesel::synth {

/// Planted-signal benchmark: `n_informative` genes carry class-dependent
/// means, the rest are pure noise.
struct SynthSpec {
  std::size_t n_samples = 60;
  std::size_t n_genes = 500;
  std::size_t n_informative = 10;
  std::size_t n_classes = 2;
  double noise_sigma = 0.5;
  double missing_fraction = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthResult {
  Dataset dataset;
  MissingMask mask;
  /// Ground-truth informative gene indices, ascending.
  GeneSubset informative;
};

/// Class means on an informative gene are spaced by max(2 sigma, 1) and
/// assigned to classes in a per-gene random order. Labels are balanced
/// (sizes differ by at most one) and shuffled. Masked cells are zero-filled.
SynthResult generate_synth(const SynthSpec& spec);

}  // namespace genesel::synth
