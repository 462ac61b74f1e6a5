#pragma once

#include <cstdint>
#include <vector>

#include "rap/types.hpp"

namespace rap {

struct GatingConfig {
  int K = 5;
  int KPrime = 3;
  double quantile = 0.9;

  /// Throws ConfigError unless 1 <= KPrime <= K and quantile in (0,1).
  void validate() const;
};

struct RegionPrototypes {
  std::vector<Descriptor> prototypes;
  std::vector<int> memberCounts;
  /// Cluster index of each foreground grid cell, row-major cell order.
  std::vector<int> assignment;

  int count() const noexcept { return static_cast<int>(prototypes.size()); }
};

/// Per-pixel cosine similarity to one prototype, at query image resolution.
using SimilarityMap = ScalarGrid;

/// K-Means over the d-vectors of foreground grid cells (block-majority vote of `mask`).
/// Farthest-first initialisation: the seed picks the first centre, later centres maximise the
/// distance to those already chosen (ties by row-major index). K shrinks to the number of
/// distinct foreground vectors. At most 50 Lloyd iterations, stopping once the relative
/// inertia change drops below 1e-4.
RegionPrototypes cluster_support(const FeatureMap& features, const BinaryMask& mask, int K,
                                 std::uint64_t seed);

/// Cosine between each grid cell and the prototype, before upsampling.
ScalarGrid cell_similarity(const FeatureMap& queryFeatures, const Descriptor& prototype);

/// cell_similarity bilinearly upsampled (cell-center aligned) to outHeight x outWidth.
SimilarityMap similarity_map(const FeatureMap& queryFeatures, const Descriptor& prototype, int outHeight,
                             int outWidth);

/// Kept maps, threshold and the resulting gate.
struct Gate {
  BinaryMask mask;
  std::vector<int> kept;
  double threshold = 0.0;
};

/// Linear-interpolation quantile of `values` (sorted copy), q in [0,1].
double quantile(std::vector<double> values, double q);

/// Indices of the top-k maps by mean similarity, ties to the lower index.
std::vector<int> top_maps_by_mean(const std::vector<SimilarityMap>& maps, int k);

/// Keeps the KPrime maps with highest mean, thresholds at the pooled quantile (strict >) and
/// unions the indicators. An empty union becomes the single maximum pixel.
Gate compute_gate(const std::vector<SimilarityMap>& maps, const RegionPrototypes& prototypes,
                  const GatingConfig& config);

BinaryMask build_gating_mask(const std::vector<SimilarityMap>& maps, const RegionPrototypes& prototypes,
                             const GatingConfig& config);

/// Pointwise maximum over the selected maps.
SimilarityMap max_similarity(const std::vector<SimilarityMap>& maps, const std::vector<int>& which);

}  // namespace rap
