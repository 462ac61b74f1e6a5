#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rap/pipeline.hpp"

namespace rap {

/// Small portable generator: splitmix64 state, so streams match on every platform.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();                     ///< [0, 1)
  double uniform(double lo, double hi);
  double normal();                      ///< Box-Muller, standard normal

 private:
  std::uint64_t state_;
};

struct SynthParams {
  int size = 256;
  int gridSize = 16;
  int featureDim = 32;
  int classCount = 2;
};

/// Textured ellipse "organs" with a distractor blob on a shaded background. Cases alternate
/// between classes; each gets its own pose, intensity gain and feature noise.
std::vector<LoadedCase> generate_synthetic(int caseCount, std::uint64_t seed, const SynthParams& params = {});

/// Writes images (RAF f32), masks, features and manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_synthetic(const std::vector<LoadedCase>& cases, const std::filesystem::path& dir);

}  // namespace rap
