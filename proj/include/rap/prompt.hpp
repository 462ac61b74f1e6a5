#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rap/gating.hpp"
#include "rap/types.hpp"

namespace rap {

struct PromptParams {
  int Nv = 6;
  int Ns = 8;
  double bandMin = 5.0;
  double bandMax = 40.0;
  int margin = 5;

  void validate() const;
};

struct PromptSet {
  std::vector<Pixel> positives;
  std::vector<Pixel> negatives;
  Box bbox;
  std::vector<std::string> warnings;  ///< ShortfallWarning / NoNegativesWarning
};

struct VoronoiPartition {
  std::vector<Pixel> seeds;
  Grid<int> cellLabels;  ///< seed index per mask pixel, -1 outside
};

struct SeedSelection {
  std::vector<Pixel> seeds;
  bool shortfall = false;  ///< fewer foreground pixels than requested
};

/// Greedy farthest point sampling. The first seed is the foreground pixel nearest the mask
/// centroid; each next seed maximises the minimum distance to the chosen ones. Ties row-major.
SeedSelection fps_seeds(const BinaryMask& mask, int count);

/// Nearest-seed labels over the mask, ties to the lower seed index. Throws SeedError for a
/// seed outside the mask.
VoronoiPartition voronoi_partition(const BinaryMask& mask, const std::vector<Pixel>& seeds);

/// Rounded pixel-mean centroid per non-empty cell, snapped into the cell when it falls outside.
std::vector<Pixel> positive_points(const VoronoiPartition& partition);

struct NegativeSelection {
  std::vector<Pixel> points;
  bool noCandidates = false;
};

/// One lowest-similarity exterior pixel per angular sector about the pre-mask centroid, drawn
/// from the band of pixels whose distance to the pre-mask lies in [bandMin, bandMax].
NegativeSelection negative_points(const BinaryMask& premask, const SimilarityMap& similarity, int sectorCount,
                                  double bandMin, double bandMax);

/// Sector index of pixel p about centre c; sector j covers angles [2 pi j / n, 2 pi (j+1) / n).
int sector_of(Pixel p, PointF c, int sectorCount);

PromptSet build_prompt_set(const BinaryMask& premask, const SimilarityMap& similarity, const PromptParams& params);

/// Describes each violated PromptSet invariant against its source pre-mask; empty when valid.
std::vector<std::string> prompt_violations(const PromptSet& prompts, const BinaryMask& premask);

/// Prompt-exchange JSON:
///   {"image": "<path>", "positives": [[x,y],...], "negatives": [[x,y],...], "bbox": [x0,y0,x1,y1]}
std::string prompt_to_json(const PromptSet& prompts, const std::string& imagePath);
/// Parses prompt-exchange JSON; throws FormatError on schema violations. `imagePath` receives the image entry.
PromptSet prompt_from_json(const std::string& text, std::string* imagePath = nullptr);

void write_prompt_file(const PromptSet& prompts, const std::string& imagePath, const std::filesystem::path& path);
PromptSet read_prompt_file(const std::filesystem::path& path, std::string* imagePath = nullptr);

}  // namespace rap
