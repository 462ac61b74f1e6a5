#pragma once

#include <vector>

#include "rap/types.hpp"

namespace rap {

struct EdgeParams {
  std::vector<double> scales = {1.0, 2.0, 4.0, 8.0};
  double wLog = 0.5;
  double wGrad = 0.5;
  double keepFraction = 0.10;
};

struct EdgeMap {
  ScalarGrid strength;     ///< >= 0
  ScalarGrid orientation;  ///< gradient direction folded into [0, pi)
};

struct EdgePixelSet {
  std::vector<Pixel> pixels;
  std::vector<double> orientations;

  std::size_t size() const noexcept { return pixels.size(); }
  bool empty() const noexcept { return pixels.empty(); }
};

/// Folds an angle (radians) into [0, pi).
double fold_orientation(double angle);

/// |LoG_sigma| normalised to peak 1, Gaussian truncated at 3 sigma, half-sample symmetric borders.
ScalarGrid log_response(const Image& image, double sigma, Exec exec = Exec::Parallel);

/// Sobel gradient magnitude (normalised to peak 1) and folded orientation.
EdgeMap sobel(const Image& image);

/// wLog * max_sigma |LoG_sigma| + wGrad * |grad|, each term normalised to peak 1 first.
EdgeMap edge_map(const Image& image, const std::vector<double>& scales, double wLog, double wGrad,
                 Exec exec = Exec::Parallel);

/// Pixels whose strength is among the top keepFraction of nonzero strengths, ties included.
EdgePixelSet binarize_edges(const EdgeMap& edges, double keepFraction);

}  // namespace rap
