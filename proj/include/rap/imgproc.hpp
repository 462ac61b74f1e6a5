#pragma once

#include <optional>
#include <vector>

#include "rap/types.hpp"

namespace rap {

/// Squared exact Euclidean distance from every pixel to the nearest set pixel of `sites`.
/// Pixels are +infinity when `sites` is empty. Separable lower-envelope algorithm
/// (Felzenszwalb & Huttenlocher); values are exact integers.
ScalarGrid squared_distance_transform(const BinaryMask& sites, Exec exec = Exec::Parallel);

/// Square root of squared_distance_transform.
ScalarGrid distance_transform(const BinaryMask& sites, Exec exec = Exec::Parallel);

/// Pixel-center bilinear resize with edge clamping.
Image resize_bilinear(const Image& image, int height, int width);

/// Nearest-neighbour resize (pixel-center convention).
BinaryMask resize_nearest(const BinaryMask& mask, int height, int width);

/// Bilinear upsampling of a coarse cell grid, aligning cell centers:
/// cell (i, j) sits at output coordinate ((j + 0.5) * W / w - 0.5, (i + 0.5) * H / h - 0.5).
ScalarGrid upsample_cells(const ScalarGrid& cells, int height, int width);

/// Downsamples a mask onto a coarse grid by strict block-majority vote.
BinaryMask block_majority(const BinaryMask& mask, int gridHeight, int gridWidth);

/// Pixel range [begin, end) covered by grid cell `cell` of `cells` along an axis of `extent`.
inline std::pair<int, int> cell_span(int cell, int cells, int extent) {
  const auto begin = static_cast<int>(static_cast<long long>(cell) * extent / cells);
  const auto end = static_cast<int>(static_cast<long long>(cell + 1) * extent / cells);
  return {begin, end};
}

/// 8-connected component labels (-1 background) and per-component sizes.
struct Components {
  Grid<int> labels;
  std::vector<std::size_t> sizes;
};
Components label_components(const BinaryMask& mask);

/// Keeps the largest 8-connected component; ties go to the component met first in row-major order.
BinaryMask largest_component(const BinaryMask& mask);

/// Fills background regions not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

/// Mean coordinate of foreground pixels; nullopt for an empty mask.
std::optional<PointF> centroid(const BinaryMask& mask);

/// Tight inclusive bounds of the foreground; invalid Box for an empty mask.
Box bounding_box(const BinaryMask& mask);

}  // namespace rap
