#pragma once

#include <vector>

#include "rap/edge.hpp"
#include "rap/types.hpp"

namespace rap {

struct BoundaryTemplate {
  std::vector<PointF> points;
  std::vector<double> normals;  ///< [0, pi)
  PointF centroid;
};

struct DirectionalDistanceField {
  int binCount = 0;
  std::vector<ScalarGrid> fields;
  double diagonal = 0.0;

  double bin_width() const noexcept;
  int bin_of(double orientation) const noexcept;
  int height() const noexcept { return fields.empty() ? 0 : fields.front().height(); }
  int width() const noexcept { return fields.empty() ? 0 : fields.front().width(); }
};

/// Similarity transform about the template centroid: p' = c + t + scale * R(rotation) * (p - c).
struct Transform2D {
  double tx = 0.0;
  double ty = 0.0;
  double scale = 1.0;
  double rotation = 0.0;  ///< degrees

  PointF apply(PointF p, PointF pivot) const noexcept;
};

struct SearchGrid {
  std::vector<double> scales = {0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
  std::vector<double> rotations = {-20.0, -10.0, 0.0, 10.0, 20.0};
  int coarseStride = 4;
  int fineRadius = 6;

  void validate() const;
};

struct SearchResult {
  Transform2D transform;
  double cost = 0.0;
  std::size_t candidates = 0;  ///< coarse-stage evaluations
};

/// Moore-traced outer contour of the largest 8-connected component, clockwise from the
/// topmost-leftmost pixel, resampled uniformly by arc length.
std::vector<Pixel> trace_outer_contour(const BinaryMask& component);
BoundaryTemplate extract_boundary_template(const BinaryMask& mask, int targetPointCount = 128);

/// Centroid of the largest component: the pivot shared by templates and mask warps.
PointF mask_pivot(const BinaryMask& mask);

/// One exact EDT per orientation bin; empty bins hold the image diagonal.
DirectionalDistanceField directional_distance_transforms(const EdgePixelSet& edges, int height, int width,
                                                         int binCount, Exec exec = Exec::Parallel);

double chamfer_cost(const BoundaryTemplate& tmpl, const Transform2D& t, const DirectionalDistanceField& fields);

/// Coarse sweep over gate placements of the transformed centroid on a stride lattice x all
/// (scale, rotation) pairs, then stride-1 refinement within +-fineRadius and +-1 grid step in
/// scale and rotation. Translations are integers; the centroid pixel round(c) + t must lie in
/// the gate. Ties are resolved by a total order, so Exec::Serial and Exec::Parallel agree.
SearchResult search_transform(const BoundaryTemplate& tmpl, const DirectionalDistanceField& fields,
                              const BinaryMask& gate, const SearchGrid& grid, Exec exec = Exec::Parallel);

struct Premask {
  BinaryMask mask;
  bool gateBypassed = false;  ///< gate removed more than half of the warped area
};

/// Warps the support mask by t (inverse nearest-neighbour mapping), intersects with the gate
/// unless that loses > 50% of the area, keeps the largest component and fills holes.
Premask build_premask_detailed(const BinaryMask& supportMask, const Transform2D& t, const BinaryMask& gate,
                               int outHeight, int outWidth);
BinaryMask build_premask(const BinaryMask& supportMask, const Transform2D& t, const BinaryMask& gate,
                         int outHeight, int outWidth);

/// Forward warp without gating or cleanup.
BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& t, PointF pivot, int outHeight, int outWidth);

}  // namespace rap
