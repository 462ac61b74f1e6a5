#include "rap/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {
namespace {

long long squared(Pixel a, Pixel b) {
  const long long dx = a.x - b.x;
  const long long dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Pixel> foreground(const BinaryMask& mask) {
  std::vector<Pixel> px;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) px.push_back({x, y});
  return px;
}

}  // namespace

void PromptParams::validate() const {
  if (Nv < 1) throw ConfigError("prompt.Nv must be >= 1");
  if (Ns < 1) throw ConfigError("prompt.Ns must be >= 1");
  if (!(bandMin >= 0.0 && bandMin < bandMax)) throw ConfigError("prompt band needs 0 <= bandMin < bandMax");
  if (margin < 0) throw ConfigError("prompt.margin must be >= 0");
}

SeedSelection fps_seeds(const BinaryMask& mask, int count) {
  if (count < 1) throw ConfigError("seed count must be >= 1");
  const std::vector<Pixel> px = foreground(mask);
  if (px.empty()) throw EmptyMaskError("cannot sample seeds from an empty mask");
  const auto c = *centroid(mask);

  SeedSelection out;
  out.shortfall = px.size() < static_cast<std::size_t>(count);
  const std::size_t want = std::min(px.size(), static_cast<std::size_t>(count));

  std::size_t first = 0;
  double bestD = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double d = (px[i].x - c.x) * (px[i].x - c.x) + (px[i].y - c.y) * (px[i].y - c.y);
    if (d < bestD) {
      bestD = d;
      first = i;
    }
  }
  out.seeds.push_back(px[first]);

  std::vector<long long> nearest(px.size(), std::numeric_limits<long long>::max());
  while (out.seeds.size() < want) {
    std::size_t best = 0;
    long long far = -1;
    for (std::size_t i = 0; i < px.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared(px[i], out.seeds.back()));
      if (nearest[i] > far) {
        far = nearest[i];
        best = i;
      }
    }
    out.seeds.push_back(px[best]);
  }
  return out;
}

VoronoiPartition voronoi_partition(const BinaryMask& mask, const std::vector<Pixel>& seeds) {
  if (seeds.empty()) throw SeedError("Voronoi partition needs at least one seed");
  for (const Pixel s : seeds)
    if (!mask.test(s.x, s.y))
      throw SeedError("seed (" + std::to_string(s.x) + "," + std::to_string(s.y) + ") lies outside the mask");
  VoronoiPartition v{seeds, Grid<int>(mask.height(), mask.width(), -1)};
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      int best = 0;
      long long bestD = std::numeric_limits<long long>::max();
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const long long d = squared({x, y}, seeds[k]);
        if (d < bestD) {
          bestD = d;
          best = static_cast<int>(k);
        }
      }
      v.cellLabels(x, y) = best;
    }
  return v;
}

std::vector<Pixel> positive_points(const VoronoiPartition& partition) {
  const auto& labels = partition.cellLabels;
  const std::size_t k = partition.seeds.size();
  std::vector<double> sx(k, 0.0), sy(k, 0.0);
  std::vector<std::size_t> n(k, 0);
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x) {
      const int l = labels(x, y);
      if (l < 0) continue;
      sx[static_cast<std::size_t>(l)] += x;
      sy[static_cast<std::size_t>(l)] += y;
      ++n[static_cast<std::size_t>(l)];
    }

  std::vector<Pixel> out;
  for (std::size_t cell = 0; cell < k; ++cell) {
    if (n[cell] == 0) continue;
    const double cx = sx[cell] / static_cast<double>(n[cell]);
    const double cy = sy[cell] / static_cast<double>(n[cell]);
    Pixel p{static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy))};
    if (!labels.contains(p.x, p.y) || labels(p.x, p.y) != static_cast<int>(cell)) {
      // Non-convex cell: snap to the nearest pixel of the cell.
      double bestD = std::numeric_limits<double>::infinity();
      for (int y = 0; y < labels.height(); ++y)
        for (int x = 0; x < labels.width(); ++x) {
          if (labels(x, y) != static_cast<int>(cell)) continue;
          const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          if (d < bestD) {
            bestD = d;
            p = {x, y};
          }
        }
    }
    out.push_back(p);
  }
  return out;
}

int sector_of(Pixel p, PointF c, int sectorCount) {
  constexpr double twoPi = 2.0 * std::numbers::pi;
  double a = std::atan2(p.y - c.y, p.x - c.x);
  if (a < 0.0) a += twoPi;
  const int s = static_cast<int>(std::floor(a / (twoPi / sectorCount)));
  return std::clamp(s, 0, sectorCount - 1);
}

NegativeSelection negative_points(const BinaryMask& premask, const SimilarityMap& similarity, int sectorCount,
                                  double bandMin, double bandMax) {
  if (!premask.any()) throw EmptyMaskError("pre-mask is empty");
  if (!similarity.same_shape(premask)) throw DimError("similarity map and pre-mask differ in size");
  if (sectorCount < 1) throw ConfigError("sector count must be >= 1");
  if (!(bandMin < bandMax)) throw ConfigError("bandMin must be below bandMax");

  const ScalarGrid dist = distance_transform(premask);
  const PointF c = *centroid(premask);
  std::vector<Pixel> best(static_cast<std::size_t>(sectorCount), Pixel{-1, -1});
  std::vector<double> bestValue(static_cast<std::size_t>(sectorCount), std::numeric_limits<double>::infinity());
  for (int y = 0; y < premask.height(); ++y)
    for (int x = 0; x < premask.width(); ++x) {
      if (premask(x, y)) continue;
      const double d = dist(x, y);
      if (d < bandMin || d > bandMax) continue;
      const auto s = static_cast<std::size_t>(sector_of({x, y}, c, sectorCount));
      if (similarity(x, y) < bestValue[s]) {
        bestValue[s] = similarity(x, y);
        best[s] = {x, y};
      }
    }

  NegativeSelection out;
  for (const Pixel p : best)
    if (p.x >= 0) out.points.push_back(p);
  out.noCandidates = out.points.empty();
  return out;
}

PromptSet build_prompt_set(const BinaryMask& premask, const SimilarityMap& similarity, const PromptParams& params) {
  params.validate();
  if (!premask.any()) throw EmptyMaskError("pre-mask is empty");

  PromptSet ps;
  const SeedSelection seeds = fps_seeds(premask, params.Nv);
  if (seeds.shortfall)
    ps.warnings.push_back("ShortfallWarning: pre-mask has fewer than " + std::to_string(params.Nv) + " pixels");
  ps.positives = positive_points(voronoi_partition(premask, seeds.seeds));

  const NegativeSelection neg = negative_points(premask, similarity, params.Ns, params.bandMin, params.bandMax);
  if (neg.noCandidates) ps.warnings.push_back("NoNegativesWarning: no exterior pixels in the negative band");
  ps.negatives = neg.points;

  const Box tight = bounding_box(premask);
  ps.bbox = {std::max(0, tight.x0 - params.margin), std::max(0, tight.y0 - params.margin),
             std::min(premask.width() - 1, tight.x1 + params.margin),
             std::min(premask.height() - 1, tight.y1 + params.margin)};

  if (const auto bad = prompt_violations(ps, premask); !bad.empty())
    throw std::logic_error("prompt invariant violated: " + bad.front());
  return ps;
}

std::vector<std::string> prompt_violations(const PromptSet& prompts, const BinaryMask& premask) {
  std::vector<std::string> out;
  auto where = [](Pixel p) { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; };
  for (const Pixel p : prompts.positives)
    if (!premask.test(p.x, p.y)) out.push_back("positive " + where(p) + " outside pre-mask");
  for (const Pixel p : prompts.negatives) {
    if (!premask.contains(p.x, p.y))
      out.push_back("negative " + where(p) + " outside image");
    else if (premask(p.x, p.y))
      out.push_back("negative " + where(p) + " inside pre-mask");
  }
  const Box& b = prompts.bbox;
  if (!b.valid()) out.push_back("bbox is inverted");
  const Box tight = bounding_box(premask);
  if (tight.valid() && !(b.x0 <= tight.x0 && b.y0 <= tight.y0 && b.x1 >= tight.x1 && b.y1 >= tight.y1))
    out.push_back("bbox does not contain the pre-mask");
  return out;
}

}  // namespace rap
