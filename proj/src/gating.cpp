#include "rap/gating.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rap/errors.hpp"
#include "rap/imgproc.hpp"
#include "rap/retrieval.hpp"

namespace rap {
namespace {

constexpr int kMaxIterations = 50;
constexpr double kRelativeTolerance = 1e-4;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

void GatingConfig::validate() const {
  if (K < 1) throw ConfigError("gating.K must be >= 1");
  if (KPrime < 1 || KPrime > K) throw ConfigError("gating.KPrime must lie in [1, K]");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("gating.quantile must lie in (0,1)");
}

RegionPrototypes cluster_support(const FeatureMap& features, const BinaryMask& mask, int K,
                                 std::uint64_t seed) {
  if (K < 1) throw ConfigError("cluster count must be >= 1");
  const BinaryMask votes = block_majority(mask, features.grid_height(), features.grid_width());
  std::vector<std::vector<double>> points;
  for (int gy = 0; gy < votes.height(); ++gy)
    for (int gx = 0; gx < votes.width(); ++gx)
      if (votes(gx, gy)) {
        const auto cell = features.cell(gx, gy);
        points.emplace_back(cell.begin(), cell.end());
      }
  if (points.empty()) throw EmptyMaskError("support mask has no foreground cell on the feature grid");
  const auto n = points.size();

  // farthest-first initialisation
  // Engine output is fixed by the standard; distributions are not, so reduce it directly.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers{points[static_cast<std::size_t>(rng() % n)]};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < K) {
    std::size_t best = 0;
    double bestDist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centers.back()));
      if (nearest[i] > bestDist) {
        bestDist = nearest[i];
        best = i;
      }
    }
    if (bestDist <= 0.0) break;  // every point coincides with a centre
    centers.push_back(points[best]);
  }

  std::vector<int> assignment(n, 0);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int bestK = 0;
      double bestD = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = squared_distance(points[i], centers[k]);
        if (d < bestD) {
          bestD = d;
          bestK = static_cast<int>(k);
        }
      }
      assignment[i] = bestK;
      inertia += bestD;
    }
    // Lloyd steps never increase the objective.
    assert(inertia <= previous * (1.0 + 1e-9) + 1e-12);

    std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(points[0].size(), 0.0));
    std::vector<int> counts(centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(assignment[i])];
      for (std::size_t c = 0; c < s.size(); ++c) s[c] += points[i][c];
      ++counts[static_cast<std::size_t>(assignment[i])];
    }
    // Empty clusters are dropped and labels compacted.
    std::vector<int> remap(centers.size(), -1);
    std::vector<std::vector<double>> next;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      remap[k] = static_cast<int>(next.size());
      for (auto& v : sums[k]) v /= counts[k];
      next.push_back(std::move(sums[k]));
    }
    for (auto& a : assignment) a = remap[static_cast<std::size_t>(a)];
    centers = std::move(next);

    const bool converged = std::isfinite(previous) &&
                           std::abs(previous - inertia) <= kRelativeTolerance * std::max(previous, 1e-300);
    previous = inertia;
    if (converged || inertia == 0.0) break;
  }

  // Final assignment against the final centres.
  RegionPrototypes out;
  out.memberCounts.assign(centers.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    int bestK = 0;
    double bestD = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double d = squared_distance(points[i], centers[k]);
      if (d < bestD) {
        bestD = d;
        bestK = static_cast<int>(k);
      }
    }
    assignment[i] = bestK;
    ++out.memberCounts[static_cast<std::size_t>(bestK)];
  }
  // Recompute means so prototypes are exactly the cluster means of the reported assignment.
  std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(points[0].size(), 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < points[i].size(); ++c) sums[static_cast<std::size_t>(assignment[i])][c] += points[i][c];
  std::vector<int> remap(centers.size(), -1);
  std::vector<int> counts;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (out.memberCounts[k] == 0) continue;
    remap[k] = static_cast<int>(out.prototypes.size());
    for (auto& v : sums[k]) v /= out.memberCounts[k];
    out.prototypes.push_back(Descriptor{std::move(sums[k])});
    counts.push_back(out.memberCounts[k]);
  }
  for (auto& a : assignment) a = remap[static_cast<std::size_t>(a)];
  out.memberCounts = std::move(counts);
  out.assignment = std::move(assignment);
  return out;
}

ScalarGrid cell_similarity(const FeatureMap& queryFeatures, const Descriptor& prototype) {
  if (static_cast<int>(prototype.dim()) != queryFeatures.dim())
    throw DimError("prototype dim " + std::to_string(prototype.dim()) + " does not match feature dim " +
                   std::to_string(queryFeatures.dim()));
  double norm = 0.0;
  for (double v : prototype.values) norm += v * v;
  norm = std::sqrt(norm);
  if (norm < 1e-12) throw ZeroPrototypeError("prototype has zero norm");
  ScalarGrid cells(queryFeatures.grid_height(), queryFeatures.grid_width());
  for (int gy = 0; gy < cells.height(); ++gy)
    for (int gx = 0; gx < cells.width(); ++gx)
      cells(gx, gy) = cosine_similarity(queryFeatures.cell(gx, gy), prototype.values, norm);
  return cells;
}

SimilarityMap similarity_map(const FeatureMap& queryFeatures, const Descriptor& prototype, int outHeight,
                             int outWidth) {
  return upsample_cells(cell_similarity(queryFeatures, prototype), outHeight, outWidth);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<int> top_maps_by_mean(const std::vector<SimilarityMap>& maps, int k) {
  std::vector<double> means;
  for (const auto& m : maps)
    means.push_back(std::accumulate(m.data().begin(), m.data().end(), 0.0) / static_cast<double>(m.size()));
  std::vector<int> order(maps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return means[a] > means[b]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  return order;
}

Gate compute_gate(const std::vector<SimilarityMap>& maps, const RegionPrototypes& prototypes,
                  const GatingConfig& config) {
  config.validate();
  if (maps.empty()) throw DimError("gating needs at least one similarity map");
  if (static_cast<int>(maps.size()) != prototypes.count())
    throw DimError("expected one similarity map per prototype");
  for (const auto& m : maps)
    if (!m.same_shape(maps.front())) throw DimError("similarity maps differ in size");

  Gate gate;
  gate.kept = top_maps_by_mean(maps, config.KPrime);
  std::vector<double> pooled;
  for (int k : gate.kept) pooled.insert(pooled.end(), maps[k].data().begin(), maps[k].data().end());
  gate.threshold = quantile(std::move(pooled), config.quantile);

  const auto& ref = maps.front();
  gate.mask = BinaryMask(ref.height(), ref.width());
  for (int k : gate.kept)
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (maps[k].data()[i] > gate.threshold) gate.mask.data()[i] = 1;

  if (!gate.mask.any()) {
    std::size_t best = 0;
    double bestValue = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ref.size(); ++i)
      for (int k : gate.kept)
        if (maps[k].data()[i] > bestValue) {
          bestValue = maps[k].data()[i];
          best = i;
        }
    gate.mask.data()[best] = 1;
  }
  return gate;
}

BinaryMask build_gating_mask(const std::vector<SimilarityMap>& maps, const RegionPrototypes& prototypes,
                             const GatingConfig& config) {
  return compute_gate(maps, prototypes, config).mask;
}

SimilarityMap max_similarity(const std::vector<SimilarityMap>& maps, const std::vector<int>& which) {
  if (which.empty()) throw DimError("no maps selected");
  SimilarityMap out = maps[static_cast<std::size_t>(which.front())];
  for (std::size_t j = 1; j < which.size(); ++j) {
    const auto& m = maps[static_cast<std::size_t>(which[j])];
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], m.data()[i]);
  }
  return out;
}

}  // namespace rap
