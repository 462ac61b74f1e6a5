#include "rap/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "json.hpp"

#include "rap/arrayio.hpp"
#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {
namespace {

constexpr double kUnreached = std::numeric_limits<double>::infinity();

// Multi-source Dijkstra restricted to the bbox.
ScalarGrid geodesic_distance(const ScalarGrid& strength, const Box& box, const std::vector<Pixel>& sources,
                             double lambda) {
  ScalarGrid dist(strength.height(), strength.width(), kUnreached);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (const Pixel s : sources) {
    if (!box.contains(s.x, s.y)) continue;
    dist(s.x, s.y) = 0.0;
    queue.push({0.0, dist.index(s.x, s.y)});
  }
  const int w = strength.width();
  while (!queue.empty()) {
    const auto [d, idx] = queue.top();
    queue.pop();
    if (d > dist.data()[idx]) continue;
    const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx;
        const int ny = y + dy;
        if (!box.contains(nx, ny)) continue;
        const double len = (dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0;
        const double step = len * (1.0 + lambda * 0.5 * (strength(x, y) + strength(nx, ny)));
        const double nd = d + step;
        if (nd < dist(nx, ny)) {
          dist(nx, ny) = nd;
          queue.push({nd, dist.index(nx, ny)});
        }
      }
  }
  return dist;
}

void check_request(const SegmenterRequest& request, const EdgeMap& edges) {
  const Image& img = request.image;
  if (!edges.strength.same_shape(img)) throw DimError("edge map does not match the image");
  const Box& b = request.prompts.bbox;
  if (!b.valid() || !img.contains(b.x0, b.y0) || !img.contains(b.x1, b.y1))
    throw DimError("bbox lies outside the image");
  for (const auto* list : {&request.prompts.positives, &request.prompts.negatives})
    for (const Pixel p : *list)
      if (!img.contains(p.x, p.y)) throw DimError("prompt point outside the image");
}

}  // namespace

SegmenterResult fallback_segment(const SegmenterRequest& request, const EdgeMap& edges, double lambda) {
  const PromptSet& ps = request.prompts;
  if (ps.positives.empty()) throw NoPromptError("fallback segmenter needs at least one positive point");
  check_request(request, edges);
  const Box& box = ps.bbox;
  const int h = request.image.height();
  const int w = request.image.width();

  BinaryMask isPositive(h, w);
  for (const Pixel p : ps.positives) isPositive(p.x, p.y) = 1;
  std::vector<Pixel> negSeeds;
  for (const Pixel p : ps.negatives)
    if (!isPositive(p.x, p.y)) negSeeds.push_back(p);
  for (int x = box.x0; x <= box.x1; ++x)
    for (int y : {box.y0, box.y1})
      if (!isPositive(x, y)) negSeeds.push_back({x, y});
  for (int y = box.y0 + 1; y < box.y1; ++y)
    for (int x : {box.x0, box.x1})
      if (!isPositive(x, y)) negSeeds.push_back({x, y});

  const ScalarGrid dPos = geodesic_distance(edges.strength, box, ps.positives, lambda);
  const ScalarGrid dNeg = geodesic_distance(edges.strength, box, negSeeds, lambda);

  BinaryMask raw(h, w);
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) raw(x, y) = dPos(x, y) < dNeg(x, y);

  // Keep only components that contain a positive point.
  const Components comps = label_components(raw);
  std::vector<char> keep(comps.sizes.size(), 0);
  for (const Pixel p : ps.positives)
    if (comps.labels(p.x, p.y) >= 0) keep[static_cast<std::size_t>(comps.labels(p.x, p.y))] = 1;
  BinaryMask kept(h, w);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const int l = comps.labels.data()[i];
    kept.data()[i] = l >= 0 && keep[static_cast<std::size_t>(l)];
  }
  SegmenterResult out;
  out.mask = fill_holes(kept);
  for (const Pixel p : ps.negatives) out.mask(p.x, p.y) = 0;
  for (const Pixel p : ps.positives)
    if (box.contains(p.x, p.y)) out.mask(p.x, p.y) = 1;

  std::vector<double> margins;
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) {
      if (!out.mask(x, y)) continue;
      const double a = dPos(x, y);
      const double b = dNeg(x, y);
      if (!std::isfinite(b)) {
        margins.push_back(1.0);
      } else if (a + b > 0.0) {
        margins.push_back(std::clamp((b - a) / (a + b), 0.0, 1.0));
      }
    }
  if (!margins.empty()) {
    auto mid = margins.begin() + static_cast<std::ptrdiff_t>(margins.size() / 2);
    std::nth_element(margins.begin(), mid, margins.end());
    out.confidence = *mid;
  }
  return out;
}

// --- adapter bridge -------------------------------------------------------------

void export_request(const SegmenterRequest& request, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_array(request.image, dir / kRequestImageFile);
  write_prompt_file(request.prompts, kRequestImageFile, dir / kRequestFile);
}

SegmenterRequest read_request(const std::filesystem::path& dir) {
  std::string image;
  SegmenterRequest r;
  r.prompts = read_prompt_file(dir / kRequestFile, &image);
  r.image = read_image_any(dir / image);
  return r;
}

SegmenterResult import_result(const std::filesystem::path& dir) {
  const auto maskPath = dir / kResultMaskFile;
  const auto metaPath = dir / kResultMetaFile;
  if (!std::filesystem::exists(maskPath)) throw AdapterError("adapter did not write " + maskPath.string());
  if (!std::filesystem::exists(metaPath)) throw AdapterError("adapter did not write " + metaPath.string());
  SegmenterResult r;
  r.mask = read_mask(maskPath);
  std::ifstream in(metaPath);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw AdapterError(std::string("result_meta.json: ") + e.what());
  }
  if (!meta.contains("confidence") || !meta["confidence"].is_number())
    throw AdapterError("result_meta.json: missing numeric 'confidence'");
  r.confidence = meta["confidence"].get<double>();
  return r;
}

SegmenterResult import_result(const std::filesystem::path& dir, int height, int width) {
  SegmenterResult r = import_result(dir);
  if (!r.mask.same_shape(height, width))
    throw DimError("adapter mask is " + std::to_string(r.mask.height()) + "x" + std::to_string(r.mask.width()) +
                   ", expected " + std::to_string(height) + "x" + std::to_string(width));
  return r;
}

SegmenterResult AdapterSegmenter::segment(const SegmenterRequest& request, const EdgeMap& /*edges*/) {
  if (request.prompts.positives.empty()) throw NoPromptError("adapter request needs at least one positive point");
  if (!command_.empty()) {
    std::filesystem::remove(dir_ / kResultMaskFile);
    std::filesystem::remove(dir_ / kResultMetaFile);
  }
  export_request(request, dir_);
  if (!command_.empty()) {
    const std::string cmd = command_ + " \"" + dir_.string() + "\"";
    if (std::system(cmd.c_str()) != 0) throw AdapterError("adapter command failed: " + cmd);
  }
  return import_result(dir_, request.image.height(), request.image.width());
}

}  // namespace rap
