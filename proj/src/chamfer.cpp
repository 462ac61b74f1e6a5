#include "rap/chamfer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {
namespace {

constexpr double kPi = std::numbers::pi;

// Clockwise on screen (y down), starting west.
constexpr std::array<Pixel, 8> kMoore = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int moore_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i].x == dx && kMoore[i].y == dy) return i;
  return -1;
}

double radians(double degrees) { return degrees * kPi / 180.0; }

}  // namespace

double DirectionalDistanceField::bin_width() const noexcept { return kPi / binCount; }

int DirectionalDistanceField::bin_of(double orientation) const noexcept {
  const int b = static_cast<int>(std::floor(orientation / bin_width()));
  return std::clamp(b, 0, binCount - 1);
}

PointF Transform2D::apply(PointF p, PointF pivot) const noexcept {
  const double a = radians(rotation);
  const double cs = std::cos(a);
  const double sn = std::sin(a);
  const double dx = p.x - pivot.x;
  const double dy = p.y - pivot.y;
  return {pivot.x + tx + scale * (cs * dx - sn * dy), pivot.y + ty + scale * (sn * dx + cs * dy)};
}

void SearchGrid::validate() const {
  if (scales.empty() || rotations.empty()) throw ConfigError("search grid needs scales and rotations");
  for (double s : scales)
    if (!(s > 0.0)) throw ConfigError("search scales must be positive");
  if (coarseStride < 1) throw ConfigError("coarseStride must be >= 1");
  if (fineRadius < 0) throw ConfigError("fineRadius must be >= 0");
}

// --- template ---------------------------------------------------------------

std::vector<Pixel> trace_outer_contour(const BinaryMask& component) {
  Pixel start{-1, -1};
  for (int y = 0; y < component.height() && start.x < 0; ++y)
    for (int x = 0; x < component.width(); ++x)
      if (component(x, y)) {
        start = {x, y};
        break;
      }
  if (start.x < 0) return {};

  std::vector<Pixel> contour{start};
  Pixel p = start;
  int back = 0;  // west of the topmost-leftmost pixel is background
  Pixel firstMove{-1, -1};
  const std::size_t limit = 4 * component.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    Pixel next{-1, -1};
    int nextBack = 0;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const Pixel q{p.x + kMoore[d].x, p.y + kMoore[d].y};
      if (component.test(q.x, q.y)) {
        const Pixel prev{p.x + kMoore[(d + 7) % 8].x, p.y + kMoore[(d + 7) % 8].y};
        next = q;
        nextBack = moore_index(prev.x - q.x, prev.y - q.y);
        break;
      }
    }
    if (next.x < 0) break;  // isolated pixel
    // Jacob's criterion: closed once the first move out of the start pixel repeats.
    if (p == start) {
      if (firstMove.x < 0)
        firstMove = next;
      else if (next == firstMove)
        break;
    }
    p = next;
    back = nextBack;
    contour.push_back(p);
  }
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

PointF mask_pivot(const BinaryMask& mask) {
  const auto c = centroid(largest_component(mask));
  if (!c) throw EmptyMaskError("mask has no foreground");
  return *c;
}

BoundaryTemplate extract_boundary_template(const BinaryMask& mask, int targetPointCount) {
  if (targetPointCount < 8) throw ConfigError("template needs at least 8 points");
  const BinaryMask component = largest_component(mask);
  const auto c = centroid(component);
  if (!c) throw EmptyMaskError("cannot extract a boundary from an empty mask");
  const std::vector<Pixel> contour = trace_outer_contour(component);

  BoundaryTemplate t;
  t.centroid = *c;
  const auto m = contour.size();
  std::vector<double> cumulative(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Pixel a = contour[i];
    const Pixel b = contour[(i + 1) % m];
    cumulative[i + 1] = cumulative[i] + std::hypot(double(b.x - a.x), double(b.y - a.y));
  }
  const double total = cumulative[m];
  const auto n = static_cast<std::size_t>(targetPointCount);
  t.points.resize(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (total <= 0.0) {
      t.points[i] = {double(contour[0].x), double(contour[0].y)};
      continue;
    }
    const double s = total * static_cast<double>(i) / static_cast<double>(n);
    while (seg + 1 < m && cumulative[seg + 1] <= s) ++seg;
    const Pixel a = contour[seg];
    const Pixel b = contour[(seg + 1) % m];
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double u = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
    t.points[i] = {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
  }
  t.normals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PointF next = t.points[(i + 1) % n];
    const PointF prev = t.points[(i + n - 1) % n];
    const double tx = next.x - prev.x;
    const double ty = next.y - prev.y;
    t.normals[i] = (tx == 0.0 && ty == 0.0) ? 0.0 : fold_orientation(std::atan2(ty, tx) + kPi / 2);
  }
  return t;
}

// --- distance fields ----------------------------------------------------------

DirectionalDistanceField directional_distance_transforms(const EdgePixelSet& edges, int height, int width,
                                                         int binCount, Exec exec) {
  if (binCount < 1) throw ConfigError("binCount must be >= 1");
  if (edges.pixels.size() != edges.orientations.size())
    throw DimError("edge pixel and orientation lists differ in length");
  DirectionalDistanceField f;
  f.binCount = binCount;
  f.diagonal = std::hypot(double(height), double(width));
  std::vector<BinaryMask> sites(static_cast<std::size_t>(binCount), BinaryMask(height, width));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Pixel p = edges.pixels[i];
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) throw DimError("edge pixel out of bounds");
    sites[static_cast<std::size_t>(f.bin_of(edges.orientations[i]))](p.x, p.y) = 1;
  }
  f.fields.resize(static_cast<std::size_t>(binCount));
#pragma omp parallel for if (exec == Exec::Parallel) schedule(dynamic)
  for (int k = 0; k < binCount; ++k) {
    const auto& s = sites[static_cast<std::size_t>(k)];
    f.fields[static_cast<std::size_t>(k)] =
        s.any() ? distance_transform(s, Exec::Serial) : ScalarGrid(height, width, f.diagonal);
  }
  return f;
}

// --- cost ----------------------------------------------------------------------

namespace {

double sample(const DirectionalDistanceField& f, int bin, double x, double y) {
  const auto xi = static_cast<int>(std::lround(x));
  const auto yi = static_cast<int>(std::lround(y));
  const ScalarGrid& g = f.fields[static_cast<std::size_t>(bin)];
  return g.contains(xi, yi) ? g(xi, yi) : f.diagonal;
}

// Template offsets and bins for one (scale, rotation) pair.
struct Pose {
  std::vector<double> dx;
  std::vector<double> dy;
  std::vector<int> bin;
};

Pose make_pose(const BoundaryTemplate& tmpl, double scale, double rotationDeg, const DirectionalDistanceField& f) {
  const double a = radians(rotationDeg);
  const double cs = std::cos(a);
  const double sn = std::sin(a);
  Pose pose;
  const auto n = tmpl.points.size();
  pose.dx.resize(n);
  pose.dy.resize(n);
  pose.bin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = tmpl.points[i].x - tmpl.centroid.x;
    const double dy = tmpl.points[i].y - tmpl.centroid.y;
    pose.dx[i] = scale * (cs * dx - sn * dy);
    pose.dy[i] = scale * (sn * dx + cs * dy);
    pose.bin[i] = f.bin_of(fold_orientation(tmpl.normals[i] + a));
  }
  return pose;
}

double pose_cost(const Pose& pose, PointF c, int tx, int ty, const DirectionalDistanceField& f) {
  double sum = 0.0;
  const auto n = pose.dx.size();
  for (std::size_t i = 0; i < n; ++i)
    sum += sample(f, pose.bin[i], c.x + tx + pose.dx[i], c.y + ty + pose.dy[i]);
  return n ? sum / static_cast<double>(n) : f.diagonal;
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  double closeness = std::numeric_limits<double>::infinity();
  int tx = 0;
  int ty = 0;
  int si = -1;
  int ri = -1;
  double scale = 0.0;
  double rotation = 0.0;

  bool valid() const noexcept { return si >= 0; }
};

// Total order: cost, closeness to identity, then lexicographic (tx, ty, scale, rotation).
bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid()) return a.valid();
  if (!a.valid()) return false;
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.closeness != b.closeness) return a.closeness < b.closeness;
  if (a.tx != b.tx) return a.tx < b.tx;
  if (a.ty != b.ty) return a.ty < b.ty;
  if (a.scale != b.scale) return a.scale < b.scale;
  return a.rotation < b.rotation;
}

class Sweep {
 public:
  Sweep(const BoundaryTemplate& tmpl, const DirectionalDistanceField& f, const SearchGrid& grid)
      : tmpl_(tmpl), f_(f), grid_(grid) {
    poses_.reserve(grid.scales.size() * grid.rotations.size());
    for (double s : grid.scales)
      for (double r : grid.rotations) poses_.push_back(make_pose(tmpl, s, r, f));
  }

  Candidate evaluate(int tx, int ty, int si, int ri) const {
    Candidate c;
    c.tx = tx;
    c.ty = ty;
    c.si = si;
    c.ri = ri;
    c.scale = grid_.scales[static_cast<std::size_t>(si)];
    c.rotation = grid_.rotations[static_cast<std::size_t>(ri)];
    c.cost = pose_cost(pose(si, ri), tmpl_.centroid, tx, ty, f_);
    c.closeness = std::abs(std::log(c.scale)) + std::abs(c.rotation) / 20.0 +
                  std::hypot(double(tx), double(ty)) / f_.diagonal;
    return c;
  }

  int scale_count() const { return static_cast<int>(grid_.scales.size()); }
  int rotation_count() const { return static_cast<int>(grid_.rotations.size()); }

 private:
  const Pose& pose(int si, int ri) const {
    return poses_[static_cast<std::size_t>(si) * grid_.rotations.size() + static_cast<std::size_t>(ri)];
  }

  const BoundaryTemplate& tmpl_;
  const DirectionalDistanceField& f_;
  const SearchGrid& grid_;
  std::vector<Pose> poses_;
};

// Evaluates every (translation, pose) in `work` and reduces with the total order.
// The serial loop is the reference; the OpenMP path reduces per-thread winners afterwards.
template <typename Work>
Candidate reduce_best(std::size_t count, const Work& work, Exec exec) {
  Candidate best;
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < count; ++i) work(i, best);
    return best;
  }
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(dynamic, 8) nowait
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) work(static_cast<std::size_t>(i), local);
#pragma omp critical(rap_chamfer_reduce)
    if (better(local, best)) best = local;
  }
  return best;
}

}  // namespace

double chamfer_cost(const BoundaryTemplate& tmpl, const Transform2D& t, const DirectionalDistanceField& fields) {
  if (tmpl.points.empty()) return fields.diagonal;
  const double a = radians(t.rotation);
  double sum = 0.0;
  for (std::size_t i = 0; i < tmpl.points.size(); ++i) {
    const PointF p = t.apply(tmpl.points[i], tmpl.centroid);
    sum += sample(fields, fields.bin_of(fold_orientation(tmpl.normals[i] + a)), p.x, p.y);
  }
  return sum / static_cast<double>(tmpl.points.size());
}

SearchResult search_transform(const BoundaryTemplate& tmpl, const DirectionalDistanceField& fields,
                              const BinaryMask& gate, const SearchGrid& grid, Exec exec) {
  grid.validate();
  if (!gate.any()) throw EmptyGateError("gating mask is empty");
  if (!gate.same_shape(fields.height(), fields.width()))
    throw DimError("gate and distance fields differ in size");

  const Sweep sweep(tmpl, fields, grid);
  const Pixel anchor{static_cast<int>(std::lround(tmpl.centroid.x)), static_cast<int>(std::lround(tmpl.centroid.y))};
  const int stride = grid.coarseStride;
  auto on_lattice = [stride](int v) { return ((v % stride) + stride) % stride == 0; };

  std::vector<Pixel> coarse;
  for (int y = 0; y < gate.height(); ++y)
    for (int x = 0; x < gate.width(); ++x)
      if (gate(x, y) && on_lattice(x - anchor.x) && on_lattice(y - anchor.y)) coarse.push_back({x - anchor.x, y - anchor.y});
  // A gate narrower than the stride still gets searched at stride 1.
  if (coarse.empty())
    for (int y = 0; y < gate.height(); ++y)
      for (int x = 0; x < gate.width(); ++x)
        if (gate(x, y)) coarse.push_back({x - anchor.x, y - anchor.y});

  const int ns = sweep.scale_count();
  const int nr = sweep.rotation_count();
  const Candidate coarseBest = reduce_best(
      coarse.size(),
      [&](std::size_t i, Candidate& best) {
        for (int si = 0; si < ns; ++si)
          for (int ri = 0; ri < nr; ++ri) {
            const Candidate c = sweep.evaluate(coarse[i].x, coarse[i].y, si, ri);
            if (better(c, best)) best = c;
          }
      },
      exec);

  const int r = grid.fineRadius;
  const int side = 2 * r + 1;
  const Candidate fineBest = reduce_best(
      static_cast<std::size_t>(side) * side,
      [&](std::size_t i, Candidate& best) {
        const int tx = coarseBest.tx + static_cast<int>(i % side) - r;
        const int ty = coarseBest.ty + static_cast<int>(i / side) - r;
        if (!gate.test(anchor.x + tx, anchor.y + ty)) return;
        for (int si = std::max(0, coarseBest.si - 1); si <= std::min(ns - 1, coarseBest.si + 1); ++si)
          for (int ri = std::max(0, coarseBest.ri - 1); ri <= std::min(nr - 1, coarseBest.ri + 1); ++ri) {
            const Candidate c = sweep.evaluate(tx, ty, si, ri);
            if (better(c, best)) best = c;
          }
      },
      exec);

  const Candidate& best = better(fineBest, coarseBest) ? fineBest : coarseBest;
  SearchResult out;
  out.transform = {double(best.tx), double(best.ty), best.scale, best.rotation};
  out.cost = best.cost;
  out.candidates = coarse.size() * static_cast<std::size_t>(ns * nr);
  return out;
}

// --- pre-mask -------------------------------------------------------------------

BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& t, PointF pivot, int outHeight, int outWidth) {
  if (!(t.scale > 0.0)) throw ConfigError("transform scale must be positive");
  const double a = radians(t.rotation);
  const double cs = std::cos(a);
  const double sn = std::sin(a);
  BinaryMask out(outHeight, outWidth);
  for (int y = 0; y < outHeight; ++y)
    for (int x = 0; x < outWidth; ++x) {
      const double vx = (x - pivot.x - t.tx) / t.scale;
      const double vy = (y - pivot.y - t.ty) / t.scale;
      const double sx = pivot.x + cs * vx + sn * vy;
      const double sy = pivot.y - sn * vx + cs * vy;
      out(x, y) = mask.test(static_cast<int>(std::lround(sx)), static_cast<int>(std::lround(sy)));
    }
  return out;
}

Premask build_premask_detailed(const BinaryMask& supportMask, const Transform2D& t, const BinaryMask& gate,
                               int outHeight, int outWidth) {
  if (!supportMask.any()) throw EmptyMaskError("support mask is empty");
  if (!gate.same_shape(outHeight, outWidth)) throw DimError("gate does not match the output size");
  const BinaryMask warped = warp_mask(supportMask, t, mask_pivot(supportMask), outHeight, outWidth);
  const std::size_t area = warped.count();
  if (area == 0) throw EmptyPremaskError("warped support mask falls outside the query image");

  BinaryMask gated(outHeight, outWidth);
  for (std::size_t i = 0; i < gated.size(); ++i) gated.data()[i] = warped.data()[i] && gate.data()[i];
  Premask out;
  out.gateBypassed = 2 * gated.count() < area;
  out.mask = fill_holes(largest_component(out.gateBypassed ? warped : gated));
  return out;
}

BinaryMask build_premask(const BinaryMask& supportMask, const Transform2D& t, const BinaryMask& gate,
                         int outHeight, int outWidth) {
  return build_premask_detailed(supportMask, t, gate, outHeight, outWidth).mask;
}

}  // namespace rap
