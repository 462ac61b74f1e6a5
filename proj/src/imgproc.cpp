#include "rap/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace rap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared distance transform of sampled function f (lower envelope of parabolas).
// Scratch buffers are caller-owned so the 2D passes allocate once per thread.
void dt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q) - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

ScalarGrid squared_distance_transform(const BinaryMask& sites, Exec exec) {
  const int h = sites.height();
  const int w = sites.width();
  ScalarGrid out(h, w, kInf);
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites.data()[i]) out.data()[i] = 0.0;
  const bool par = exec == Exec::Parallel;

  // columns
#pragma omp parallel if (par)
  {
    std::vector<double> f(static_cast<std::size_t>(h)), d(static_cast<std::size_t>(h));
    std::vector<int> v;
    std::vector<double> z;
#pragma omp for schedule(static)
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = out(x, y);
      dt_1d(f.data(), d.data(), h, v, z);
      for (int y = 0; y < h; ++y) out(x, y) = d[y];
    }
  }
  // rows
#pragma omp parallel if (par)
  {
    std::vector<double> f(static_cast<std::size_t>(w)), d(static_cast<std::size_t>(w));
    std::vector<int> v;
    std::vector<double> z;
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = out(x, y);
      dt_1d(f.data(), d.data(), w, v, z);
      for (int x = 0; x < w; ++x) out(x, y) = d[x];
    }
  }
  return out;
}

ScalarGrid distance_transform(const BinaryMask& sites, Exec exec) {
  ScalarGrid d = squared_distance_transform(sites, exec);
  for (auto& v : d.data()) v = std::sqrt(v);
  return d;
}

namespace {

struct Tap {
  int i0;
  int i1;
  double t;
};

Tap bilinear_tap(double coord, int extent) {
  coord = std::clamp(coord, 0.0, double(extent - 1));
  const int i0 = static_cast<int>(std::floor(coord));
  const int i1 = std::min(i0 + 1, extent - 1);
  return {i0, i1, coord - i0};
}

}  // namespace

Image resize_bilinear(const Image& image, int height, int width) {
  if (image.same_shape(height, width)) return image;
  Image out(height, width);
  const double sy = double(image.height()) / height;
  const double sx = double(image.width()) / width;
  for (int y = 0; y < height; ++y) {
    const Tap ty = bilinear_tap((y + 0.5) * sy - 0.5, image.height());
    for (int x = 0; x < width; ++x) {
      const Tap tx = bilinear_tap((x + 0.5) * sx - 0.5, image.width());
      const double top = (1 - tx.t) * image(tx.i0, ty.i0) + tx.t * image(tx.i1, ty.i0);
      const double bot = (1 - tx.t) * image(tx.i0, ty.i1) + tx.t * image(tx.i1, ty.i1);
      out(x, y) = static_cast<float>(std::clamp((1 - ty.t) * top + ty.t * bot, 0.0, 1.0));
    }
  }
  return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, int height, int width) {
  if (mask.same_shape(height, width)) return mask;
  BinaryMask out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height() - 1,
                            static_cast<int>(std::floor((y + 0.5) * mask.height() / height)));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width() - 1,
                              static_cast<int>(std::floor((x + 0.5) * mask.width() / width)));
      out(x, y) = mask(sx, sy);
    }
  }
  return out;
}

ScalarGrid upsample_cells(const ScalarGrid& cells, int height, int width) {
  ScalarGrid out(height, width);
  const double sy = double(cells.height()) / height;
  const double sx = double(cells.width()) / width;
  for (int y = 0; y < height; ++y) {
    const Tap ty = bilinear_tap((y + 0.5) * sy - 0.5, cells.height());
    for (int x = 0; x < width; ++x) {
      const Tap tx = bilinear_tap((x + 0.5) * sx - 0.5, cells.width());
      const double top = (1 - tx.t) * cells(tx.i0, ty.i0) + tx.t * cells(tx.i1, ty.i0);
      const double bot = (1 - tx.t) * cells(tx.i0, ty.i1) + tx.t * cells(tx.i1, ty.i1);
      out(x, y) = (1 - ty.t) * top + ty.t * bot;
    }
  }
  return out;
}

BinaryMask block_majority(const BinaryMask& mask, int gridHeight, int gridWidth) {
  BinaryMask out(gridHeight, gridWidth);
  for (int gy = 0; gy < gridHeight; ++gy) {
    const auto [y0, y1] = cell_span(gy, gridHeight, mask.height());
    for (int gx = 0; gx < gridWidth; ++gx) {
      const auto [x0, x1] = cell_span(gx, gridWidth, mask.width());
      std::size_t fg = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) fg += mask(x, y) != 0;
      const auto area = static_cast<std::size_t>(y1 - y0) * static_cast<std::size_t>(x1 - x0);
      out(gx, gy) = area > 0 && 2 * fg > area;
    }
  }
  return out;
}

Components label_components(const BinaryMask& mask) {
  Components c{Grid<int>(mask.height(), mask.width(), -1), {}};
  std::vector<Pixel> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y) || c.labels(x, y) >= 0) continue;
      const int label = static_cast<int>(c.sizes.size());
      std::size_t size = 0;
      stack.push_back({x, y});
      c.labels(x, y) = label;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        ++size;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (mask.test(nx, ny) && c.labels(nx, ny) < 0) {
              c.labels(nx, ny) = label;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      c.sizes.push_back(size);
    }
  }
  return c;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const Components c = label_components(mask);
  BinaryMask out(mask.height(), mask.width());
  if (c.sizes.empty()) return out;
  const auto best = static_cast<int>(std::max_element(c.sizes.begin(), c.sizes.end()) - c.sizes.begin());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = c.labels.data()[i] == best;
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  BinaryMask outside(h, w);
  std::vector<Pixel> stack;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      stack.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int kDx[] = {1, -1, 0, 0};
  constexpr int kDy[] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    for (int k = 0; k < 4; ++k) {
      const int nx = p.x + kDx[k];
      const int ny = p.y + kDy[k];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  BinaryMask out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = !outside.data()[i];
  return out;
}

std::optional<PointF> centroid(const BinaryMask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
  if (n == 0) return std::nullopt;
  return PointF{sx / double(n), sy / double(n)};
}

Box bounding_box(const BinaryMask& mask) {
  Box b{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

}  // namespace rap
