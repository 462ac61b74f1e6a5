#pragma once

#include <cassert>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rap {

/// Integer pixel coordinate: x rightward, y downward, origin top-left.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  /// Row-major order: smaller y first, then smaller x.
  friend std::strong_ordering operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

/// Dense row-major 2D grid.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}
  Grid(int height, int width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    assert(data_.size() == static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool same_shape(int height, int width) const noexcept {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return same_shape(other.height(), other.width());
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& at(Pixel p) noexcept { return (*this)(p.x, p.y); }
  const T& at(Pixel p) const noexcept { return (*this)(p.x, p.y); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using ScalarGrid = Grid<double>;

/// Grayscale intensities in [0,1].
class Image : public Grid<float> {
 public:
  using Grid<float>::Grid;
};

/// Binary mask; every element is 0 or 1.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : data()) n += v != 0;
    return n;
  }
  bool any() const noexcept {
    for (auto v : data())
      if (v) return true;
    return false;
  }
  bool test(int x, int y) const noexcept { return contains(x, y) && (*this)(x, y) != 0; }
};

/// Dense patch-descriptor grid (h x w x d), channel innermost.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int gridHeight, int gridWidth, int dim, float fill = 0.0f)
      : h_(gridHeight), w_(gridWidth), d_(dim),
        data_(static_cast<std::size_t>(gridHeight) * gridWidth * dim, fill) {}
  FeatureMap(int gridHeight, int gridWidth, int dim, std::vector<float> data)
      : h_(gridHeight), w_(gridWidth), d_(dim), data_(std::move(data)) {
    assert(data_.size() == static_cast<std::size_t>(h_) * w_ * d_);
  }

  int grid_height() const noexcept { return h_; }
  int grid_width() const noexcept { return w_; }
  int dim() const noexcept { return d_; }
  std::size_t cells() const noexcept { return static_cast<std::size_t>(h_) * w_; }

  std::span<const float> cell(int gx, int gy) const noexcept {
    return {data_.data() + offset(gx, gy), static_cast<std::size_t>(d_)};
  }
  std::span<float> cell(int gx, int gy) noexcept {
    return {data_.data() + offset(gx, gy), static_cast<std::size_t>(d_)};
  }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t offset(int gx, int gy) const noexcept {
    return (static_cast<std::size_t>(gy) * w_ + gx) * d_;
  }

  int h_ = 0;
  int w_ = 0;
  int d_ = 0;
  std::vector<float> data_;
};

struct Descriptor {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

/// Inclusive pixel bounds.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool valid() const noexcept { return x0 <= x1 && y0 <= y1; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Selects the serial reference loop or the OpenMP kernel for parallel sweeps.
enum class Exec { Serial, Parallel };

}  // namespace rap
