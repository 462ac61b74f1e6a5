#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "rap/types.hpp"

namespace rap::testing {

inline BinaryMask disk(int h, int w, double cx, double cy, double r) {
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(x, y) = 1;
  return m;
}

inline BinaryMask rect(int h, int w, int x0, int y0, int x1, int y1) {
  BinaryMask m(h, w);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m(x, y) = 1;
  return m;
}

/// Union of a few random disks; never empty.
inline BinaryMask random_blob(std::mt19937& rng, int h, int w, int maxRadius) {
  std::uniform_int_distribution<int> n(1, 3);
  std::uniform_real_distribution<double> fx(0.25 * w, 0.75 * w), fy(0.25 * h, 0.75 * h);
  std::uniform_real_distribution<double> fr(2.0, maxRadius);
  BinaryMask m(h, w);
  const int count = n(rng);
  for (int i = 0; i < count; ++i) {
    const BinaryMask d = disk(h, w, fx(rng), fy(rng), fr(rng));
    for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] |= d.data()[k];
  }
  if (!m.any()) m(w / 2, h / 2) = 1;
  return m;
}

inline Image random_image(std::mt19937& rng, int h, int w) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(h, w);
  for (float& v : img.data()) v = u(rng);
  return img;
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rap_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace rap::testing
