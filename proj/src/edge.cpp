#include "rap/edge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "rap/errors.hpp"

namespace rap {
namespace {

// Responses below this are treated as numerically zero before peak normalisation.
constexpr double kFlatResponse = 1e-10;

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Second derivative of the normalised Gaussian, made zero-sum so flat signals give no response.
std::vector<double> gaussian_second_derivative(double sigma, int radius) {
  const std::vector<double> g = gaussian_kernel(sigma, radius);
  std::vector<double> k(g.size());
  const double s2 = sigma * sigma;
  double mean = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const auto j = static_cast<std::size_t>(i + radius);
    k[j] = (double(i) * i / (s2 * s2) - 1.0 / s2) * g[j];
    mean += k[j];
  }
  mean /= static_cast<double>(k.size());
  for (auto& v : k) v -= mean;
  return k;
}

ScalarGrid convolve_rows(const ScalarGrid& in, const std::vector<double>& k, bool par) {
  const int radius = static_cast<int>(k.size() / 2);
  ScalarGrid out(in.height(), in.width());
#pragma omp parallel for if (par) schedule(static)
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += k[static_cast<std::size_t>(i + radius)] * in(reflect(x - i, in.width()), y);
      out(x, y) = s;
    }
  return out;
}

ScalarGrid convolve_cols(const ScalarGrid& in, const std::vector<double>& k, bool par) {
  const int radius = static_cast<int>(k.size() / 2);
  ScalarGrid out(in.height(), in.width());
#pragma omp parallel for if (par) schedule(static)
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += k[static_cast<std::size_t>(i + radius)] * in(x, reflect(y - i, in.height()));
      out(x, y) = s;
    }
  return out;
}

ScalarGrid to_scalar(const Image& image) {
  ScalarGrid g(image.height(), image.width());
  std::copy(image.data().begin(), image.data().end(), g.data().begin());
  return g;
}

void normalise_peak(ScalarGrid& g) {
  double peak = 0.0;
  for (double v : g.data()) peak = std::max(peak, v);
  if (peak < kFlatResponse) {
    std::fill(g.data().begin(), g.data().end(), 0.0);
    return;
  }
  for (auto& v : g.data()) v /= peak;
}

}  // namespace

double fold_orientation(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle, pi);
  if (a < 0.0) a += pi;
  if (a >= pi) a -= pi;
  return a;
}

ScalarGrid log_response(const Image& image, double sigma, Exec exec) {
  if (!(sigma > 0.0)) throw ConfigError("LoG scale must be positive");
  const bool par = exec == Exec::Parallel;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const auto g = gaussian_kernel(sigma, radius);
  const auto g2 = gaussian_second_derivative(sigma, radius);
  const ScalarGrid src = to_scalar(image);
  const ScalarGrid dxx = convolve_cols(convolve_rows(src, g2, par), g, par);
  const ScalarGrid dyy = convolve_cols(convolve_rows(src, g, par), g2, par);
  ScalarGrid out(image.height(), image.width());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::abs(dxx.data()[i] + dyy.data()[i]);
  normalise_peak(out);
  return out;
}

EdgeMap sobel(const Image& image) {
  const int h = image.height();
  const int w = image.width();
  EdgeMap e{ScalarGrid(h, w), ScalarGrid(h, w)};
  auto px = [&](int x, int y) -> double { return image(reflect(x, w), reflect(y, h)); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const double mag = std::hypot(gx, gy);
      e.strength(x, y) = mag;
      e.orientation(x, y) = mag > kFlatResponse ? fold_orientation(std::atan2(gy, gx)) : 0.0;
    }
  normalise_peak(e.strength);
  return e;
}

EdgeMap edge_map(const Image& image, const std::vector<double>& scales, double wLog, double wGrad, Exec exec) {
  if (scales.empty()) throw ConfigError("edge_map needs at least one LoG scale");
  if (wLog < 0.0 || wGrad < 0.0 || (wLog == 0.0 && wGrad == 0.0))
    throw ConfigError("edge weights must be non-negative and not both zero");

  EdgeMap out = sobel(image);
  ScalarGrid logMax(image.height(), image.width(), 0.0);
  if (wLog > 0.0) {
    for (double sigma : scales) {
      const ScalarGrid r = log_response(image, sigma, exec);
      for (std::size_t i = 0; i < r.size(); ++i) logMax.data()[i] = std::max(logMax.data()[i], r.data()[i]);
    }
  }
  for (std::size_t i = 0; i < logMax.size(); ++i)
    out.strength.data()[i] = wLog * logMax.data()[i] + wGrad * out.strength.data()[i];
  return out;
}

EdgePixelSet binarize_edges(const EdgeMap& edges, double keepFraction) {
  if (!(keepFraction > 0.0 && keepFraction < 1.0)) throw ConfigError("keepFraction must lie in (0,1)");
  std::vector<double> nonzero;
  for (double v : edges.strength.data())
    if (v > 0.0) nonzero.push_back(v);
  if (nonzero.empty()) throw EmptyEdgesError("edge map has no nonzero strength");

  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(keepFraction * static_cast<double>(nonzero.size()))));
  std::nth_element(nonzero.begin(), nonzero.begin() + static_cast<std::ptrdiff_t>(keep - 1), nonzero.end(),
                   std::greater<>());
  const double threshold = nonzero[keep - 1];

  EdgePixelSet set;
  const auto& s = edges.strength;
  for (int y = 0; y < s.height(); ++y)
    for (int x = 0; x < s.width(); ++x)
      if (s(x, y) > 0.0 && s(x, y) >= threshold) {
        set.pixels.push_back({x, y});
        set.orientations.push_back(edges.orientation(x, y));
      }
  return set;
}

}  // namespace rap
