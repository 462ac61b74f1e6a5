#include "rap/style.hpp"

#include <algorithm>
#include <string>

#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {
namespace {

template <typename G>
WaveletSubbands analyse(const G& in) {
  const int h = in.height();
  const int w = in.width();
  const int hh = (h + 1) / 2;
  const int hw = (w + 1) / 2;
  WaveletSubbands s{ScalarGrid(hh, hw), ScalarGrid(hh, hw), ScalarGrid(hh, hw), ScalarGrid(hh, hw)};
  for (int y = 0; y < hh; ++y) {
    const int y0 = 2 * y;
    const int y1 = std::min(y0 + 1, h - 1);
    for (int x = 0; x < hw; ++x) {
      const int x0 = 2 * x;
      const int x1 = std::min(x0 + 1, w - 1);
      const double a = in(x0, y0);
      const double b = in(x1, y0);
      const double c = in(x0, y1);
      const double d = in(x1, y1);
      s.ll(x, y) = 0.5 * (a + b + c + d);
      s.lh(x, y) = 0.5 * (a + b - c - d);
      s.hl(x, y) = 0.5 * (a - b + c - d);
      s.hh(x, y) = 0.5 * (a - b - c + d);
    }
  }
  return s;
}

}  // namespace

WaveletSubbands dwt2(const Image& image) { return analyse(image); }
WaveletSubbands dwt2(const ScalarGrid& signal) { return analyse(signal); }

ScalarGrid idwt2_unclamped(const WaveletSubbands& s, int outHeight, int outWidth) {
  const int hh = (outHeight + 1) / 2;
  const int hw = (outWidth + 1) / 2;
  for (const ScalarGrid* band : {&s.ll, &s.lh, &s.hl, &s.hh})
    if (!band->same_shape(hh, hw))
      throw DimError("subbands are " + std::to_string(band->height()) + "x" + std::to_string(band->width()) +
                     ", expected " + std::to_string(hh) + "x" + std::to_string(hw));
  ScalarGrid out(outHeight, outWidth);
  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < hw; ++x) {
      const double ll = s.ll(x, y);
      const double lh = s.lh(x, y);
      const double hl = s.hl(x, y);
      const double dd = s.hh(x, y);
      const double block[2][2] = {{0.5 * (ll + lh + hl + dd), 0.5 * (ll + lh - hl - dd)},
                                  {0.5 * (ll - lh + hl - dd), 0.5 * (ll - lh - hl + dd)}};
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          if (out.contains(2 * x + dx, 2 * y + dy)) out(2 * x + dx, 2 * y + dy) = block[dy][dx];
    }
  }
  return out;
}

Image idwt2(const WaveletSubbands& subbands, int outHeight, int outWidth) {
  const ScalarGrid raw = idwt2_unclamped(subbands, outHeight, outWidth);
  Image out(outHeight, outWidth);
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.data()[i] = static_cast<float>(std::clamp(raw.data()[i], 0.0, 1.0));
  return out;
}

ScalarGrid style_adapt_unclamped(const Image& support, const Image& query) {
  const Image resized = resize_bilinear(support, query.height(), query.width());
  WaveletSubbands mixed = dwt2(resized);
  mixed.ll = dwt2(query).ll;
  return idwt2_unclamped(mixed, query.height(), query.width());
}

Image style_adapt(const Image& support, const Image& query) {
  const ScalarGrid raw = style_adapt_unclamped(support, query);
  Image out(query.height(), query.width());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.data()[i] = static_cast<float>(std::clamp(raw.data()[i], 0.0, 1.0));
  return out;
}

}  // namespace rap
