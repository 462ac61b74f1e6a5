#pragma once

#include "rap/types.hpp"

namespace rap {

/// One-level orthonormal Haar subbands, each ceil(H/2) x ceil(W/2).
/// For a 2x2 block [[a, b], [c, d]]:
///   ll = (a+b+c+d)/2, lh = (a+b-c-d)/2, hl = (a-b+c-d)/2, hh = (a-b-c+d)/2.
struct WaveletSubbands {
  ScalarGrid ll;
  ScalarGrid lh;
  ScalarGrid hl;
  ScalarGrid hh;
};

/// Odd dimensions are padded by replicating the last row/column.
WaveletSubbands dwt2(const Image& image);
WaveletSubbands dwt2(const ScalarGrid& signal);

/// Inverse transform cropped to outHeight x outWidth, without clamping.
ScalarGrid idwt2_unclamped(const WaveletSubbands& subbands, int outHeight, int outWidth);

/// Inverse transform clamped to [0,1]. Throws DimError when the subbands do not cover the output.
Image idwt2(const WaveletSubbands& subbands, int outHeight, int outWidth);

/// Query LL combined with the support's detail bands; support is resized to the query first.
ScalarGrid style_adapt_unclamped(const Image& support, const Image& query);
Image style_adapt(const Image& support, const Image& query);

}  // namespace rap
