#include "rap/arrayio.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "rap/errors.hpp"

namespace rap {
namespace {

constexpr std::array<char, 4> kMagic = {'R', 'A', 'P', 'A'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

RawArray make_f32(std::vector<std::uint32_t> dims, std::span<const float> values) {
  RawArray a;
  a.dtype = DType::F32;
  a.dims = std::move(dims);
  a.f32.assign(values.begin(), values.end());
  return a;
}

std::uint32_t dim(int v) { return static_cast<std::uint32_t>(v); }

}  // namespace

std::size_t RawArray::element_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_raf(const RawArray& array) {
  const std::size_t n = array.element_count();
  if (array.dims.empty() || array.dims.size() > 3) throw FormatError("RAF supports 1 to 3 dims");
  if ((array.dtype == DType::F32 ? array.f32.size() : array.u8.size()) != n)
    throw DimError("payload length does not match dims");

  std::vector<std::uint8_t> out;
  out.reserve(kRafHeaderBytes + 4 * array.dims.size() + n * (array.dtype == DType::F32 ? 4 : 1));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(array.dtype));
  out.push_back(static_cast<std::uint8_t>(array.dims.size()));
  out.push_back(0);
  for (auto d : array.dims) put_u32(out, d);
  if (array.dtype == DType::F32) {
    for (float v : array.f32) put_u32(out, std::bit_cast<std::uint32_t>(v));
  } else {
    out.insert(out.end(), array.u8.begin(), array.u8.end());
  }
  return out;
}

RawArray decode_raf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw TruncatedError("RAF header truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FormatError("bad RAF magic");
  if (bytes.size() < kRafHeaderBytes) throw TruncatedError("RAF header truncated");
  if (bytes[4] != kVersion) throw FormatError("unsupported RAF version " + std::to_string(bytes[4]));
  const std::uint8_t dtype = bytes[5];
  const std::uint8_t ndim = bytes[6];
  if (dtype != 1 && dtype != 2) throw FormatError("unknown RAF dtype " + std::to_string(dtype));
  if (ndim < 1 || ndim > 3) throw FormatError("RAF ndim must be 1..3");
  if (bytes[7] != 0) throw FormatError("RAF reserved byte must be zero");
  if (bytes.size() < kRafHeaderBytes + 4u * ndim) throw TruncatedError("RAF dims truncated");

  RawArray a;
  a.dtype = static_cast<DType>(dtype);
  for (int i = 0; i < ndim; ++i) a.dims.push_back(get_u32(bytes.data() + kRafHeaderBytes + 4 * i));
  const std::size_t n = a.element_count();
  const std::size_t width = a.dtype == DType::F32 ? 4 : 1;
  const std::size_t offset = kRafHeaderBytes + 4u * ndim;
  const std::size_t have = bytes.size() - offset;
  if (have < n * width) throw TruncatedError("RAF payload truncated");
  if (have > n * width) throw FormatError("trailing bytes after RAF payload");

  const std::uint8_t* p = bytes.data() + offset;
  if (a.dtype == DType::F32) {
    a.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float v = std::bit_cast<float>(get_u32(p + 4 * i));
      if (!std::isfinite(v)) throw DataError("non-finite value at element " + std::to_string(i));
      a.f32[i] = v;
    }
  } else {
    a.u8.assign(p, p + n);
  }
  return a;
}

RawArray read_raw(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  return decode_raf(bytes);
}

void write_raw(const RawArray& array, const std::filesystem::path& path) {
  spit(path, encode_raf(array));
}

ArrayValue read_array(const std::filesystem::path& path) {
  RawArray a = read_raw(path);
  const auto& d = a.dims;
  if (a.dtype == DType::U8) {
    if (d.size() != 2) throw FormatError("u8 arrays must be 2D");
    const int h = static_cast<int>(d[0]);
    const int w = static_cast<int>(d[1]);
    const bool binary = std::all_of(a.u8.begin(), a.u8.end(), [](auto v) { return v == 0 || v == 255; });
    if (binary) {
      BinaryMask m(h, w);
      for (std::size_t i = 0; i < a.u8.size(); ++i) m.data()[i] = a.u8[i] == 255;
      return m;
    }
    Image img(h, w);
    for (std::size_t i = 0; i < a.u8.size(); ++i) img.data()[i] = static_cast<float>(a.u8[i] / 255.0);
    return img;
  }
  switch (d.size()) {
    case 1: {
      Descriptor desc;
      desc.values.assign(a.f32.begin(), a.f32.end());
      return desc;
    }
    case 2: {
      const int h = static_cast<int>(d[0]);
      const int w = static_cast<int>(d[1]);
      const bool unit = std::all_of(a.f32.begin(), a.f32.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
      if (unit) return Image(h, w, std::move(a.f32));
      ScalarGrid g(h, w);
      std::copy(a.f32.begin(), a.f32.end(), g.data().begin());
      return g;
    }
    default: {
      if (d[2] < 1) throw DataError("feature map needs at least one channel");
      return FeatureMap(static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2]),
                        std::move(a.f32));
    }
  }
}

void write_array(const Image& image, const std::filesystem::path& path) {
  validate_image(image);
  write_raw(make_f32({dim(image.height()), dim(image.width())}, image.data()), path);
}

void write_array(const BinaryMask& mask, const std::filesystem::path& path) {
  RawArray a;
  a.dtype = DType::U8;
  a.dims = {dim(mask.height()), dim(mask.width())};
  a.u8.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) a.u8[i] = mask.data()[i] ? 255 : 0;
  write_raw(a, path);
}

void write_array(const FeatureMap& features, const std::filesystem::path& path) {
  write_raw(make_f32({dim(features.grid_height()), dim(features.grid_width()), dim(features.dim())},
                     features.data()),
            path);
}

void write_array(const Descriptor& descriptor, const std::filesystem::path& path) {
  std::vector<float> v(descriptor.values.begin(), descriptor.values.end());
  write_raw(make_f32({dim(static_cast<int>(v.size()))}, v), path);
}

void write_array(const ScalarGrid& grid, const std::filesystem::path& path) {
  std::vector<float> v(grid.data().begin(), grid.data().end());
  write_raw(make_f32({dim(grid.height()), dim(grid.width())}, v), path);
}

Image read_image(const std::filesystem::path& path) {
  ArrayValue v = read_array(path);
  if (auto* img = std::get_if<Image>(&v)) return std::move(*img);
  if (auto* m = std::get_if<BinaryMask>(&v)) {
    Image img(m->height(), m->width());
    for (std::size_t i = 0; i < m->size(); ++i) img.data()[i] = m->data()[i] ? 1.0f : 0.0f;
    return img;
  }
  if (std::holds_alternative<ScalarGrid>(v)) throw DataError(path.string() + ": intensities outside [0,1]");
  throw FormatError(path.string() + " is not a 2D image");
}

BinaryMask read_mask(const std::filesystem::path& path) {
  ArrayValue v = read_array(path);
  if (auto* m = std::get_if<BinaryMask>(&v)) return std::move(*m);
  throw FormatError(path.string() + " is not a u8 {0,255} mask");
}

FeatureMap read_features(const std::filesystem::path& path) {
  ArrayValue v = read_array(path);
  if (auto* f = std::get_if<FeatureMap>(&v)) return std::move(*f);
  throw FormatError(path.string() + " is not a 3D feature map");
}

ScalarGrid read_grid(const std::filesystem::path& path) {
  RawArray a = read_raw(path);
  if (a.dims.size() != 2) throw FormatError(path.string() + " is not a 2D array");
  ScalarGrid g(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]));
  if (a.dtype == DType::F32)
    std::copy(a.f32.begin(), a.f32.end(), g.data().begin());
  else
    for (std::size_t i = 0; i < a.u8.size(); ++i) g.data()[i] = a.u8[i] / 255.0;
  return g;
}

void validate_image(const Image& image) {
  for (float v : image.data())
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError("image value outside [0,1]");
}

// --- PGM -------------------------------------------------------------------

namespace {

class PgmHeader {
 public:
  explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) t.push_back(static_cast<char>(bytes_[pos_++]));
    if (t.empty()) throw TruncatedError("PGM header truncated");
    return t;
  }

  long number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw FormatError("bad PGM header field '" + t + "'");
    return std::stol(t);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 2) throw FormatError("not a PGM file");
  if (bytes[0] == 'P' && bytes[1] == '2') throw UnsupportedError("ASCII PGM (P2) is not supported");
  if (bytes[0] != 'P' || bytes[1] != '5') throw FormatError("not a binary PGM (P5)");
  PgmHeader header(std::span<const std::uint8_t>(bytes).subspan(2));
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (width <= 0 || height <= 0) throw FormatError("PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 65535) throw FormatError("PGM maxval out of range");
  const std::size_t offset = 2 + header.raster_offset();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + n * bpp) throw TruncatedError("PGM raster truncated");

  Image img(static_cast<int>(height), static_cast<int>(width));
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bpp == 1 ? p[i] : (unsigned(p[2 * i]) << 8) | p[2 * i + 1];
    if (v > static_cast<unsigned>(maxval)) throw DataError("PGM sample exceeds maxval");
    img.data()[i] = static_cast<float>(double(v) / double(maxval));
  }
  return img;
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
  validate_image(image);
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (float v : image.data()) out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
  spit(path, out);
}

Image read_image_any(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char head[2] = {0, 0};
  in.read(head, 2);
  if (head[0] == 'P') return read_pgm(path);
  return read_image(path);
}

// --- PNG -------------------------------------------------------------------

namespace {

void png_chunk(std::vector<std::uint8_t>& out, const char* type, std::span<const std::uint8_t> body) {
  const auto len = static_cast<std::uint32_t>(body.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
}

}  // namespace

void write_png(const Grid<std::uint8_t>& gray, const std::filesystem::path& path) {
  const auto w = static_cast<std::uint32_t>(gray.width());
  const auto h = static_cast<std::uint32_t>(gray.height());
  std::vector<std::uint8_t> raw;
  raw.reserve((w + 1) * h);
  for (std::uint32_t y = 0; y < h; ++y) {
    raw.push_back(0);  // filter: none
    const auto row = gray.data().subspan(y * w, w);
    raw.insert(raw.end(), row.begin(), row.end());
  }
  uLongf zsize = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zsize);
  if (compress2(z.data(), &zsize, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK)
    throw IoError("PNG compression failed");
  z.resize(zsize);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  for (auto v : {w, h})
    for (int i = 3; i >= 0; --i) ihdr.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // 8-bit grayscale, no interlace
  png_chunk(out, "IHDR", ihdr);
  png_chunk(out, "IDAT", z);
  png_chunk(out, "IEND", {});
  spit(path, out);
}

void write_png(const Image& image, const std::filesystem::path& path) {
  Grid<std::uint8_t> g(image.height(), image.width());
  for (std::size_t i = 0; i < image.size(); ++i)
    g.data()[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.data()[i], 0.0f, 1.0f) * 255.0f));
  write_png(g, path);
}

}  // namespace rap
