#pragma once

// RAF interchange container (little-endian):
//   "RAPA" | version u8 = 1 | dtype u8 (1 = f32, 2 = u8) | ndim u8 (1..3) | reserved u8 = 0
//   | dims: ndim x u32 | payload, row-major, channel innermost for ndim = 3.
// 2D dims are [height, width]; 3D dims are [height, width, channels].

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "rap/types.hpp"

namespace rap {

enum class DType : std::uint8_t { F32 = 1, U8 = 2 };

inline constexpr std::size_t kRafHeaderBytes = 8;

/// Undecoded RAF contents; exactly one of f32/u8 is populated.
struct RawArray {
  DType dtype = DType::F32;
  std::vector<std::uint32_t> dims;
  std::vector<float> f32;
  std::vector<std::uint8_t> u8;

  std::size_t element_count() const;
};

std::vector<std::uint8_t> encode_raf(const RawArray& array);
RawArray decode_raf(std::span<const std::uint8_t> bytes);

RawArray read_raw(const std::filesystem::path& path);
void write_raw(const RawArray& array, const std::filesystem::path& path);

/// f32 2D arrays holding values outside [0,1] (similarity maps, edge strength) decode as ScalarGrid.
using ArrayValue = std::variant<Image, BinaryMask, FeatureMap, Descriptor, ScalarGrid>;

ArrayValue read_array(const std::filesystem::path& path);

void write_array(const Image& image, const std::filesystem::path& path);
void write_array(const BinaryMask& mask, const std::filesystem::path& path);
void write_array(const FeatureMap& features, const std::filesystem::path& path);
void write_array(const Descriptor& descriptor, const std::filesystem::path& path);
void write_array(const ScalarGrid& grid, const std::filesystem::path& path);

// Typed readers; each throws FormatError when the file holds a different kind of array.
Image read_image(const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);
FeatureMap read_features(const std::filesystem::path& path);
ScalarGrid read_grid(const std::filesystem::path& path);

/// Reads a RAF image or a binary P5 PGM, chosen by magic bytes.
Image read_image_any(const std::filesystem::path& path);

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& image, const std::filesystem::path& path);

/// 8-bit grayscale PNG.
void write_png(const Grid<std::uint8_t>& gray, const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

/// Checks the Image invariants (finite values in [0,1]); throws DataError.
void validate_image(const Image& image);

}  // namespace rap
