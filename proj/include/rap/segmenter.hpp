#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "rap/edge.hpp"
#include "rap/prompt.hpp"
#include "rap/types.hpp"

namespace rap {

struct SegmenterRequest {
  Image image;
  PromptSet prompts;
};

struct SegmenterResult {
  BinaryMask mask;
  double confidence = 0.0;
};

/// A promptable segmenter: points + box in, mask out.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmenterResult segment(const SegmenterRequest& request, const EdgeMap& edges) = 0;
  virtual std::string name() const = 0;
};

inline constexpr double kGeodesicLambda = 20.0;

/// Geodesic competition inside the bbox: Dijkstra on the 8-connected pixel graph with step cost
/// length * (1 + lambda * mean endpoint edge strength), seeded from the positives and from the
/// negatives plus the bbox border. Foreground where the positive distance is strictly smaller;
/// kept components touch a positive, holes are filled.
SegmenterResult fallback_segment(const SegmenterRequest& request, const EdgeMap& edges,
                                 double lambda = kGeodesicLambda);

class FallbackSegmenter final : public Segmenter {
 public:
  SegmenterResult segment(const SegmenterRequest& request, const EdgeMap& edges) override {
    return fallback_segment(request, edges);
  }
  std::string name() const override { return "fallback"; }
};

// Adapter directory contract: request.json + image.raf written by the core;
// result_mask.raf + result_meta.json {"confidence": float} written by the adapter.
inline constexpr const char* kRequestFile = "request.json";
inline constexpr const char* kRequestImageFile = "image.raf";
inline constexpr const char* kResultMaskFile = "result_mask.raf";
inline constexpr const char* kResultMetaFile = "result_meta.json";

void export_request(const SegmenterRequest& request, const std::filesystem::path& dir);
SegmenterRequest read_request(const std::filesystem::path& dir);

/// Reads the adapter's result; throws AdapterError when files are missing.
SegmenterResult import_result(const std::filesystem::path& dir);
/// As above, and throws DimError unless the mask is height x width.
SegmenterResult import_result(const std::filesystem::path& dir, int height, int width);

/// Exchanges files with an external adapter. When `command` is non-empty it is run as
/// `<command> <dir>` between export and import; otherwise the result must already exist.
class AdapterSegmenter final : public Segmenter {
 public:
  AdapterSegmenter(std::filesystem::path dir, std::string command = {})
      : dir_(std::move(dir)), command_(std::move(command)) {}
  SegmenterResult segment(const SegmenterRequest& request, const EdgeMap& edges) override;
  std::string name() const override { return "adapter"; }

 private:
  std::filesystem::path dir_;
  std::string command_;
};

}  // namespace rap
