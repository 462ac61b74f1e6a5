#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rap/chamfer.hpp"
#include "rap/edge.hpp"
#include "rap/gating.hpp"
#include "rap/prompt.hpp"
#include "rap/retrieval.hpp"
#include "rap/segmenter.hpp"
#include "rap/types.hpp"

namespace rap {

/// Stage switches: oriented chamfer matching, semantic gating, Voronoi positives.
struct AblationFlags {
  bool ocm = true;
  bool sg = true;
  bool vp = true;
};

/// Strength map handed to the segmenter: Sobel only, or the multi-scale map used for alignment.
enum class SegmenterEdges { Gradient, Combined };

struct PipelineConfig {
  int retrievalRank = 2;
  bool useMaskedDescriptor = true;
  bool enableStyleAdapt = false;
  GatingConfig gating;
  EdgeParams edge;
  SearchGrid search;
  int binCount = 8;
  int templatePointCount = 128;
  PromptParams prompt;
  SegmenterEdges segmenterEdges = SegmenterEdges::Gradient;
  AblationFlags ablation;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parses the flat `key = value` config format; unknown keys raise ConfigError.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);
/// Every key with its current value, in the same format parse_config reads.
std::string dump_config(const PipelineConfig& config);

inline constexpr int kTraceVersion = 1;

struct PipelineTrace {
  std::string retrievedId;
  int effectiveRank = 0;
  std::vector<std::string> rankedIds;
  std::vector<double> scores;
  std::optional<SearchResult> search;
  std::size_t gateArea = 0;
  std::size_t premaskArea = 0;
  bool gateBypassed = false;
  bool premaskFallback = false;  ///< alignment failed; the gate's bbox was prompted instead
  PromptSet prompts;
  double confidence = 0.0;
  AblationFlags ablation;
};

/// Versioned, key-sorted JSON.
std::string trace_to_json(const PipelineTrace& trace);

struct PipelineOutput {
  BinaryMask mask;
  PipelineTrace trace;
  BinaryMask gate;
  BinaryMask premask;
  SimilarityMap similarity;  ///< negative-sampling similarity (max over kept maps)
  std::optional<Image> adaptedSupport;
  EdgeMap edges;
};

EdgeMap segmenter_edges(const Image& image, const PipelineConfig& config, Exec exec = Exec::Parallel);

/// Retrieve, adapt, gate and align only; mask and prompts are left empty.
PipelineOutput run_alignment(const Image& query, const FeatureMap& queryFeatures, const SupportDatabase& db,
                             const PipelineConfig& config, Exec exec = Exec::Parallel);

/// Retrieve -> (style adapt) -> gate -> edges + chamfer alignment -> prompts -> segmenter.
/// Stage failures are rethrown as StageError tagged retrieve/adapt/gate/align/prompt/segment.
PipelineOutput run_pipeline(const Image& query, const FeatureMap& queryFeatures, const SupportDatabase& db,
                            const PipelineConfig& config, Segmenter& segmenter, Exec exec = Exec::Parallel);

/// 2|P n G| / (|P| + |G|) * 100; two empty masks score 100.
double dice(const BinaryMask& prediction, const BinaryMask& truth);

struct DatasetCase {
  std::string id;
  std::string classId;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::filesystem::path features;
};

/// Reads {"cases": [{"id", "class", "image", "mask", "features"}, ...]}; paths resolve against
/// the manifest's directory.
std::vector<DatasetCase> load_dataset_manifest(const std::filesystem::path& path);
void write_dataset_manifest(const std::vector<DatasetCase>& cases, const std::filesystem::path& path);

struct CaseScore {
  std::string caseId;
  std::string classId;
  double dice = 0.0;
  std::string retrievedId;
  std::string error;
};

struct EvalReport {
  std::vector<CaseScore> perCase;                          ///< sorted by caseId
  std::vector<std::pair<std::string, double>> perClass;    ///< sorted by class
  double overallMean = 0.0;                                ///< mean over all cases
  bool leaveOneOut = false;
};

std::string report_to_json(const EvalReport& report);

/// Sorts scores by caseId and fills the per-class and overall means.
EvalReport summarize_scores(std::vector<CaseScore> scores, bool leaveOneOut);

/// One-way evaluation: each case queries a database of the other cases of its class
/// (or all of them, itself included, when leaveOneOut is off). Supports the cases in memory.
struct LoadedCase {
  std::string id;
  std::string classId;
  Image image;
  BinaryMask mask;
  FeatureMap features;
};
EvalReport evaluate_cases(const std::vector<LoadedCase>& cases, const PipelineConfig& config, bool leaveOneOut,
                          Exec exec = Exec::Parallel, const std::filesystem::path& traceDir = {});
EvalReport evaluate(const std::filesystem::path& datasetManifest, const PipelineConfig& config, bool leaveOneOut,
                    Exec exec = Exec::Parallel, const std::filesystem::path& traceDir = {});

std::vector<LoadedCase> load_cases(const std::filesystem::path& datasetManifest);

}  // namespace rap
