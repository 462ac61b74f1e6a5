#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rap/types.hpp"

namespace rap {

struct SupportRecord {
  std::string id;
  Image image;
  BinaryMask mask;
  FeatureMap features;
  Descriptor descriptor;
  Descriptor maskedDescriptor;
};

struct SupportDatabase {
  std::vector<SupportRecord> records;
  int featureDim = 0;

  bool empty() const noexcept { return records.empty(); }
  const SupportRecord& find(const std::string& id) const;
  /// Appends a record; throws DimError on feature-dim mismatch and DataError on a duplicate id.
  void add(SupportRecord record);
};

struct RetrievalResult {
  std::vector<std::string> rankedIds;
  std::vector<double> scores;
  std::string selected;
};

/// Per-channel mean over all grid cells.
Descriptor global_descriptor(const FeatureMap& features);

/// Mean over grid cells whose block-majority vote of `mask` is foreground;
/// falls back to the global descriptor when no cell votes foreground.
Descriptor masked_descriptor(const FeatureMap& features, const BinaryMask& mask);

/// a.b / (|a||b|); 0 when either norm is below 1e-12.
double cosine_similarity(const Descriptor& a, const Descriptor& b);
double cosine_similarity(std::span<const float> a, std::span<const double> b, double normB);

/// Builds a record and its descriptors after checking the record invariants.
SupportRecord make_support_record(std::string id, Image image, BinaryMask mask, FeatureMap features);

/// Ranks every record by cosine similarity (ties by ascending id) and selects rank `rank` (1-based).
RetrievalResult retrieve(const SupportDatabase& db, const Descriptor& query, int rank, bool useMasked,
                         Exec exec = Exec::Parallel);

/// Writes one RAF per image/mask/feature map plus db.json.
void save_database(const SupportDatabase& db, const std::filesystem::path& dir);
SupportDatabase load_database(const std::filesystem::path& dir);

}  // namespace rap
