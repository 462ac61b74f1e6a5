#include "rap/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "rap/arrayio.hpp"
#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {
namespace {

constexpr double kNormFloor = 1e-12;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

const SupportRecord& SupportDatabase::find(const std::string& id) const {
  for (const auto& r : records)
    if (r.id == id) return r;
  throw Error("no support record with id '" + id + "'");
}

void SupportDatabase::add(SupportRecord record) {
  if (records.empty() && featureDim == 0) featureDim = static_cast<int>(record.descriptor.dim());
  if (static_cast<int>(record.descriptor.dim()) != featureDim ||
      record.maskedDescriptor.dim() != record.descriptor.dim())
    throw DimError("record '" + record.id + "' has feature dim " +
                   std::to_string(record.descriptor.dim()) + ", database expects " +
                   std::to_string(featureDim));
  for (const auto& r : records)
    if (r.id == record.id) throw DataError("duplicate support id '" + record.id + "'");
  records.push_back(std::move(record));
}

Descriptor global_descriptor(const FeatureMap& features) {
  Descriptor out{std::vector<double>(static_cast<std::size_t>(features.dim()), 0.0)};
  for (int gy = 0; gy < features.grid_height(); ++gy)
    for (int gx = 0; gx < features.grid_width(); ++gx) {
      const auto cell = features.cell(gx, gy);
      for (std::size_t c = 0; c < cell.size(); ++c) out.values[c] += cell[c];
    }
  const double n = static_cast<double>(features.cells());
  for (auto& v : out.values) v /= n;
  return out;
}

Descriptor masked_descriptor(const FeatureMap& features, const BinaryMask& mask) {
  if (!mask.any()) throw EmptyMaskError("masked descriptor needs a non-empty mask");
  const BinaryMask votes = block_majority(mask, features.grid_height(), features.grid_width());
  Descriptor out{std::vector<double>(static_cast<std::size_t>(features.dim()), 0.0)};
  std::size_t n = 0;
  for (int gy = 0; gy < features.grid_height(); ++gy)
    for (int gx = 0; gx < features.grid_width(); ++gx) {
      if (!votes(gx, gy)) continue;
      const auto cell = features.cell(gx, gy);
      for (std::size_t c = 0; c < cell.size(); ++c) out.values[c] += cell[c];
      ++n;
    }
  if (n == 0) return global_descriptor(features);
  for (auto& v : out.values) v /= static_cast<double>(n);
  return out;
}

double cosine_similarity(const Descriptor& a, const Descriptor& b) {
  if (a.dim() != b.dim())
    throw DimError("descriptor dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  const double na = norm(a.values);
  const double nb = norm(b.values);
  if (na < kNormFloor || nb < kNormFloor) return 0.0;
  const double dot = std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0);
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double cosine_similarity(std::span<const float> a, std::span<const double> b, double normB) {
  double dot = 0.0;
  double na = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += double(a[i]) * a[i];
  }
  na = std::sqrt(na);
  if (na < kNormFloor || normB < kNormFloor) return 0.0;
  return std::clamp(dot / (na * normB), -1.0, 1.0);
}

SupportRecord make_support_record(std::string id, Image image, BinaryMask mask, FeatureMap features) {
  if (!image.same_shape(mask))
    throw DimError("support '" + id + "': image and mask dimensions differ");
  if (!mask.any()) throw EmptyMaskError("support '" + id + "' has an empty mask");
  if (features.dim() < 1) throw DataError("support '" + id + "': feature map has no channels");
  SupportRecord r;
  r.descriptor = global_descriptor(features);
  r.maskedDescriptor = masked_descriptor(features, mask);
  r.id = std::move(id);
  r.image = std::move(image);
  r.mask = std::move(mask);
  r.features = std::move(features);
  return r;
}

RetrievalResult retrieve(const SupportDatabase& db, const Descriptor& query, int rank, bool useMasked,
                         Exec exec) {
  if (db.empty()) throw RankError("support database is empty");
  const auto n = static_cast<int>(db.records.size());
  if (rank < 1 || rank > n)
    throw RankError("rank " + std::to_string(rank) + " outside 1.." + std::to_string(n));

  std::vector<double> scores(static_cast<std::size_t>(n));
  for (const auto& r : db.records)
    if ((useMasked ? r.maskedDescriptor : r.descriptor).dim() != query.dim())
      throw DimError("query descriptor dim does not match record '" + r.id + "'");
#pragma omp parallel for if (exec == Exec::Parallel) schedule(static)
  for (int i = 0; i < n; ++i) {
    const auto& r = db.records[static_cast<std::size_t>(i)];
    scores[static_cast<std::size_t>(i)] = cosine_similarity(useMasked ? r.maskedDescriptor : r.descriptor, query);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return db.records[a].id < db.records[b].id;
  });

  RetrievalResult out;
  for (int i : order) {
    out.rankedIds.push_back(db.records[static_cast<std::size_t>(i)].id);
    out.scores.push_back(scores[static_cast<std::size_t>(i)]);
  }
  out.selected = out.rankedIds[static_cast<std::size_t>(rank - 1)];
  return out;
}

void save_database(const SupportDatabase& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["feature_dim"] = db.featureDim;
  manifest["records"] = nlohmann::json::array();
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    const std::string stem = "rec" + std::to_string(i);
    write_array(r.image, dir / (stem + "_image.raf"));
    write_array(r.mask, dir / (stem + "_mask.raf"));
    write_array(r.features, dir / (stem + "_features.raf"));
    manifest["records"].push_back({{"id", r.id},
                                   {"image", stem + "_image.raf"},
                                   {"mask", stem + "_mask.raf"},
                                   {"features", stem + "_features.raf"}});
  }
  std::ofstream out(dir / "db.json");
  if (!out) throw IoError("cannot write " + (dir / "db.json").string());
  out << manifest.dump(2) << '\n';
}

SupportDatabase load_database(const std::filesystem::path& dir) {
  std::ifstream in(dir / "db.json");
  if (!in) throw IoError("cannot open " + (dir / "db.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("db.json: ") + e.what());
  }
  if (!manifest.contains("records") || !manifest["records"].is_array())
    throw ManifestError("db.json: missing records array");
  SupportDatabase db;
  db.featureDim = manifest.value("feature_dim", 0);
  for (const auto& entry : manifest["records"]) {
    for (const char* key : {"id", "image", "mask", "features"})
      if (!entry.contains(key) || !entry[key].is_string())
        throw ManifestError(std::string("db.json: record missing '") + key + "'");
    db.add(make_support_record(entry["id"].get<std::string>(),
                               read_image_any(dir / entry["image"].get<std::string>()),
                               read_mask(dir / entry["mask"].get<std::string>()),
                               read_features(dir / entry["features"].get<std::string>())));
  }
  return db;
}

}  // namespace rap
