#include "rap/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "rap/arrayio.hpp"
#include "rap/errors.hpp"
#include "rap/imgproc.hpp"
#include "rap/style.hpp"

namespace rap {
namespace {

using nlohmann::json;

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  } catch (const std::logic_error& e) {
    throw StageError(stage, e.what());
  }
}

BinaryMask rectangle(int h, int w, const Box& b) {
  BinaryMask m(h, w);
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x) m(x, y) = 1;
  return m;
}

json points(const std::vector<Pixel>& pts) {
  json a = json::array();
  for (const Pixel p : pts) a.push_back({p.x, p.y});
  return a;
}

}  // namespace

double dice(const BinaryMask& prediction, const BinaryMask& truth) {
  if (!prediction.same_shape(truth)) throw DimError("dice: masks differ in shape");
  std::size_t p = 0, g = 0, both = 0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const bool a = prediction.data()[i] != 0;
    const bool b = truth.data()[i] != 0;
    p += a;
    g += b;
    both += a && b;
  }
  if (p + g == 0) return 100.0;
  return 200.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

EdgeMap segmenter_edges(const Image& image, const PipelineConfig& config, Exec exec) {
  if (config.segmenterEdges == SegmenterEdges::Gradient) return sobel(image);
  return edge_map(image, config.edge.scales, config.edge.wLog, config.edge.wGrad, exec);
}

PipelineOutput run_alignment(const Image& query, const FeatureMap& queryFeatures, const SupportDatabase& db,
                             const PipelineConfig& config, Exec exec) {
  config.validate();
  validate_image(query);
  const int H = query.height();
  const int W = query.width();
  PipelineOutput out;
  PipelineTrace& trace = out.trace;
  trace.ablation = config.ablation;

  // Retrieve. Rank is clamped to the database size so tiny leave-one-out pools still resolve.
  const SupportRecord& support = in_stage("retrieve", [&]() -> const SupportRecord& {
    if (db.empty()) throw RankError("support database is empty");
    const int rank = std::min<int>(config.retrievalRank, static_cast<int>(db.records.size()));
    const RetrievalResult r = retrieve(db, global_descriptor(queryFeatures), rank, config.useMaskedDescriptor, exec);
    trace.effectiveRank = rank;
    trace.rankedIds = r.rankedIds;
    trace.scores = r.scores;
    trace.retrievedId = r.selected;
    return db.find(r.selected);
  });

  if (config.enableStyleAdapt)
    out.adaptedSupport = in_stage("adapt", [&] { return style_adapt(support.image, query); });

  const BinaryMask supportMask = (support.mask.height() == H && support.mask.width() == W)
                                     ? support.mask
                                     : resize_nearest(support.mask, H, W);

  // Semantic gating. The similarity maps also feed negative sampling, so they are built even
  // when the gate itself is switched off.
  std::vector<int> kept;
  in_stage("gate", [&] {
    const RegionPrototypes protos = cluster_support(support.features, support.mask, config.gating.K, config.seed);
    std::vector<SimilarityMap> maps;
    maps.reserve(protos.prototypes.size());
    for (const Descriptor& p : protos.prototypes) maps.push_back(similarity_map(queryFeatures, p, H, W));
    if (config.ablation.sg) {
      Gate g = compute_gate(maps, protos, config.gating);
      out.gate = std::move(g.mask);
      kept = std::move(g.kept);
    } else {
      out.gate = BinaryMask(H, W, 1);
      kept = top_maps_by_mean(maps, std::min(config.gating.KPrime, static_cast<int>(maps.size())));
    }
    out.similarity = max_similarity(maps, kept);
  });
  trace.gateArea = out.gate.count();

  out.edges = in_stage("align", [&] {
    return edge_map(query, config.edge.scales, config.edge.wLog, config.edge.wGrad, exec);
  });

  in_stage("align", [&] {
    if (!config.ablation.ocm) {
      out.premask = supportMask;
      return;
    }
    const EdgePixelSet edgePixels = binarize_edges(out.edges, config.edge.keepFraction);
    const DirectionalDistanceField fields = directional_distance_transforms(edgePixels, H, W, config.binCount, exec);
    const BoundaryTemplate tmpl = extract_boundary_template(supportMask, config.templatePointCount);
    trace.search = search_transform(tmpl, fields, out.gate, config.search, exec);
    try {
      Premask pm = build_premask_detailed(supportMask, trace.search->transform, out.gate, H, W);
      out.premask = std::move(pm.mask);
      trace.gateBypassed = pm.gateBypassed;
    } catch (const EmptyPremaskError&) {
      out.premask = rectangle(H, W, bounding_box(out.gate));
      trace.premaskFallback = true;
    }
  });
  trace.premaskArea = out.premask.count();
  return out;
}

PipelineOutput run_pipeline(const Image& query, const FeatureMap& queryFeatures, const SupportDatabase& db,
                            const PipelineConfig& config, Segmenter& segmenter, Exec exec) {
  PipelineOutput out = run_alignment(query, queryFeatures, db, config, exec);
  PipelineTrace& trace = out.trace;
  const int H = query.height();
  const int W = query.width();

  trace.prompts = in_stage("prompt", [&] {
    PromptSet ps = build_prompt_set(out.premask, out.similarity, config.prompt);
    if (!config.ablation.vp) ps.positives = fps_seeds(out.premask, 1).seeds;
    return ps;
  });

  const SegmenterResult seg = in_stage("segment", [&] {
    const EdgeMap edges = config.segmenterEdges == SegmenterEdges::Combined ? out.edges : sobel(query);
    return segmenter.segment({query, trace.prompts}, edges);
  });
  if (!seg.mask.same_shape(H, W)) throw StageError("segment", "segmenter returned a mask of the wrong size");
  out.mask = seg.mask;
  trace.confidence = seg.confidence;
  return out;
}

std::string trace_to_json(const PipelineTrace& t) {
  json j;
  j["version"] = kTraceVersion;
  j["retrieved_id"] = t.retrievedId;
  j["effective_rank"] = t.effectiveRank;
  j["ranked_ids"] = t.rankedIds;
  j["scores"] = t.scores;
  if (t.search) {
    const Transform2D& x = t.search->transform;
    j["transform"] = {{"tx", x.tx}, {"ty", x.ty}, {"scale", x.scale}, {"rotation", x.rotation},
                      {"cost", t.search->cost}};
  } else {
    j["transform"] = nullptr;
  }
  j["gate_area"] = t.gateArea;
  j["premask_area"] = t.premaskArea;
  j["gate_bypassed"] = t.gateBypassed;
  j["premask_fallback"] = t.premaskFallback;
  const Box& b = t.prompts.bbox;
  j["prompts"] = {{"positives", points(t.prompts.positives)},
                  {"negatives", points(t.prompts.negatives)},
                  {"bbox", {b.x0, b.y0, b.x1, b.y1}},
                  {"warnings", t.prompts.warnings}};
  j["confidence"] = t.confidence;
  j["ablation"] = {{"ocm", t.ablation.ocm}, {"sg", t.ablation.sg}, {"vp", t.ablation.vp}};
  return j.dump(2);
}

// --- dataset + evaluation ----------------------------------------------------------

std::vector<DatasetCase> load_dataset_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array())
    throw ManifestError("manifest: expected an object with a 'cases' array");
  const auto base = path.parent_path();
  std::vector<DatasetCase> cases;
  for (const auto& c : j["cases"]) {
    if (!c.is_object()) throw ManifestError("manifest: case entries must be objects");
    for (const char* key : {"id", "class", "image", "mask", "features"})
      if (!c.contains(key) || !c[key].is_string())
        throw ManifestError(std::string("manifest: case is missing string field '") + key + "'");
    cases.push_back({c["id"].get<std::string>(), c["class"].get<std::string>(), base / c["image"].get<std::string>(),
                     base / c["mask"].get<std::string>(), base / c["features"].get<std::string>()});
  }
  std::vector<std::string> ids;
  for (const auto& c : cases) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ManifestError("manifest: duplicate case id");
  return cases;
}

void write_dataset_manifest(const std::vector<DatasetCase>& cases, const std::filesystem::path& path) {
  const auto base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) { return p.lexically_relative(base).generic_string(); };
  json arr = json::array();
  for (const auto& c : cases)
    arr.push_back({{"id", c.id}, {"class", c.classId}, {"image", rel(c.image)}, {"mask", rel(c.mask)},
                   {"features", rel(c.features)}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json{{"cases", arr}}.dump(2) << '\n';
}

std::vector<LoadedCase> load_cases(const std::filesystem::path& datasetManifest) {
  const auto entries = load_dataset_manifest(datasetManifest);
  if (entries.size() < 2) throw ManifestError("manifest: at least two cases are required");
  std::vector<LoadedCase> cases;
  for (const auto& e : entries) {
    try {
      cases.push_back({e.id, e.classId, read_image_any(e.image), read_mask(e.mask), read_features(e.features)});
    } catch (const Error& err) {
      throw ManifestError("case '" + e.id + "': " + err.what());
    }
    const auto& c = cases.back();
    if (!c.mask.same_shape(c.image)) throw ManifestError("case '" + e.id + "': mask and image differ in shape");
  }
  return cases;
}

EvalReport summarize_scores(std::vector<CaseScore> scores, bool leaveOneOut) {
  EvalReport report;
  report.leaveOneOut = leaveOneOut;
  report.perCase = std::move(scores);
  if (report.perCase.empty()) return report;
  std::sort(report.perCase.begin(), report.perCase.end(),
            [](const CaseScore& a, const CaseScore& b) { return a.caseId < b.caseId; });
  std::map<std::string, std::pair<double, int>> byClass;
  double total = 0.0;
  for (const auto& s : report.perCase) {
    auto& [sum, count] = byClass[s.classId];
    sum += s.dice;
    ++count;
    total += s.dice;
  }
  for (const auto& [cls, acc] : byClass) report.perClass.emplace_back(cls, acc.first / acc.second);
  report.overallMean = total / static_cast<double>(report.perCase.size());
  return report;
}

EvalReport evaluate_cases(const std::vector<LoadedCase>& cases, const PipelineConfig& config, bool leaveOneOut,
                          Exec exec, const std::filesystem::path& traceDir) {
  config.validate();
  if (cases.size() < 2) throw ManifestError("evaluation needs at least two cases");
  if (!traceDir.empty()) std::filesystem::create_directories(traceDir);

  std::vector<SupportRecord> records;
  records.reserve(cases.size());
  for (const auto& c : cases) records.push_back(make_support_record(c.id, c.image, c.mask, c.features));

  EvalReport report;
  report.leaveOneOut = leaveOneOut;
  report.perCase.resize(cases.size());
  const auto n = static_cast<std::ptrdiff_t>(cases.size());

  // Cases run concurrently; nested regions inside a case fall back to a single thread.
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const LoadedCase& c = cases[static_cast<std::size_t>(i)];
    CaseScore& score = report.perCase[static_cast<std::size_t>(i)];
    score.caseId = c.id;
    score.classId = c.classId;
    SupportDatabase db;
    for (std::size_t j = 0; j < cases.size(); ++j) {
      if (cases[j].classId != c.classId) continue;
      if (leaveOneOut && static_cast<std::ptrdiff_t>(j) == i) continue;
      db.add(records[j]);
    }
    try {
      FallbackSegmenter seg;
      const PipelineOutput res = run_pipeline(c.image, c.features, db, config, seg, exec);
      score.dice = dice(res.mask, c.mask);
      score.retrievedId = res.trace.retrievedId;
      if (!traceDir.empty()) {
        std::ofstream t(traceDir / (c.id + ".json"));
        t << trace_to_json(res.trace) << '\n';
      }
    } catch (const Error& e) {
      score.dice = 0.0;
      score.error = e.what();
    }
  }

  return summarize_scores(std::move(report.perCase), leaveOneOut);
}

EvalReport evaluate(const std::filesystem::path& datasetManifest, const PipelineConfig& config, bool leaveOneOut,
                    Exec exec, const std::filesystem::path& traceDir) {
  return evaluate_cases(load_cases(datasetManifest), config, leaveOneOut, exec, traceDir);
}

std::string report_to_json(const EvalReport& r) {
  json cases = json::array();
  for (const auto& s : r.perCase) {
    json c = {{"id", s.caseId}, {"class", s.classId}, {"dice", s.dice}, {"retrieved", s.retrievedId}};
    if (!s.error.empty()) c["error"] = s.error;
    cases.push_back(std::move(c));
  }
  json perClass = json::object();
  for (const auto& [cls, mean] : r.perClass) perClass[cls] = mean;
  json j = {{"version", kTraceVersion},
            {"leave_one_out", r.leaveOneOut},
            {"cases", cases},
            {"per_class", perClass},
            {"overall_mean", r.overallMean}};
  return j.dump(2);
}

}  // namespace rap
