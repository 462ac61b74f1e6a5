#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "rap/errors.hpp"
#include "rap/pipeline.hpp"
#include "rap/synth.hpp"

using namespace rap;
using rap::testing::TempDir;

namespace {

const std::vector<LoadedCase>& synth_cases() {
  static const std::vector<LoadedCase> cases = generate_synthetic(6, 7);
  return cases;
}

SupportDatabase db_of(std::initializer_list<std::size_t> idx) {
  SupportDatabase db;
  for (std::size_t i : idx) {
    const auto& c = synth_cases()[i];
    db.add(make_support_record(c.id, c.image, c.mask, c.features));
  }
  return db;
}

}  // namespace

TEST(Dice, HandFixture) {
  const BinaryMask a = rap::testing::rect(10, 10, 0, 0, 9, 4);  // top half
  EXPECT_DOUBLE_EQ(dice(a, a), 100.0);
  EXPECT_DOUBLE_EQ(dice(a, rap::testing::rect(10, 10, 0, 5, 9, 9)), 0.0);
  // 50 vs 100 pixels, 50 shared: 2*50/150.
  EXPECT_NEAR(dice(a, BinaryMask(10, 10, 1)), 66.67, 0.01);
  EXPECT_DOUBLE_EQ(dice(BinaryMask(4, 4), BinaryMask(4, 4)), 100.0);
  EXPECT_THROW(dice(a, BinaryMask(10, 9)), DimError);
}

TEST(Dice, Symmetric) {
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    const BinaryMask p = rap::testing::random_blob(rng, 40, 30, 12);
    const BinaryMask g = rap::testing::random_blob(rng, 40, 30, 12);
    EXPECT_DOUBLE_EQ(dice(p, g), dice(g, p));
  }
}

TEST(Dice, ThreeCaseReportFixture) {
  using rap::testing::rect;
  // (prediction, truth): 50 in 100 -> 66.67; 4 in 6 -> 80; two 3x3 squares sharing 4 -> 44.44.
  std::vector<CaseScore> scores = {
      {"c", "y", dice(rect(10, 10, 0, 0, 2, 2), rect(10, 10, 1, 1, 3, 3)), "", ""},
      {"a", "x", dice(rect(10, 10, 0, 0, 4, 9), BinaryMask(10, 10, 1)), "", ""},
      {"b", "x", dice(rect(10, 10, 0, 0, 1, 1), rect(10, 10, 0, 0, 2, 1)), "", ""},
  };
  const EvalReport r = summarize_scores(scores, true);
  ASSERT_EQ(r.perCase.size(), 3u);
  EXPECT_EQ(r.perCase[0].caseId, "a");
  EXPECT_NEAR(r.perCase[0].dice, 66.67, 0.01);
  EXPECT_NEAR(r.perCase[1].dice, 80.00, 0.01);
  EXPECT_NEAR(r.perCase[2].dice, 44.44, 0.01);
  ASSERT_EQ(r.perClass.size(), 2u);
  EXPECT_NEAR(r.perClass[0].second, 73.33, 0.01);
  EXPECT_NEAR(r.perClass[1].second, 44.44, 0.01);
  EXPECT_NEAR(r.overallMean, 63.70, 0.01);
}

TEST(Config, DumpParseRoundTrip) {
  PipelineConfig c;
  c.retrievalRank = 3;
  c.edge.scales = {1.5, 3};
  c.search.rotations = {-10, 0, 10};
  c.ablation.sg = false;
  c.seed = 42;
  const PipelineConfig back = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.retrievalRank, 3);
  EXPECT_FALSE(back.ablation.sg);
}

TEST(Config, CommentsAndFlags) {
  const PipelineConfig c = parse_config("# all stages\n  ablation.vp = off  # trailing\n\nprompt.nv=4\n");
  EXPECT_FALSE(c.ablation.vp);
  EXPECT_EQ(c.prompt.Nv, 4);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("nope = 1"), ConfigError);
  EXPECT_THROW(parse_config("retrieval.rank"), ConfigError);
  EXPECT_THROW(parse_config("retrieval.rank = two"), ConfigError);
  EXPECT_THROW(parse_config("retrieval.rank = 0"), ConfigError);
  EXPECT_THROW(parse_config("ablation.ocm = maybe"), ConfigError);
  EXPECT_THROW(parse_config("edge.keep_fraction = 1"), ConfigError);
  EXPECT_THROW(parse_config("seed = -1"), ConfigError);
  EXPECT_THROW(parse_config("segment.edges = sharp"), ConfigError);
  EXPECT_EQ(parse_config("segment.edges = combined").segmenterEdges, SegmenterEdges::Combined);
  EXPECT_THROW(load_config("/nonexistent/rap.cfg"), IoError);
}

TEST(Pipeline, EmptyDatabaseFailsAtRetrieve) {
  const auto& c = synth_cases()[0];
  FallbackSegmenter seg;
  try {
    run_pipeline(c.image, c.features, SupportDatabase{}, PipelineConfig{}, seg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "retrieve");
  }
}

TEST(Pipeline, SelfSupportAlignsToIdentity) {
  const auto& c = synth_cases()[0];
  FallbackSegmenter seg;
  PipelineConfig cfg;
  cfg.retrievalRank = 1;
  const PipelineOutput out = run_pipeline(c.image, c.features, db_of({0}), cfg, seg);
  EXPECT_EQ(out.trace.retrievedId, c.id);
  ASSERT_TRUE(out.trace.search.has_value());
  EXPECT_DOUBLE_EQ(out.trace.search->transform.scale, 1.0);
  EXPECT_DOUBLE_EQ(out.trace.search->transform.rotation, 0.0);
  EXPECT_GE(dice(out.premask, c.mask), 95.0);
  EXPECT_GE(dice(out.mask, c.mask), 95.0);
  EXPECT_TRUE(prompt_violations(out.trace.prompts, out.premask).empty());
}

TEST(Pipeline, RankClampsToDatabaseSize) {
  const auto& c = synth_cases()[0];
  FallbackSegmenter seg;
  PipelineConfig cfg;
  cfg.retrievalRank = 5;
  const PipelineOutput out = run_pipeline(c.image, c.features, db_of({2, 4}), cfg, seg);
  EXPECT_EQ(out.trace.effectiveRank, 2);
  EXPECT_EQ(out.trace.retrievedId, out.trace.rankedIds[1]);
}

TEST(Pipeline, AblationSwitches) {
  const auto& c = synth_cases()[1];
  FallbackSegmenter seg;
  PipelineConfig cfg;
  cfg.ablation = {false, false, false};
  const PipelineOutput out = run_pipeline(c.image, c.features, db_of({3, 5}), cfg, seg);
  EXPECT_FALSE(out.trace.search.has_value());
  EXPECT_EQ(out.trace.gateArea, c.image.size());
  EXPECT_EQ(out.trace.prompts.positives.size(), 1u);
  EXPECT_EQ(out.mask.height(), c.image.height());
  EXPECT_FALSE(out.trace.ablation.ocm);
}

TEST(Pipeline, SerialAndParallelAgree) {
  const auto& c = synth_cases()[2];
  FallbackSegmenter seg;
  const SupportDatabase db = db_of({0, 4});
  const PipelineOutput a = run_pipeline(c.image, c.features, db, PipelineConfig{}, seg, Exec::Serial);
  const PipelineOutput b = run_pipeline(c.image, c.features, db, PipelineConfig{}, seg, Exec::Parallel);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(trace_to_json(a.trace), trace_to_json(b.trace));
}

TEST(Pipeline, TraceJsonIsVersioned) {
  const auto& c = synth_cases()[0];
  FallbackSegmenter seg;
  const PipelineOutput out = run_pipeline(c.image, c.features, db_of({2, 4}), PipelineConfig{}, seg);
  const std::string j = trace_to_json(out.trace);
  EXPECT_NE(j.find("\"version\": 1"), std::string::npos);
  EXPECT_NE(j.find("\"retrieved_id\""), std::string::npos);
}

TEST(Evaluate, IdenticalPairUnderLeaveOneOut) {
  LoadedCase a = synth_cases()[0];
  LoadedCase b = a;
  a.id = "a";
  b.id = "b";
  const EvalReport r = evaluate_cases({a, b}, PipelineConfig{}, true);
  ASSERT_EQ(r.perCase.size(), 2u);
  EXPECT_EQ(r.perCase[0].retrievedId, "b");
  EXPECT_EQ(r.perCase[1].retrievedId, "a");
  for (const auto& s : r.perCase) EXPECT_GE(s.dice, 95.0) << s.caseId;
  EXPECT_GE(r.overallMean, 95.0);
}

TEST(Evaluate, LeaveOneOutNeverRetrievesItself) {
  const EvalReport r = evaluate_cases(synth_cases(), PipelineConfig{}, true);
  ASSERT_EQ(r.perCase.size(), 6u);
  double total = 0.0;
  for (const auto& s : r.perCase) {
    EXPECT_TRUE(s.error.empty()) << s.error;
    EXPECT_NE(s.retrievedId, s.caseId);
    total += s.dice;
  }
  EXPECT_NEAR(r.overallMean, total / 6.0, 1e-12);
  ASSERT_EQ(r.perClass.size(), 2u);
  EXPECT_EQ(r.perClass[0].first, "organ0");
}

TEST(Evaluate, ReportsAreByteIdentical) {
  TempDir t1("trace"), t2("trace");
  const std::string a = report_to_json(evaluate_cases(synth_cases(), PipelineConfig{}, true, Exec::Parallel, t1.path()));
  const std::string b = report_to_json(evaluate_cases(synth_cases(), PipelineConfig{}, true, Exec::Serial, t2.path()));
  EXPECT_EQ(a, b);
  for (const auto& c : synth_cases()) {
    std::ifstream f1(t1 / (c.id + ".json")), f2(t2 / (c.id + ".json"));
    const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
    EXPECT_FALSE(s1.empty());
    EXPECT_EQ(s1, s2);
  }
}

TEST(Evaluate, StageFailureScoresZero) {
  std::vector<LoadedCase> cases(synth_cases().begin(), synth_cases().begin() + 2);
  cases[1].classId = "lonely";  // no other case of its class: empty database
  const EvalReport r = evaluate_cases(cases, PipelineConfig{}, true);
  const auto& lonely = r.perCase[1];
  EXPECT_EQ(lonely.dice, 0.0);
  EXPECT_NE(lonely.error.find("[retrieve]"), std::string::npos);
}

TEST(Dataset, SynthRoundTrip) {
  TempDir dir("synth");
  const auto manifest = write_synthetic(synth_cases(), dir.path());
  const auto loaded = load_cases(manifest);
  ASSERT_EQ(loaded.size(), synth_cases().size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].id, synth_cases()[i].id);
    EXPECT_EQ(loaded[i].classId, synth_cases()[i].classId);
    EXPECT_EQ(loaded[i].image, synth_cases()[i].image);
    EXPECT_EQ(loaded[i].mask, synth_cases()[i].mask);
    EXPECT_EQ(loaded[i].features, synth_cases()[i].features);
  }
}

TEST(Dataset, SynthIsSeeded) {
  const auto a = generate_synthetic(2, 11);
  const auto b = generate_synthetic(2, 11);
  const auto c = generate_synthetic(2, 12);
  EXPECT_EQ(a[0].image, b[0].image);
  EXPECT_EQ(a[1].features, b[1].features);
  EXPECT_NE(a[0].image, c[0].image);
  EXPECT_EQ(a[0].id, "case00");
}

TEST(Dataset, ManifestErrors) {
  TempDir dir("manifest");
  auto write = [&](const std::string& body) {
    std::ofstream(dir / "m.json") << body;
    return dir / "m.json";
  };
  EXPECT_THROW(load_dataset_manifest(dir / "missing.json"), ManifestError);
  EXPECT_THROW(load_dataset_manifest(write("{not json")), ManifestError);
  EXPECT_THROW(load_dataset_manifest(write(R"({"items": []})")), ManifestError);
  EXPECT_THROW(load_dataset_manifest(write(R"({"cases": [{"id": "a", "class": "c", "image": "i"}]})")),
               ManifestError);
  const std::string entry = R"({"id": "a", "class": "c", "image": "i.raf", "mask": "m.raf", "features": "f.raf"})";
  EXPECT_THROW(load_dataset_manifest(write("{\"cases\": [" + entry + "," + entry + "]}")), ManifestError);
  EXPECT_EQ(load_dataset_manifest(write("{\"cases\": [" + entry + "]}")).size(), 1u);
  EXPECT_THROW(load_cases(dir / "m.json"), ManifestError);  // one case only

  const auto manifest = write_synthetic(synth_cases(), dir / "ds");
  std::filesystem::remove(dir / "ds" / "case01_mask.raf");
  EXPECT_THROW(load_cases(manifest), ManifestError);
}
