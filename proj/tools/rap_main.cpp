#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "rap/arrayio.hpp"
#include "rap/errors.hpp"
#include "rap/pipeline.hpp"
#include "rap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitStage = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path with_suffix(const fs::path& p, const std::string& tail) {
  return p.parent_path() / (p.stem().string() + tail);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rap::IoError("cannot write " + path.string());
  out << text << '\n';
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

rap::PipelineConfig config_from(const std::string& path) {
  return path.empty() ? rap::PipelineConfig{} : rap::load_config(path);
}

rap::Grid<std::uint8_t> to_gray(const rap::BinaryMask& m) {
  rap::Grid<std::uint8_t> g(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) g.data()[i] = m.data()[i] ? 255 : 0;
  return g;
}

rap::Grid<std::uint8_t> to_gray(const rap::ScalarGrid& s) {
  rap::Grid<std::uint8_t> g(s.height(), s.width());
  double hi = 0.0;
  for (double v : s.data()) hi = std::max(hi, v);
  for (std::size_t i = 0; i < s.size(); ++i)
    g.data()[i] = hi > 0.0 ? static_cast<std::uint8_t>(std::clamp(s.data()[i] / hi, 0.0, 1.0) * 255.0 + 0.5) : 0;
  return g;
}

json transform_json(const rap::PipelineTrace& t) {
  if (!t.search) return nullptr;
  const auto& x = t.search->transform;
  return {{"tx", x.tx}, {"ty", x.ty}, {"scale", x.scale}, {"rotation", x.rotation}, {"cost", t.search->cost}};
}

// ---- subcommands ----

struct BuildDbArgs {
  std::string manifest, out, classId;
  bool json = false;
};

int cmd_build_db(const BuildDbArgs& a) {
  require_file(a.manifest, "manifest");
  const auto cases = rap::load_cases(a.manifest);
  rap::SupportDatabase db;
  for (const auto& c : cases)
    if (a.classId.empty() || c.classId == a.classId) db.add(rap::make_support_record(c.id, c.image, c.mask, c.features));
  if (db.empty()) throw rap::ManifestError("no cases match class '" + a.classId + "'");
  rap::save_database(db, a.out);
  if (a.json)
    std::cout << json{{"records", db.records.size()}, {"feature_dim", db.featureDim}, {"out", a.out}}.dump() << '\n';
  else
    std::cout << "wrote " << db.records.size() << " records to " << a.out << '\n';
  return 0;
}

struct RetrieveArgs {
  std::string db, query, config;
  int rank = 0;
  bool json = false;
};

int cmd_retrieve(const RetrieveArgs& a) {
  require_file(a.query, "query features");
  const rap::PipelineConfig cfg = config_from(a.config);
  const rap::SupportDatabase db = rap::load_database(a.db);
  const int rank = a.rank > 0 ? a.rank : cfg.retrievalRank;
  const auto r = rap::retrieve(db, rap::global_descriptor(rap::read_features(a.query)), rank, cfg.useMaskedDescriptor);
  if (a.json) {
    std::cout << json{{"selected", r.selected}, {"rank", rank}, {"ranked_ids", r.rankedIds}, {"scores", r.scores}}.dump()
              << '\n';
  } else {
    for (std::size_t i = 0; i < r.rankedIds.size(); ++i)
      std::printf("%3zu  %-24s %.6f%s\n", i + 1, r.rankedIds[i].c_str(), r.scores[i],
                  r.rankedIds[i] == r.selected ? "  <- selected" : "");
  }
  return 0;
}

struct AdaptArgs {
  std::string db, query, features, out, config, dumpEdges;
  bool json = false;
};

int cmd_adapt(const AdaptArgs& a) {
  require_file(a.query, "query image");
  require_file(a.features, "query features");
  const rap::PipelineConfig cfg = config_from(a.config);
  const rap::SupportDatabase db = rap::load_database(a.db);
  const rap::Image query = rap::read_image_any(a.query);
  const rap::PipelineOutput res = rap::run_alignment(query, rap::read_features(a.features), db, cfg);

  const fs::path out(a.out);
  rap::write_array(res.premask, out);
  rap::write_png(to_gray(res.premask), with_suffix(out, ".png"));
  rap::write_array(res.similarity, with_suffix(out, "_similarity.raf"));
  rap::write_array(res.gate, with_suffix(out, "_gate.raf"));
  const json t = transform_json(res.trace);
  write_text(with_suffix(out, "_transform.json"), t.dump(2));
  if (!a.dumpEdges.empty()) {
    fs::create_directories(a.dumpEdges);
    rap::write_array(res.edges.strength, fs::path(a.dumpEdges) / "edge_strength.raf");
    rap::write_png(to_gray(res.edges.strength), fs::path(a.dumpEdges) / "edge_strength.png");
  }
  if (a.json) {
    std::cout << json{{"transform", t},
                      {"retrieved", res.trace.retrievedId},
                      {"premask_area", res.trace.premaskArea},
                      {"gate_area", res.trace.gateArea},
                      {"gate_bypassed", res.trace.gateBypassed},
                      {"premask_fallback", res.trace.premaskFallback}}
                     .dump()
              << '\n';
  } else {
    std::cout << "support " << res.trace.retrievedId << ", transform " << t.dump() << ", premask "
              << res.trace.premaskArea << " px -> " << a.out << '\n';
  }
  return 0;
}

struct PromptArgs {
  std::string premask, similarity, out, image, config;
  bool json = false;
};

int cmd_prompt(const PromptArgs& a) {
  require_file(a.premask, "premask");
  require_file(a.similarity, "similarity");
  const rap::PipelineConfig cfg = config_from(a.config);
  const rap::BinaryMask premask = rap::read_mask(a.premask);
  const rap::ScalarGrid sim = rap::read_grid(a.similarity);
  rap::PromptSet ps = rap::build_prompt_set(premask, sim, cfg.prompt);
  if (!cfg.ablation.vp) ps.positives = rap::fps_seeds(premask, 1).seeds;
  rap::write_prompt_file(ps, a.image, a.out);
  for (const auto& w : ps.warnings) std::cerr << "warning: " << w << '\n';
  if (a.json)
    std::cout << rap::prompt_to_json(ps, a.image) << '\n';
  else
    std::cout << ps.positives.size() << " positives, " << ps.negatives.size() << " negatives -> " << a.out << '\n';
  return 0;
}

struct SegmentArgs {
  std::string image, prompts, backend = "fallback", adapterDir, adapterCmd, out, config;
  bool json = false;
};

int cmd_segment(const SegmentArgs& a) {
  if (a.backend == "adapter" && a.adapterDir.empty()) throw UsageError("--backend adapter requires --adapter-dir");
  require_file(a.image, "image");
  require_file(a.prompts, "prompts");
  const rap::PipelineConfig cfg = config_from(a.config);
  const rap::Image image = rap::read_image_any(a.image);
  const rap::PromptSet ps = rap::read_prompt_file(a.prompts);
  const rap::EdgeMap edges = rap::segmenter_edges(image, cfg);
  rap::SegmenterResult r;
  if (a.backend == "adapter") {
    rap::AdapterSegmenter seg(a.adapterDir, a.adapterCmd);
    r = seg.segment({image, ps}, edges);
    if (!r.mask.same_shape(image)) throw rap::DimError("adapter mask does not match the image");
  } else {
    rap::FallbackSegmenter seg;
    r = seg.segment({image, ps}, edges);
  }
  const fs::path out = a.out.empty() ? with_suffix(fs::path(a.prompts), "_mask.raf") : fs::path(a.out);
  rap::write_array(r.mask, out);
  rap::write_png(to_gray(r.mask), with_suffix(out, ".png"));
  if (a.json)
    std::cout << json{{"mask", out.string()}, {"area", r.mask.count()}, {"confidence", r.confidence},
                      {"backend", a.backend}}
                     .dump()
              << '\n';
  else
    std::cout << "mask " << r.mask.count() << " px, confidence " << r.confidence << " -> " << out.string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string manifest, config, out, traces;
  bool loo = false, json = false, serial = false;
};

int cmd_eval(const EvalArgs& a) {
  require_file(a.manifest, "manifest");
  if (!a.config.empty()) require_file(a.config, "config");
  const rap::PipelineConfig cfg = config_from(a.config);
  const rap::EvalReport r =
      rap::evaluate(a.manifest, cfg, a.loo, a.serial ? rap::Exec::Serial : rap::Exec::Parallel, a.traces);
  const std::string text = rap::report_to_json(r);
  if (!a.out.empty()) write_text(a.out, text);
  if (a.json) {
    std::cout << text << '\n';
  } else {
    for (const auto& s : r.perCase)
      std::printf("%-12s %-10s %7.2f  %s%s\n", s.caseId.c_str(), s.classId.c_str(), s.dice, s.retrievedId.c_str(),
                  s.error.empty() ? "" : ("  ERROR " + s.error).c_str());
    for (const auto& [cls, mean] : r.perClass) std::printf("class %-10s %7.2f\n", cls.c_str(), mean);
    std::printf("overall %.2f\n", r.overallMean);
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  int cases = 20;
  std::uint64_t seed = 7;
  bool json = false;
};

int cmd_synth(const SynthArgs& a) {
  const auto cases = rap::generate_synthetic(a.cases, a.seed);
  const fs::path manifest = rap::write_synthetic(cases, a.out);
  if (a.json)
    std::cout << json{{"manifest", manifest.string()}, {"cases", cases.size()}}.dump() << '\n';
  else
    std::cout << "wrote " << cases.size() << " cases, manifest " << manifest.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rap: training-free few-shot segmentation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  BuildDbArgs bd;
  auto* sBuild = app.add_subcommand("build-db", "Build a support database from a dataset manifest");
  sBuild->add_option("--manifest", bd.manifest, "dataset manifest JSON")->required();
  sBuild->add_option("--out", bd.out, "output directory")->required();
  sBuild->add_option("--class", bd.classId, "only include cases of this class");
  sBuild->add_flag("--json", bd.json);

  RetrieveArgs rt;
  auto* sRetrieve = app.add_subcommand("retrieve", "Rank the database against query features");
  sRetrieve->add_option("--db", rt.db)->required();
  sRetrieve->add_option("--query", rt.query, "query feature map (RAF)")->required();
  sRetrieve->add_option("--rank", rt.rank, "1-based rank to select")->check(CLI::PositiveNumber);
  sRetrieve->add_option("--config", rt.config);
  sRetrieve->add_flag("--json", rt.json);

  AdaptArgs ad;
  auto* sAdapt = app.add_subcommand("adapt", "Retrieve, gate and align; write the pre-mask");
  sAdapt->add_option("--db", ad.db)->required();
  sAdapt->add_option("--query", ad.query, "query image (PGM or RAF)")->required();
  sAdapt->add_option("--features", ad.features, "query feature map (RAF)")->required();
  sAdapt->add_option("--out", ad.out, "pre-mask RAF path")->required();
  sAdapt->add_option("--config", ad.config);
  sAdapt->add_option("--dump-edges", ad.dumpEdges, "directory for the edge strength RAF/PNG");
  sAdapt->add_flag("--json", ad.json);

  PromptArgs pr;
  auto* sPrompt = app.add_subcommand("prompt", "Derive point and box prompts from a pre-mask");
  sPrompt->add_option("--premask", pr.premask)->required();
  sPrompt->add_option("--similarity", pr.similarity)->required();
  sPrompt->add_option("--out", pr.out)->required();
  sPrompt->add_option("--image", pr.image, "image path recorded in the prompt file");
  sPrompt->add_option("--config", pr.config);
  sPrompt->add_flag("--json", pr.json);

  SegmentArgs sg;
  auto* sSegment = app.add_subcommand("segment", "Segment an image from a prompt file");
  sSegment->add_option("--image", sg.image)->required();
  sSegment->add_option("--prompts", sg.prompts)->required();
  sSegment->add_option("--backend", sg.backend)->check(CLI::IsMember({"fallback", "adapter"}));
  sSegment->add_option("--adapter-dir", sg.adapterDir);
  sSegment->add_option("--adapter-cmd", sg.adapterCmd, "run as '<cmd> <adapter-dir>' before reading the result");
  sSegment->add_option("--out", sg.out, "mask RAF path");
  sSegment->add_option("--config", sg.config);
  sSegment->add_flag("--json", sg.json);

  EvalArgs ev;
  auto* sEval = app.add_subcommand("eval", "Run the pipeline over a dataset and score Dice");
  sEval->add_option("--manifest", ev.manifest)->required();
  sEval->add_option("--config", ev.config);
  sEval->add_option("--out", ev.out, "write the JSON report here");
  sEval->add_option("--traces", ev.traces, "directory for per-case trace JSON");
  sEval->add_flag("--loo", ev.loo, "leave the query out of its own database");
  sEval->add_flag("--serial", ev.serial, "single-threaded run");
  sEval->add_flag("--json", ev.json);

  SynthArgs sy;
  auto* sSynth = app.add_subcommand("synth", "Generate the synthetic benchmark");
  sSynth->add_option("--out", sy.out)->required();
  sSynth->add_option("--cases", sy.cases)->check(CLI::Range(2, 10000));
  sSynth->add_option("--seed", sy.seed);
  sSynth->add_flag("--json", sy.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sBuild) return cmd_build_db(bd);
    if (*sRetrieve) return cmd_retrieve(rt);
    if (*sAdapt) return cmd_adapt(ad);
    if (*sPrompt) return cmd_prompt(pr);
    if (*sSegment) return cmd_segment(sg);
    if (*sEval) return cmd_eval(ev);
    if (*sSynth) return cmd_synth(sy);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitUsage;
}
