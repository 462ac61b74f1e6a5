// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rap/chamfer.hpp"
#include "rap/edge.hpp"
#include "rap/imgproc.hpp"
#include "rap/pipeline.hpp"
#include "rap/prompt.hpp"
#include "rap/style.hpp"
#include "rap/synth.hpp"

using namespace rap;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1. DT oracle

Outcome directional_dt_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  const int n = 64;
  std::uniform_int_distribution<int> count(1, 200), coord(0, n - 1);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  const int binChoices[] = {1, 4, 8};
  std::size_t mismatches = 0, checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int K = binChoices[trial % 3];
    EdgePixelSet edges;
    const int m = count(rng);
    for (int i = 0; i < m; ++i) {
      edges.pixels.push_back({coord(rng), coord(rng)});
      edges.orientations.push_back(angle(rng));
    }
    const DirectionalDistanceField f = directional_distance_transforms(edges, n, n, K);
    const double width = std::numbers::pi / K;
    for (int k = 0; k < K; ++k) {
      std::vector<Pixel> sites;
      for (std::size_t i = 0; i < edges.pixels.size(); ++i)
        if (std::min(K - 1, static_cast<int>(edges.orientations[i] / width)) == k) sites.push_back(edges.pixels[i]);
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          double want = std::hypot(double(n), double(n));
          if (!sites.empty()) {
            long best = std::numeric_limits<long>::max();
            for (const Pixel p : sites) best = std::min<long>(best, long(p.x - x) * (p.x - x) + long(p.y - y) * (p.y - y));
            want = std::sqrt(static_cast<double>(best));
          }
          ++checked;
          if (f.fields[static_cast<std::size_t>(k)](x, y) != want) ++mismatches;
        }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          fmt("%zu/%zu field values differ from brute force, %.1f s (limit 30)", mismatches, checked, secs)};
}

// ---------------------------------------------------------- 2. chamfer recovery

BinaryMask render_ellipse(int n, double cx, double cy, double a, double b, double deg) {
  BinaryMask m(n, n);
  const double r = deg * std::numbers::pi / 180.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = dx * std::cos(r) + dy * std::sin(r);
      const double v = -dx * std::sin(r) + dy * std::cos(r);
      if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) m(x, y) = 1;
    }
  return m;
}

// Star-shaped polygon with irregular radii, filled by even-odd crossing.
BinaryMask render_polygon(int n, double cx, double cy, const std::vector<double>& radii, double phase) {
  std::vector<PointF> v;
  const int k = static_cast<int>(radii.size());
  for (int i = 0; i < k; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * i / k;
    v.push_back({cx + radii[i] * std::cos(t), cy + radii[i] * std::sin(t)});
  }
  BinaryMask m(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      bool inside = false;
      for (int i = 0, j = k - 1; i < k; j = i++) {
        if ((v[i].y > y) != (v[j].y > y) && x < (v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
          inside = !inside;
      }
      m(x, y) = inside;
    }
  return m;
}

Image mask_image(const BinaryMask& m) {
  Image img(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) img.data()[i] = m.data()[i] ? 0.8f : 0.2f;
  return img;
}

Outcome chamfer_recovery() {
  const auto t0 = Clock::now();
  const int n = 160;
  std::mt19937 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SearchGrid grid;
  const EdgeParams ep;
  int recovered = 0;
  double diceSum = 0.0;
  double worstT = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMask support;
    if (trial % 2 == 0) {
      const double a = 18 + 10 * u(rng);
      support = render_ellipse(n, 80, 80, a, a / (1.6 + 0.6 * u(rng)), 180 * u(rng));
    } else {
      std::vector<double> radii(5 + trial % 3);
      for (double& r : radii) r = 14 + 14 * u(rng);
      support = render_polygon(n, 80, 80, radii, 2 * std::numbers::pi * u(rng));
    }
    Transform2D truth;
    truth.scale = grid.scales[rng() % grid.scales.size()];
    truth.rotation = grid.rotations[rng() % grid.rotations.size()];
    truth.tx = static_cast<int>(rng() % 25) - 12;
    truth.ty = static_cast<int>(rng() % 25) - 12;

    const BinaryMask gate(n, n, 1);
    const BinaryMask target = build_premask(support, truth, gate, n, n);
    const EdgeMap em = edge_map(mask_image(target), ep.scales, ep.wLog, ep.wGrad);
    const auto fields = directional_distance_transforms(binarize_edges(em, ep.keepFraction), n, n, 8);
    const SearchResult got = search_transform(extract_boundary_template(support, 128), fields, gate, grid);
    const Transform2D& t = got.transform;
    const double dt = std::max(std::abs(t.tx - truth.tx), std::abs(t.ty - truth.ty));
    worstT = std::max(worstT, dt);
    if (std::abs(t.scale - truth.scale) <= 0.1 + 1e-9 && std::abs(t.rotation - truth.rotation) <= 10.0 + 1e-9 &&
        dt <= 1.0)
      ++recovered;
    diceSum += dice(build_premask(support, t, gate, n, n), target);
  }
  const double secs = seconds_since(t0);
  const double meanDice = diceSum / 100.0;
  return {recovered >= 95 && meanDice >= 90.0 && secs < 120.0,
          fmt("%d/100 within one grid step (need 95), premask Dice mean %.2f (need 90), worst translation error "
              "%.0f px, %.1f s (limit 120)",
              recovered, meanDice, worstT, secs)};
}

// ------------------------------------------------------------------ 3. wavelet

Outcome wavelet_properties() {
  std::mt19937 rng(303);
  std::uniform_int_distribution<int> half(1, 40);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  double worstRound = 0.0, worstEnergy = 0.0, worstSelf = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 2 * half(rng), w = 2 * half(rng);
    Image img(h, w);
    for (float& v : img.data()) v = u(rng);
    const WaveletSubbands s = dwt2(img);
    const ScalarGrid back = idwt2_unclamped(s, h, w);
    double e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      worstRound = std::max(worstRound, std::abs(back.data()[i] - img.data()[i]));
      e0 += double(img.data()[i]) * img.data()[i];
    }
    for (const ScalarGrid* b : {&s.ll, &s.lh, &s.hl, &s.hh})
      for (double v : b->data()) e1 += v * v;
    worstEnergy = std::max(worstEnergy, std::abs(e1 - e0) / e0);
    const ScalarGrid self = style_adapt_unclamped(img, img);
    for (std::size_t i = 0; i < img.size(); ++i)
      worstSelf = std::max(worstSelf, std::abs(self.data()[i] - img.data()[i]));
  }
  return {worstRound <= 1e-5 && worstEnergy <= 1e-6 && worstSelf <= 1e-5,
          fmt("round-trip max error %.2e (limit 1e-5), relative energy drift %.2e (limit 1e-6), "
              "self-adapt max error %.2e (limit 1e-5)",
              worstRound, worstEnergy, worstSelf)};
}

// ------------------------------------------------------------ 4. FPS / Voronoi

BinaryMask random_mask(std::mt19937& rng, int n, std::size_t maxArea) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    BinaryMask m(n, n);
    const int blobs = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < blobs; ++b) {
      const double cx = n * (0.2 + 0.6 * u(rng)), cy = n * (0.2 + 0.6 * u(rng));
      const double a = 2 + 10 * u(rng), bb = 2 + 10 * u(rng), r = 6.28 * u(rng);
      const BinaryMask e = render_ellipse(n, cx, cy, a, bb, r * 57.3);
      for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] |= e.data()[i];
    }
    const std::size_t area = m.count();
    if (area > 0 && area <= maxArea) return m;
  }
}

long d2(Pixel a, Pixel b) { return long(a.x - b.x) * (a.x - b.x) + long(a.y - b.y) * (a.y - b.y); }

std::vector<Pixel> brute_fps(const BinaryMask& m, int count) {
  std::vector<Pixel> fg;
  double sx = 0, sy = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) {
        fg.push_back({x, y});
        sx += x;
        sy += y;
      }
  const double cx = sx / fg.size(), cy = sy / fg.size();
  std::vector<Pixel> seeds;
  double best = std::numeric_limits<double>::infinity();
  Pixel first{};
  for (const Pixel p : fg) {
    const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    if (d < best) {
      best = d;
      first = p;
    }
  }
  seeds.push_back(first);
  while (static_cast<int>(seeds.size()) < std::min<int>(count, static_cast<int>(fg.size()))) {
    long bestD = -1;
    Pixel pick{};
    for (const Pixel p : fg) {
      long d = std::numeric_limits<long>::max();
      for (const Pixel s : seeds) d = std::min(d, d2(p, s));
      if (d > bestD) {
        bestD = d;
        pick = p;
      }
    }
    seeds.push_back(pick);
  }
  return seeds;
}

Outcome fps_voronoi_oracle() {
  std::mt19937 rng(404);
  int seedMismatch = 0, labelMismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = random_mask(rng, 48, 500);
    const int count = 1 + trial % 10;
    const std::vector<Pixel> want = brute_fps(m, count);
    const SeedSelection got = fps_seeds(m, count);
    if (got.seeds != want) ++seedMismatch;
    const VoronoiPartition part = voronoi_partition(m, want);
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) {
        int label = -1;
        if (m(x, y)) {
          long best = std::numeric_limits<long>::max();
          for (std::size_t i = 0; i < want.size(); ++i)
            if (d2({x, y}, want[i]) < best) {
              best = d2({x, y}, want[i]);
              label = static_cast<int>(i);
            }
        }
        if (part.cellLabels(x, y) != label) ++labelMismatch;
      }
  }
  return {seedMismatch == 0 && labelMismatch == 0,
          fmt("%d/50 seed lists and %d labels differ from brute force", seedMismatch, labelMismatch)};
}

// ------------------------------------------------------- 5. prompt invariants

Outcome prompt_invariants() {
  std::mt19937 rng(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t violations = 0;
  const PromptParams params;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 96;
    const BinaryMask raw = random_mask(rng, n, 1500);
    const BinaryMask premask = fill_holes(largest_component(raw));
    SimilarityMap sim(n, n);
    for (double& v : sim.data()) v = u(rng);
    const PromptSet ps = build_prompt_set(premask, sim, params);
    for (const Pixel p : ps.positives) violations += !premask.test(p.x, p.y);
    for (const Pixel p : ps.negatives) violations += premask.test(p.x, p.y);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (premask(x, y)) violations += !(x >= ps.bbox.x0 && x <= ps.bbox.x1 && y >= ps.bbox.y0 && y <= ps.bbox.y1);
    const SeedSelection seeds = fps_seeds(premask, params.Nv);
    const VoronoiPartition part = voronoi_partition(premask, seeds.seeds);
    std::vector<std::size_t> cellSize(seeds.seeds.size(), 0);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const int l = part.cellLabels(x, y);
        if (premask(x, y)) {
          if (l < 0 || l >= static_cast<int>(cellSize.size())) ++violations;
          else ++cellSize[static_cast<std::size_t>(l)];
        } else if (l != -1) {
          ++violations;
        }
      }
    for (std::size_t c : cellSize) violations += c == 0;
    violations += prompt_violations(ps, premask).size();
  }
  return {violations == 0, fmt("%zu violations over 50 pre-masks", violations)};
}

// ---------------------------------------------------------------- 6. dice

BinaryMask box(int n, int x0, int y0, int x1, int y1) {
  BinaryMask m(n, n);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m(x, y) = 1;
  return m;
}

Outcome dice_harness() {
  // Hand counts: 50 vs 100 -> 2*50/150; 4 vs 6 sharing 4 -> 8/10; two 3x3 sharing 2x2 -> 8/18.
  const struct {
    BinaryMask p, g;
    double want;
  } fixture[] = {
      {box(10, 0, 0, 4, 9), box(10, 0, 0, 9, 9), 66.67},
      {box(10, 0, 0, 1, 1), box(10, 0, 0, 2, 1), 80.00},
      {box(10, 0, 0, 2, 2), box(10, 1, 1, 3, 3), 44.44},
  };
  int bad = 0;
  for (const auto& f : fixture) bad += std::abs(dice(f.p, f.g) - f.want) > 0.01;
  std::mt19937 rng(606);
  int selfBad = 0, asym = 0;
  for (int i = 0; i < 50; ++i) {
    const BinaryMask p = random_mask(rng, 40, 1600);
    const BinaryMask g = random_mask(rng, 40, 1600);
    selfBad += dice(p, p) != 100.0;
    asym += dice(p, g) != dice(g, p);
  }
  return {bad == 0 && selfBad == 0 && asym == 0,
          fmt("%d/3 fixture pairs off by > 0.01, %d self-dice != 100, %d asymmetric of 50", bad, selfBad, asym)};
}

// ------------------------------------------------------------- 7. end to end

Outcome end_to_end(const std::vector<LoadedCase>& cases) {
  const auto t0 = Clock::now();
  PipelineConfig on;
  PipelineConfig off;
  off.ablation = {false, false, false};
  const EvalReport a = evaluate_cases(cases, on, true);
  const EvalReport b = evaluate_cases(cases, off, true);
  int errors = 0;
  for (const auto& s : a.perCase) errors += !s.error.empty();
  const double secs = seconds_since(t0);
  return {a.overallMean >= 80.0 && a.overallMean > b.overallMean && secs < 300.0,
          fmt("all-on mean Dice %.2f (need 80), all-off %.2f, %d stage errors, %.1f s (limit 300)", a.overallMean,
              b.overallMean, errors, secs)};
}

// ------------------------------------------------------------ 8. determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& manifest) {
  const PipelineConfig cfg;
  const fs::path dir = manifest.parent_path();
  for (const char* name : {"report_a.json", "report_b.json"}) {
    std::ofstream(dir / name, std::ios::binary) << report_to_json(evaluate(manifest, cfg, true)) << '\n';
  }
  const bool sameReport = slurp(dir / "report_a.json") == slurp(dir / "report_b.json");

  const auto cases = load_cases(manifest);
  int sweepsDiffer = 0;
  const int saved = omp_get_max_threads();
  for (std::size_t i = 0; i + 1 < cases.size(); i += 2) {
    const auto& q = cases[i];
    const EdgeMap em = edge_map(q.image, cfg.edge.scales, cfg.edge.wLog, cfg.edge.wGrad);
    const auto fields = directional_distance_transforms(binarize_edges(em, cfg.edge.keepFraction), q.image.height(),
                                                        q.image.width(), cfg.binCount);
    const auto tmpl = extract_boundary_template(cases[i + 2 < cases.size() ? i + 2 : 0].mask, cfg.templatePointCount);
    const BinaryMask gate(q.image.height(), q.image.width(), 1);
    omp_set_num_threads(1);
    const SearchResult one = search_transform(tmpl, fields, gate, cfg.search, Exec::Parallel);
    const SearchResult serial = search_transform(tmpl, fields, gate, cfg.search, Exec::Serial);
    omp_set_num_threads(4);
    const SearchResult many = search_transform(tmpl, fields, gate, cfg.search, Exec::Parallel);
    auto same = [](const SearchResult& a, const SearchResult& b) {
      return a.transform.tx == b.transform.tx && a.transform.ty == b.transform.ty &&
             a.transform.scale == b.transform.scale && a.transform.rotation == b.transform.rotation && a.cost == b.cost;
    };
    sweepsDiffer += !(same(one, many) && same(serial, many));
  }
  omp_set_num_threads(saved);
  return {sameReport && sweepsDiffer == 0,
          fmt("reports %s, %d of %zu chamfer sweeps differ between 1 and 4 threads", sameReport ? "identical" : "differ",
              sweepsDiffer, cases.size() / 2)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "rap_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  report(1, "directional distance fields vs brute force", directional_dt_oracle);
  report(2, "chamfer transform recovery", chamfer_recovery);
  report(3, "wavelet round trip, energy, self-adapt", wavelet_properties);
  report(4, "FPS and Voronoi vs brute force", fps_voronoi_oracle);
  report(5, "prompt invariants", prompt_invariants);
  report(6, "Dice harness", dice_harness);

  const auto cases = generate_synthetic(20, 7);
  const fs::path manifest = write_synthetic(cases, work / "synth");
  report(7, "end-to-end synthetic benchmark", [&] { return end_to_end(load_cases(manifest)); });
  report(8, "determinism", [&] { return determinism(manifest); });

  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
