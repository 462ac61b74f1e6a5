#include <benchmark/benchmark.h>

#include <random>

#include "rap/chamfer.hpp"
#include "rap/edge.hpp"
#include "rap/imgproc.hpp"
#include "rap/retrieval.hpp"
#include "rap/synth.hpp"

namespace {

rap::Exec exec_of(const benchmark::State& s) { return s.range(0) ? rap::Exec::Parallel : rap::Exec::Serial; }

const std::vector<rap::LoadedCase>& cases() {
  static const auto c = rap::generate_synthetic(8, 7);
  return c;
}

void BM_EDT(benchmark::State& state) {
  std::mt19937 rng(1);
  rap::BinaryMask sites(256, 256);
  std::bernoulli_distribution b(0.002);
  for (auto& v : sites.data()) v = b(rng);
  for (auto _ : state) benchmark::DoNotOptimize(rap::squared_distance_transform(sites, exec_of(state)));
}

void BM_LoG(benchmark::State& state) {
  const rap::Image& img = cases()[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(rap::log_response(img, 4.0, exec_of(state)));
}

void BM_DirectionalFields(benchmark::State& state) {
  const rap::Image& img = cases()[0].image;
  const auto edges = rap::binarize_edges(rap::edge_map(img, {1, 2, 4, 8}, 0.5, 0.5), 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(rap::directional_distance_transforms(edges, img.height(), img.width(), 8, exec_of(state)));
}

void BM_ChamferSweep(benchmark::State& state) {
  const rap::Image& img = cases()[0].image;
  const auto edges = rap::binarize_edges(rap::edge_map(img, {1, 2, 4, 8}, 0.5, 0.5), 0.1);
  const auto fields = rap::directional_distance_transforms(edges, img.height(), img.width(), 8);
  const auto tmpl = rap::extract_boundary_template(cases()[2].mask, 128);
  const rap::BinaryMask gate(img.height(), img.width(), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(rap::search_transform(tmpl, fields, gate, rap::SearchGrid{}, exec_of(state)));
}

void BM_Retrieve(benchmark::State& state) {
  rap::SupportDatabase db;
  for (int rep = 0; rep < 16; ++rep)
    for (const auto& c : cases())
      db.add(rap::make_support_record(c.id + "_" + std::to_string(rep), c.image, c.mask, c.features));
  const auto q = rap::global_descriptor(cases()[1].features);
  for (auto _ : state) benchmark::DoNotOptimize(rap::retrieve(db, q, 2, true, exec_of(state)));
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_EDT)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LoG)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirectionalFields)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChamferSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Retrieve)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
