// Serial vs OpenMP kernels: slicing over synthetic paths, plan generation
// over the rectangle fixture.

#include <benchmark/benchmark.h>

#include <random>

#include "carve/pipeline.hpp"

using namespace carve;

namespace {

Analysis synthetic(std::size_t paths, std::size_t length) {
  std::mt19937_64 rng(42);
  Analysis a;
  a.contexts.resize(1);
  for (std::size_t p = 0; p < paths; ++p) {
    SeedPath path;
    path.statements.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
      auto& s = path.statements[i];
      s.last = i;
      for (RefId r = 1; r <= 32; ++r) {
        if (rng() % 8 == 0) s.used.push_back(r);
        if (rng() % 12 == 0) s.mutated.push_back(r);
      }
      if (rng() % 4 == 0) {
        ExecutionContext c;
        c.id = a.contexts.size();
        c.type = ContextType::Dep;
        a.contexts.push_back(c);
        s.spawned.push_back(c.id);
      }
    }
    a.paths.push_back(std::move(path));
  }
  return a;
}

struct Fixture {
  AstForest forest;
  CallSiteSet sites;
  Analysis analysis;
  std::vector<FlowSlice> slices;
};

const Fixture& rectangle() {
  static const Fixture f = [] {
    const std::filesystem::path dir = std::filesystem::path(CARVE_CORPUS_DIR) / "rectangle";
    Fixture x;
    x.forest = load_ast(dir / "fixtures/ast.json");
    TargetSpec spec{"Rectangle.stretchLongestEdge", "src/rectangle.tj", "src", "test"};
    x.sites = resolve(x.forest, spec);
    auto events = load_trace(dir / "fixtures/trace.jsonl");
    FilterResult r = filter_tests(events, x.forest, x.sites);
    x.analysis = analyze(events, x.forest, x.sites, r, false).analysis;
    x.slices = compute_all_slices_serial(x.analysis);
    return x;
  }();
  return f;
}

void BM_SlicesSerial(benchmark::State& state) {
  Analysis a = synthetic(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_all_slices_serial(a));
}

void BM_SlicesParallel(benchmark::State& state) {
  Analysis a = synthetic(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_all_slices(a));
}

void BM_GenerateSerial(benchmark::State& state) {
  const Fixture& f = rectangle();
  for (auto _ : state) benchmark::DoNotOptimize(generate_all_serial(f.analysis, f.slices, f.sites, f.forest));
}

void BM_GenerateParallel(benchmark::State& state) {
  const Fixture& f = rectangle();
  for (auto _ : state) benchmark::DoNotOptimize(generate_all(f.analysis, f.slices, f.sites, f.forest));
}

}  // namespace

BENCHMARK(BM_SlicesSerial)->Args({8, 200})->Args({16, 300})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlicesParallel)->Args({8, 200})->Args({16, 300})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GenerateParallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
