// Microbenchmarks for the hot paths: index-set normalization, extended
// unions, boundary-matrix push-forwards, class composition, twist matrices,
// and one modest kernel solve.

#include <benchmark/benchmark.h>

#include <random>

#include "phg/bessel.hpp"
#include "phg/bmap.hpp"
#include "phg/rules.hpp"

using namespace phg;

namespace {

std::vector<Generator> denseGens(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<Generator> g;
  for (int i = 0; i < count; ++i) {
    Rat re(static_cast<int>(rng() % 41) - 8, 1 + static_cast<int>(rng() % 4));
    Rat im(static_cast<int>(rng() % 5) - 2);
    g.emplace_back(ComplexExact(re, im), static_cast<int>(rng() % 4));
  }
  return g;
}

void BM_Normalize(benchmark::State& state) {
  std::vector<Generator> g = denseGens(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    IndexSet e = IndexSet::fromGenerators(g);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_Normalize)->Arg(8)->Arg(64)->Arg(512);

void BM_ExtendedUnion(benchmark::State& state) {
  std::vector<IndexSet> ops;
  for (int i = 0; i < 3; ++i)
    ops.push_back(IndexSet::fromGenerators(
        denseGens(static_cast<int>(state.range(0)), 100 + i)));
  for (auto _ : state) {
    IndexSet e = extendedUnion(ops);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_ExtendedUnion)->Arg(4)->Arg(16)->Arg(64);

void BM_Sum(benchmark::State& state) {
  IndexSet a = IndexSet::fromGenerators(denseGens(static_cast<int>(state.range(0)), 3));
  IndexSet b = IndexSet::fromGenerators(denseGens(static_cast<int>(state.range(0)), 4));
  for (auto _ : state) {
    IndexSet e = a.sum(b);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_Sum)->Arg(4)->Arg(16)->Arg(64);

void BM_Pushforward(benchmark::State& state) {
  const BMap& lr = registryBMap("gamma_LR");
  std::map<std::string, IndexSet> sets;
  int i = 0;
  for (const auto& f : lr.source.faces)
    sets[f] = IndexSet::fromGenerators(denseGens(12, 40 + i++));
  IndexFamily fam(lr.source, std::move(sets));
  for (auto _ : state) {
    PushforwardResult r = pushforwardFamily(lr, fam);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Pushforward);

void BM_Compose0b(benchmark::State& state) {
  auto mk = [](unsigned seed) {
    std::map<std::string, IndexSet> sets;
    int i = 0;
    for (const auto& f : kindFaces(Kind::ZeroBInterior))
      sets[f] = IndexSet::fromGenerators(denseGens(8, seed + i++));
    return OperatorClass::make(Kind::ZeroBInterior, 2, std::move(sets));
  };
  OperatorClass A = mk(11), B = mk(23);
  for (auto _ : state) {
    Verdict v = composeClasses(A, B);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_Compose0b);

void BM_TwistPow(benchmark::State& state) {
  std::vector<std::pair<Cx, int>> blocks;
  for (int i = 0; i < state.range(0); ++i)
    blocks.emplace_back(Cx(0.5 * i, 0.25), i % 3);
  for (auto _ : state) {
    Mat m = twistPow(1.7, blocks);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_TwistPow)->Arg(2)->Arg(8);

void BM_KernelSolve(benchmark::State& state) {
  BesselSpec spec;
  spec.m = 2;
  spec.coeffs[{2, {0}}] = 1.0;
  spec.coeffs[{0, {0}}] = -0.25;
  spec.coeffs[{0, {2}}] = 1.0;
  spec.eta = {1.0};
  ModelContext ctx = ModelContext::make(1, -1.0, 1e-4, 1e2, 2001);
  for (auto _ : state) {
    KernelResult k = solveBesselKernel(spec, ctx);
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_KernelSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
