// Wall-clock benchmarks. The exponent checks in `fastla bench` count scalar
// operations instead; these are for spotting constant-factor regressions.
// Each benchmark also reports the multiplication count per iteration.

#include <benchmark/benchmark.h>

#include "fastla/eig.hpp"
#include "fastla/inverse.hpp"
#include "fastla/lu.hpp"
#include "fastla/matmul.hpp"
#include "fastla/qr.hpp"
#include "fastla/random.hpp"
#include "fastla/sylvester.hpp"

using namespace fastla;

namespace {

enum Engine { kConventional, kStrassen, kBlocked };

MmEngine engine_for(int which, OpCounter* ops) {
  switch (which) {
    case kStrassen: return MmEngine::strassen(64, ops);
    case kBlocked: return MmEngine::blocked(64, ops);
    default: return MmEngine::conventional(ops);
  }
}

Matrix upper_triangular(Index n, RngStream& rng) {
  Matrix t = gaussian_matrix(n, n, rng);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) t(i, j) = 0.0;
    t(i, i) += t(i, i) >= 0 ? 4.0 : -4.0;  // keeps the condition number moderate
  }
  return t;
}

void report_mults(benchmark::State& state, const OpCounter& ops) {
  state.counters["mults"] = benchmark::Counter(static_cast<double>(ops.scalar_mults),
                                               benchmark::Counter::kAvgIterations);
}

void BM_Multiply(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(1);
  const Matrix a = gaussian_matrix(n, n, rng), b = gaussian_matrix(n, n, rng);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  for (auto _ : state) benchmark::DoNotOptimize(multiply(a.view(), b.view(), e));
  report_mults(state, ops);
}

void BM_Qrr(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(2);
  const Matrix a = gaussian_matrix(n, n, rng);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  QrrConfig cfg;
  cfg.compute_report = false;
  for (auto _ : state) benchmark::DoNotOptimize(qrr(a.view(), e, cfg));
  report_mults(state, ops);
}

void BM_Lur(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(3);
  const Matrix a = gaussian_matrix(n, n, rng);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  LurConfig cfg;
  cfg.compute_report = false;
  for (auto _ : state) benchmark::DoNotOptimize(lur(a.view(), e, cfg));
  report_mults(state, ops);
}

void BM_TriInv(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(4);
  const Matrix t = upper_triangular(n, rng);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  for (auto _ : state) benchmark::DoNotOptimize(tri_inv(t.view(), e));
  report_mults(state, ops);
}

void BM_Sylr(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(5);
  Matrix a = upper_triangular(n, rng), b = upper_triangular(n, rng);
  for (Index i = 0; i < n; ++i) b(i, i) += 20.0;  // separates the spectra
  const Matrix c = gaussian_matrix(n, n, rng);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  for (auto _ : state) benchmark::DoNotOptimize(sylr(a.view(), b.view(), c.view(), e));
  report_mults(state, ops);
}

void BM_SchurSymmetric(benchmark::State& state) {
  const Index n = state.range(0);
  RngStream rng(6);
  Matrix a = gaussian_matrix(n, n, rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) a(i, j) = a(j, i);
  OpCounter ops;
  const MmEngine e = engine_for(static_cast<int>(state.range(1)), &ops);
  for (auto _ : state) {
    RngStream r(7);
    benchmark::DoNotOptimize(symmetric_eig(a.view(), r, e));
  }
  report_mults(state, ops);
}

void sizes(benchmark::internal::Benchmark* b, Index lo, Index hi) {
  for (int which : {kConventional, kStrassen, kBlocked})
    for (Index n = lo; n <= hi; n *= 2) b->Args({static_cast<std::int64_t>(n), which});
  b->ArgNames({"n", "engine"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Multiply)->Apply([](auto* b) { sizes(b, 64, 512); });
BENCHMARK(BM_Qrr)->Apply([](auto* b) { sizes(b, 64, 512); });
BENCHMARK(BM_Lur)->Apply([](auto* b) { sizes(b, 64, 512); });
BENCHMARK(BM_TriInv)->Apply([](auto* b) { sizes(b, 64, 512); });
BENCHMARK(BM_Sylr)->Apply([](auto* b) { sizes(b, 32, 128); });
BENCHMARK(BM_SchurSymmetric)->Apply([](auto* b) { sizes(b, 32, 128); });

BENCHMARK_MAIN();
