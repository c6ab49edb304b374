#include <benchmark/benchmark.h>

#include "psc/dataio.hpp"
#include "psc/eigensolver.hpp"
#include "psc/graph.hpp"
#include "psc/kmeans.hpp"
#include "psc/neural.hpp"
#include "psc/psc.hpp"

namespace {

psc::Matrix blobs(std::size_t n) { return psc::gen_blobs(n, 10, 3, 1.0, 10.0, 1).data; }

void BM_Similarity(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(psc::gaussian_similarity(x, 3.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Similarity)->RangeMultiplier(2)->Range(256, 2048)->Complexity(benchmark::oNSquared);

void BM_TopEigenpairs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto backend = state.range(1) ? psc::EigenBackend::kLapack : psc::EigenBackend::kHouseholderQL;
  const auto l = psc::normalized_laplacian(psc::gaussian_similarity(blobs(n), 3.0));
  for (auto _ : state) benchmark::DoNotOptimize(psc::top_eigenpairs(l.values(), 3, backend));
  state.SetLabel(state.range(1) ? "lapack" : "householder-ql");
}
BENCHMARK(BM_TopEigenpairs)
    ->ArgsProduct({{128, 256, 512, 1024}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(psc::kmeans(x, 3, 1));
}
BENCHMARK(BM_KMeans)->Range(1000, 16000)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)));
  const auto m = psc::Mlp::he_initialized(psc::MlpConfig::regressor(10, {32, 64, 32}, 3), 1);
  for (auto _ : state) benchmark::DoNotOptimize(psc::forward(m, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Range(1000, 64000);

void BM_PscCluster(benchmark::State& state) {
  psc::PscTrainConfig c;
  c.p = 3;
  c.hp.epochs = 20;
  const auto model = psc::psc_train(blobs(500), c);
  const auto x = blobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(psc::psc_cluster(model, x, 3, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PscCluster)->Range(1000, 64000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
