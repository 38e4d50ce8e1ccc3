#include <benchmark/benchmark.h>

#include "kgcn/kpca.hpp"
#include "kgcn/model.hpp"
#include "kgcn/skeleton.hpp"
#include "kgcn/train.hpp"

using namespace kgcn;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(0.05, 0.95);
  return m;
}

LabeledGraph skeleton_graph(std::uint64_t seed) {
  GraphDataset ds = synth_dataset(2, 1, seed);
  return ds.graphs.front();
}

KgcnModel bench_model(KernelKind kind, const LabeledGraph& g,
                      std::uint64_t seed) {
  return init_kgcn(KernelSpec::defaults(kind), 5, 4, 8, 1, Pool::Mean,
                   g.signals, seed);
}

void BM_GramGaussian(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix x = random_matrix(n, 24, 1);
  KernelSpec spec = KernelSpec::defaults(KernelKind::Gaussian);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram(spec, x, x));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramGaussian)->Range(32, 512)->Complexity(benchmark::oNSquared);

void BM_Conv(benchmark::State& state) {
  KernelKind kind = static_cast<KernelKind>(state.range(0));
  LabeledGraph g = skeleton_graph(3);
  KgcnModel m = bench_model(kind, g, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kgcn_conv(g, m));
  }
}
BENCHMARK(BM_Conv)
    ->Arg(static_cast<int>(KernelKind::Linear))
    ->Arg(static_cast<int>(KernelKind::Gaussian))
    ->Arg(static_cast<int>(KernelKind::HistogramIntersection));

void BM_Backward(benchmark::State& state) {
  LabeledGraph g = skeleton_graph(3);
  KgcnModel m = bench_model(KernelKind::Gaussian, g, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kgcn_backward(g, m, g.label));
  }
}
BENCHMARK(BM_Backward);

void BM_KpcaFit(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix x = random_matrix(n, 24, 7);
  KernelSpec spec = KernelSpec::defaults(KernelKind::Gaussian);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpca_fit(spec, x, 16));
  }
}
BENCHMARK(BM_KpcaFit)->Range(32, 128);

void BM_TrainEpoch(benchmark::State& state) {
  GraphDataset ds = synth_dataset(4, 10, 11);
  Split split = synth_split(4, 8, 2);
  std::vector<std::size_t> train_idx = resolve_ids(ds, split.train);
  std::vector<std::size_t> test_idx = resolve_ids(ds, split.test);
  TrainSetup setup;
  setup.kernel = KernelSpec::defaults(KernelKind::Gaussian);
  setup.train.seed = 1;
  KgcnTrainState state0 = init_kgcn_state(ds, train_idx, setup);
  GraphDataset normalized = ds;
  normalize_dataset(normalized, *state0.norm);
  for (auto _ : state) {
    KgcnTrainState s = state0;
    train_kgcn_epochs(s, normalized, train_idx, test_idx, setup,
                      s.epoch + 1);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_TrainEpoch);

}  // namespace

BENCHMARK_MAIN();
