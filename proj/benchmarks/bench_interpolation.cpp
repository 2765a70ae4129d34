// Microbenchmarks for the reconstruction hot paths: neighbor gathering and
// kernel evaluation scale with (HR pixels) x (frames).

#include <benchmark/benchmark.h>

#include "pnnsr/pipeline.hpp"
#include "pnnsr/restoration.hpp"
#include "pnnsr/synth.hpp"
#include "pnnsr/training.hpp"
#include "support/test_images.hpp"

namespace {

using namespace pnnsr;

SynthSequence make_sequence(int lr_side, int frames) {
  SynthOptions opt;
  opt.frames = frames;
  opt.seed = 11;
  return synth_sequence(testing::fractal_texture(3 * lr_side, 3 * lr_side, 5), opt);
}

KernelMlp bench_net() {
  Rng rng(7);
  return initial_network(kDefaultHiddenUnits, rng);
}

void BM_Interpolate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int frames = static_cast<int>(state.range(1));
  const SynthSequence seq = make_sequence(side, frames);
  const Kernel kernel = MlpKernel{bench_net()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolate(seq.frames, seq.transforms, kernel, 3));
  }
  state.SetItemsProcessed(state.iterations() * 9LL * side * side * frames);
}
BENCHMARK(BM_Interpolate)
    ->ArgsProduct({{32, 64, 128}, {5, 25, 50}})
    ->Unit(benchmark::kMillisecond);

void BM_NeighborField(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const SynthSequence seq = make_sequence(side, 25);
  const HighResGrid grid = HighResGrid::over(seq.frames[0], 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_neighbor_field(seq.frames, seq.transforms, grid));
  }
}
BENCHMARK(BM_NeighborField)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_KernelForward(benchmark::State& state) {
  const KernelMlp net = bench_net();
  double d = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_forward(net, d));
    d = d < 4.0 ? d + 0.01 : 0.0;
  }
}
BENCHMARK(BM_KernelForward);

void BM_BatchGradient(benchmark::State& state) {
  TrainConfig cfg;
  cfg.patterns = static_cast<int>(state.range(0));
  const auto data = make_dataset(testing::training_set(64), cfg);
  const KernelMlp net = bench_net();
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(net, data));
  state.SetItemsProcessed(state.iterations() * cfg.patterns);
}
BENCHMARK(BM_BatchGradient)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ApplyFilter(benchmark::State& state) {
  const Image img = testing::smooth_texture(192, 192, 2);
  const FirFilter f = FirFilter::delta(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(img, f));
}
BENCHMARK(BM_ApplyFilter)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
