#include <benchmark/benchmark.h>

#include "cfr/cfr_block.hpp"

using namespace cfr;

// marginal cost per fuse-and-refine loop at the fusion-point shape
static void CycleForward(benchmark::State& state) {
  CfrConfig cfg;
  cfg.channels = 32;
  cfg.loops = static_cast<int>(state.range(0));
  Rng rng(1);
  auto params = CfrParamsT<float>::init(cfg, rng);
  Tensor ft = Tensor::randn(Shape{1, 32, 24, 24}, rng);
  Tensor fv = Tensor::randn(Shape{1, 32, 24, 24}, rng);
  autograd::NoGradGuard no_grad;
  for (auto _ : state) {
    CfrTraceT<float> trace = run_cycle(ft, fv, cfg, params, RunMode::eval);
    Tensor fused = final_fusion(trace);
    benchmark::DoNotOptimize(fused.ptr());
  }
}
BENCHMARK(CycleForward)->DenseRange(1, 4);

static void BaselineAverage(benchmark::State& state) {
  Rng rng(1);
  Tensor ft = Tensor::randn(Shape{1, 32, 24, 24}, rng);
  Tensor fv = Tensor::randn(Shape{1, 32, 24, 24}, rng);
  autograd::NoGradGuard no_grad;
  for (auto _ : state) {
    Tensor fused = baseline_fuse(ft, fv, FuseStrategy::average);
    benchmark::DoNotOptimize(fused.ptr());
  }
}
BENCHMARK(BaselineAverage);
