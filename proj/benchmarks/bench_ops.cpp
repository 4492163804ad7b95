#include <benchmark/benchmark.h>

#include "cfr/batchnorm.hpp"
#include "cfr/conv.hpp"
#include "cfr/ops.hpp"

using namespace cfr;

static void ConvForward(benchmark::State& state) {
  const int64_t c = state.range(0);
  Rng rng(1);
  Tensor x = Tensor::randn(Shape{1, c, 24, 24}, rng);
  Tensor k = Tensor::randn(Shape{c, c, 3, 3}, rng);
  autograd::NoGradGuard no_grad;
  for (auto _ : state) {
    Tensor y = conv2d(x, k, 1, 1);
    benchmark::DoNotOptimize(y.ptr());
  }
  state.SetItemsProcessed(state.iterations() * 2 * c * c * 9 * 24 * 24);
}
BENCHMARK(ConvForward)->Arg(16)->Arg(32)->Arg(64);

static void ConvTrainStep(benchmark::State& state) {
  const int64_t c = state.range(0);
  Rng rng(1);
  Tensor x = Tensor::randn(Shape{1, c, 24, 24}, rng);
  Tensor k = Tensor::randn(Shape{c, c, 3, 3}, rng, 0.1, true);
  for (auto _ : state) {
    Tensor y = conv2d(x, k, 1, 1);
    Tensor loss = sum_all(y);
    k.zero_grad();
    loss.backward();
    benchmark::DoNotOptimize(k.grad().data());
  }
}
BENCHMARK(ConvTrainStep)->Arg(16)->Arg(32);

static void BatchNormTrain(benchmark::State& state) {
  Rng rng(1);
  Tensor x = Tensor::randn(Shape{8, 32, 24, 24}, rng);
  Tensor gamma = Tensor::full(Shape{32}, 1.0f);
  Tensor beta = Tensor::zeros(Shape{32});
  auto stats = RunningStats<float>::init(32);
  autograd::NoGradGuard no_grad;
  for (auto _ : state) {
    Tensor y = batchnorm2d(x, gamma, beta, stats, RunMode::train, 0.1, 1e-5);
    benchmark::DoNotOptimize(y.ptr());
  }
}
BENCHMARK(BatchNormTrain);

BENCHMARK_MAIN();
