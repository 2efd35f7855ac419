// Serial vs OpenMP mixing kernel and full engine step.

#include <benchmark/benchmark.h>

#include <random>

#include "dsgd/engine.hpp"
#include "dsgd/neural_net.hpp"

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <bool Parallel>
void BM_MixKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const dsgd::Graph g(dsgd::TopologySpec::ring(n));
  const auto w = uniform(n * dim, 1);
  const auto dirs = uniform(n * dim, 2);
  std::vector<double> next(n * dim);
  for (auto _ : state) {
    if constexpr (Parallel) {
      dsgd::mix_and_descend_parallel(g, 0.01, 0.2, w, dirs, dim, next);
    } else {
      dsgd::mix_and_descend_serial(g, 0.01, 0.2, w, dirs, dim, next);
    }
    benchmark::DoNotOptimize(next.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * dim * sizeof(double) * 4));
}

// Engine step on the 784-50-10 network with single-sample directions.
void BM_NetworkStep(benchmark::State& state) {
  const auto exec = state.range(0) ? dsgd::Execution::parallel : dsgd::Execution::serial;
  const std::size_t n = 10, per_agent = 250;
  const dsgd::SigmoidNetSpec spec{784, 50, 10};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pixel(0.0, 1.0);
  std::vector<double> x(n * per_agent * spec.d_in);
  std::vector<std::uint8_t> y(n * per_agent);
  for (auto& v : x) v = pixel(rng);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::uint8_t>(i % 10);
  auto data = std::make_shared<const dsgd::Dataset>(spec.d_in, std::move(x), std::move(y));
  dsgd::Problem p;
  p.dim = spec.dim();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> idx(per_agent);
    for (std::size_t j = 0; j < per_agent; ++j) idx[j] = i * per_agent + j;
    p.agents.push_back(std::make_shared<dsgd::NeuralNetObjective>(spec, data, idx));
  }
  const dsgd::Graph g(dsgd::TopologySpec::ring(n));
  const dsgd::StepSchedule s{1.0, 0.2, 0.28, 0.9, 1e-5};
  dsgd::Engine engine(g, s, p, dsgd::OracleConfig{}, exec);
  std::vector<double> init;
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = dsgd::nn_initial_weights(spec, i, 0.12);
    init.insert(init.end(), w.begin(), w.end());
  }
  dsgd::NetworkState net(init, spec.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(engine.step(net));
}

}  // namespace

BENCHMARK(BM_MixKernel<false>)->Name("mix/serial")->Args({10, 20560})->Args({100, 1000})->Args({1000, 2});
BENCHMARK(BM_MixKernel<true>)->Name("mix/openmp")->Args({10, 20560})->Args({100, 1000})->Args({1000, 2});
BENCHMARK(BM_NetworkStep)->Name("step/network")->Arg(0)->Arg(1)->ArgName("parallel");

BENCHMARK_MAIN();
