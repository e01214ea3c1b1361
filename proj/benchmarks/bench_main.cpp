#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "gattaca/dynamics.hpp"
#include "gattaca/exact_analysis.hpp"
#include "gattaca/neural.hpp"

namespace {

using namespace gattaca;

// Ring of n nodes where each node copies the negation of its predecessor.
BooleanNetwork ring(std::size_t n) {
  std::string text = "targets, factors\n";
  for (std::size_t i = 0; i < n; ++i) {
    text += "v" + std::to_string(i) + ", !v" + std::to_string((i + n - 1) % n) + "\n";
  }
  return parse_bnet(text);
}

void BM_AsyncStep(benchmark::State& state) {
  const BooleanNetwork net = ring(static_cast<std::size_t>(state.range(0)));
  RngStream rng(1, "bench");
  NetworkState s(net.size());
  for (auto _ : state) {
    s = async_step(net, s, rng);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_AsyncStep)->Arg(35)->Arg(200);

void BM_BuildStg(benchmark::State& state) {
  const BooleanNetwork net = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const ExplicitStg stg = build_stg(net, {});
    benchmark::DoNotOptimize(stg.state_count());
  }
}
BENCHMARK(BM_BuildStg)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_BdqUpdate(benchmark::State& state) {
  const std::size_t nodes = static_cast<std::size_t>(state.range(0));
  BdqDims dims;
  dims.nodes = nodes;
  dims.actions = nodes + 1;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes; ++i) edges.push_back({i, (i + 1) % nodes});
  BdqNetwork online(dims, edges, 1);
  const BdqNetwork target(dims, edges, 2);
  std::mt19937_64 gen(3);
  std::bernoulli_distribution coin(0.5);
  ReplayBatch batch;
  const std::size_t size = 128;
  batch.states.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(nodes));
  batch.next_states.resizeLike(batch.states);
  for (Eigen::Index i = 0; i < batch.states.size(); ++i) {
    batch.states.data()[i] = coin(gen);
    batch.next_states.data()[i] = coin(gen);
  }
  for (std::size_t i = 0; i < size; ++i) {
    batch.actions.emplace_back(dims.branches, 0);
    batch.rewards.push_back(21.0);
    batch.terminal.push_back(0);
    batch.weights.push_back(1.0);
  }
  Adam adam;
  for (auto _ : state) {
    const LossResult r = backward_and_step(batch, online, target, 0.99, adam);
    benchmark::DoNotOptimize(r.loss);
  }
}
BENCHMARK(BM_BdqUpdate)->Arg(35)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
