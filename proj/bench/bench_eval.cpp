// Serial reference vs OpenMP batch kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "cosearch/parallel_eval.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace cosearch;

namespace {

std::vector<DnnArch> archs(std::size_t n) {
  std::mt19937_64 rng(17);
  std::vector<DnnArch> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_small_arch(rng, 8, 256));
  return out;
}

void BM_ProposalsSerial(benchmark::State& state) {
  const auto a = archs(static_cast<std::size_t>(state.range(0)));
  const DeviceSpec d = builtin_device("zcu102");
  SaturatingComputeProxy proxy;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_proposals_serial(a, d, 30.0, {}, proxy));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ProposalsParallel(benchmark::State& state) {
  const auto a = archs(static_cast<std::size_t>(state.range(0)));
  const DeviceSpec d = builtin_device("zcu102");
  SaturatingComputeProxy proxy;
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_proposals(a, d, 30.0, {}, proxy, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EstimateSerial(benchmark::State& state) {
  const auto a = archs(static_cast<std::size_t>(state.range(0)));
  const std::vector<AccelConfig> c(a.size(), props::full_alloc(64));
  const DeviceSpec d = builtin_device("zcu102");
  for (auto _ : state) benchmark::DoNotOptimize(estimate_batch_serial(a, c, d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EstimateParallel(benchmark::State& state) {
  const auto a = archs(static_cast<std::size_t>(state.range(0)));
  const std::vector<AccelConfig> c(a.size(), props::full_alloc(64));
  const DeviceSpec d = builtin_device("zcu102");
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_batch(a, c, d, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ProposalsSerial)->Arg(64)->Arg(512)->UseRealTime();
BENCHMARK(BM_ProposalsParallel)->ArgsProduct({{64, 512}, {1, 2, 4}})->UseRealTime();
BENCHMARK(BM_EstimateSerial)->Arg(256)->Arg(4096)->UseRealTime();
BENCHMARK(BM_EstimateParallel)->ArgsProduct({{256, 4096}, {1, 2, 4}})->UseRealTime();

BENCHMARK_MAIN();
