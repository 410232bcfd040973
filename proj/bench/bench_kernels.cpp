// Copyright 2026 The heavytail-pinning Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference vs OpenMP replica map, plus the single-replica DP.
//   bench_kernels --benchmark_filter=Replica

#include <benchmark/benchmark.h>

#include "pinning/estimators.hpp"
#include "pinning/partition.hpp"

using namespace pinning;

namespace {

void BM_PartitionDP(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto kernel = make_kernel(0.6, n);
  const auto spec = make_spec(1.5);
  const auto env = sample_env(spec, n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(partition({0.3, 0.01, n}, env, kernel, {false}));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_PartitionDP)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMillisecond);

// threads = 1 takes map_replicas_serial; larger values take the OpenMP loop.
void BM_ReplicaMap(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const auto kernel = make_kernel(0.6, 1024);
  const auto spec = make_spec(1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(replica_partitions(kernel, spec, {0.3, 0.01, 1024}, 64, 7, ParallelPolicy{threads}));
  }
  state.counters["threads"] = threads;
  state.counters["replicas/s"] = benchmark::Counter(64.0 * state.iterations(), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ReplicaMap)->DenseRange(1, 2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_RhoCertificate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto kernel = make_kernel(0.9, 1u << 12);
  const auto spec = make_spec(1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rho_certificate(kernel, spec, 0.5, 0.001, k, 16, 3));
  }
}
BENCHMARK(BM_RhoCertificate)->Arg(256)->Arg(1024)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
