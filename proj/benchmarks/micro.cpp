/*
 * Copyright 2026 The csmtables Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Host wall-clock cost of the simulator itself; simulated time is reported
// by the bench CLI, not here.

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "csm/alloc/region.hpp"
#include "csm/bench/bench.hpp"
#include "csm/ipc/descriptor_codec.hpp"
#include "csm/protocol/protocol.hpp"
#include "csm/rt/cluster.hpp"
#include "csm/sim/cluster_memory.hpp"

namespace {

using namespace csm;

columnar::TableDescriptor table_with_chunks(std::uint64_t chunks) {
  columnar::TableDescriptor t;
  t.schema = columnar::Schema({{"v", columnar::DataType::UInt64, false}});
  std::vector<columnar::ArrayDescriptor> parts;
  for (std::uint64_t i = 0; i < chunks; ++i) {
    columnar::ArrayDescriptor a;
    a.length = 1024;
    a.data = {GlobalAddress(i * 8192), 8192};
    a.sealed = true;
    parts.push_back(a);
  }
  t.num_rows = 1024 * chunks;
  t.columns = {columnar::ChunkedColumn(columnar::DataType::UInt64, parts)};
  return t;
}

void BM_SerializeDescriptor(benchmark::State& state) {
  const auto t = table_with_chunks(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ipc::serialize_descriptor(t));
}
BENCHMARK(BM_SerializeDescriptor)->Arg(1)->Arg(64)->Arg(4096);

void BM_DeserializeDescriptor(benchmark::State& state) {
  const auto bytes = ipc::serialize_descriptor(table_with_chunks(static_cast<std::uint64_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(ipc::deserialize_descriptor(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_DeserializeDescriptor)->Arg(1)->Arg(64)->Arg(4096);

void BM_RegionAllocFree(benchmark::State& state) {
  const auto segments = sim::SegmentMap::uniform(1, 64 << 20);
  alloc::Region region(0, GlobalAddress(0), 64 << 20, segments);
  std::mt19937_64 rng(1);
  std::vector<GlobalAddress> live;
  for (auto _ : state) {
    if (live.size() < 512) {
      live.push_back(region.alloc(1 + rng() % 8192));
    } else {
      const auto i = rng() % live.size();
      region.free(live[i]);
      live[i] = live.back();
      live.pop_back();
    }
  }
}
BENCHMARK(BM_RegionAllocFree);

void BM_RemoteRead(benchmark::State& state) {
  const auto len = static_cast<std::uint64_t>(state.range(0));
  sim::ClusterMemory mem(sim::SegmentMap::uniform(2, 64 << 20));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mem.read(1, GlobalAddress(0), len));
    mem.flush_range(1, GlobalAddress(0), len);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * len));
}
BENCHMARK(BM_RemoteRead)->Arg(4096)->Arg(1 << 20);

void BM_CreateSharedBuffer(benchmark::State& state) {
  const auto len = static_cast<std::uint64_t>(state.range(0));
  const std::vector<std::byte> data(len, std::byte{1});
  for (auto _ : state) {
    sim::ClusterMemory mem(sim::SegmentMap::uniform(3, 8 << 20));
    rt::Cluster rt(mem);
    benchmark::DoNotOptimize(protocol::create_shared_buffer(rt, 1, 0, data));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * len));
}
BENCHMARK(BM_CreateSharedBuffer)->Arg(4096)->Arg(1 << 20);

void BM_InitTable16MiB(benchmark::State& state) {
  bench::BenchConfig c;
  for (auto _ : state) benchmark::DoNotOptimize(bench::bench_init_table(c));
}
BENCHMARK(BM_InitTable16MiB)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
