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

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cluster_env.hpp"
#include "csm/columnar/access.hpp"
#include "csm/protocol/protocol.hpp"
#include "csm/rt/full_copy.hpp"
#include "test_util.hpp"

namespace csm {
namespace {

using columnar::DataType;
using columnar::RecordBatchDescriptor;
using columnar::Scalar;
using columnar::Schema;
using test::ClusterEnv;

// Ethernet message time at the default model: half the 3.3 ms round trip plus
// 8 ns per byte at 1 Gbit/s.
double msg_ns(std::uint64_t payload) { return 1.65e6 + 8.0 * static_cast<double>(payload); }

double ns_since(const ClusterEnv& env, std::size_t mark) {
  return env.mem.ledger().cost_since(mark).ns();
}

TEST(Cluster, ChannelsIncludeSelf) {
  ClusterEnv two(2);
  EXPECT_EQ(two.rt.channel_count(), 4u);
  ClusterEnv five(5);
  EXPECT_EQ(five.rt.channel_count(), 25u);
  EXPECT_TRUE(two.rt.node(1).has_region());
  EXPECT_EQ(two.rt.node(1).region().base(), GlobalAddress(1 << 20));
}

TEST(Cluster, SelfAllocationCostsNothing) {
  ClusterEnv env(2);
  const auto m = env.mem.ledger().mark();
  const GlobalAddress a = env.rt.rpc_alloc(0, 0, 100);
  EXPECT_EQ(env.mem.owner_of(a), 0u);
  EXPECT_EQ(env.mem.ledger().cost_since(m), SimDuration{});
  EXPECT_EQ(env.mem.ledger().node(0).bytes_over_ethernet, 0u);
}

TEST(Cluster, RemoteAllocationCost) {
  ClusterEnv env(2);
  const auto m = env.mem.ledger().mark();
  const GlobalAddress a = env.rt.rpc_alloc(1, 0, 4096);
  EXPECT_EQ(env.mem.owner_of(a), 0u);
  EXPECT_NEAR(ns_since(env, m), msg_ns(8) + 20e3 + msg_ns(9), 1e-3);
  EXPECT_EQ(env.mem.ledger().node(1).bytes_over_ethernet, 8u);
  EXPECT_EQ(env.mem.ledger().node(0).bytes_over_ethernet, 9u);
}

TEST(Cluster, AllocationErrors) {
  ClusterEnv env(2);
  EXPECT_CSM_ERROR(env.rt.rpc_alloc(1, 0, 0), Errc::invalid_argument);
  EXPECT_CSM_ERROR(env.rt.rpc_alloc(1, 0, 2 << 20), Errc::out_of_memory);
  EXPECT_CSM_ERROR(env.rt.rpc_alloc(1, 7, 8), Errc::out_of_range);
  // The failed request leaves no reply behind for the next one.
  const GlobalAddress a = env.rt.rpc_alloc(1, 0, 8);
  EXPECT_EQ(env.rt.node(0).region().find(a)->requested, 8u);
}

TEST(Cluster, OnlyTheOwnerFrees) {
  ClusterEnv env(2);
  const GlobalAddress a = env.rt.rpc_alloc(1, 0, 256);
  EXPECT_CSM_ERROR(env.rt.free_local(1, a), Errc::invalid_argument);
  env.rt.free_local(0, a);
  EXPECT_EQ(env.rt.node(0).region().find(a), nullptr);
  EXPECT_CSM_ERROR(env.rt.free_local(0, a), Errc::double_free);
}

TEST(Cluster, AllocAndFreeEventsHappenAtTheOwner) {
  ClusterEnv env(4, 64 << 10);
  std::mt19937_64 rng(3);
  std::vector<GlobalAddress> live;
  for (int i = 0; i < 400; ++i) {
    if (!live.empty() && rng() % 3 == 0) {
      const auto k = rng() % live.size();
      env.rt.free_local(env.mem.owner_of(live[k]), live[k]);
      live.erase(live.begin() + static_cast<long>(k));
      continue;
    }
    const auto from = static_cast<NodeId>(rng() % 4);
    const auto owner = static_cast<NodeId>(rng() % 4);
    try {
      live.push_back(env.rt.rpc_alloc(from, owner, 1 + rng() % 2000));
      EXPECT_EQ(env.mem.owner_of(live.back()), owner);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::out_of_memory);
    }
  }
  for (const auto& ev : env.mem.ledger().trace()) {
    if (ev.kind == sim::EventKind::alloc && ev.addr != 0) {
      EXPECT_EQ(env.mem.owner_of(GlobalAddress(ev.addr)), ev.node);
    }
    if (ev.kind == sim::EventKind::free) {
      EXPECT_EQ(env.mem.owner_of(GlobalAddress(ev.addr)), ev.node);
    }
  }
}

TEST(Cluster, BroadcastFlushReachesEveryNode) {
  ClusterEnv env(3);
  const GlobalAddress a = env.rt.rpc_alloc(1, 0, 1024);
  for (NodeId n = 0; n < 3; ++n) env.mem.read(n, a, 1024);
  const auto m = env.mem.ledger().mark();
  env.rt.broadcast_flush(0, a, 1024);
  for (NodeId n = 0; n < 3; ++n) {
    EXPECT_EQ(env.mem.cached_lines(n), 0u) << n;
  }
  std::map<NodeId, int> requests;
  std::uint64_t writebacks = 0;
  const auto& trace = env.mem.ledger().trace();
  for (std::size_t i = m; i < trace.size(); ++i) {
    writebacks += trace[i].charges.local_writebacks + trace[i].charges.remote_writebacks;
  }
  for (const auto& d : env.rt.deliveries()) {
    if (d.kind == rt::MessageKind::flush_request) ++requests[d.to];
  }
  EXPECT_EQ(writebacks, 0u);
  EXPECT_EQ(requests, (std::map<NodeId, int>{{0, 1}, {1, 1}, {2, 1}}));
  EXPECT_EQ(env.rt.in_flight(), 0u);
}

TEST(Cluster, BroadcastFlushWritesBackDirtyLines) {
  ClusterEnv env(3);
  const GlobalAddress a = env.rt.rpc_alloc(2, 0, 300);
  const auto data = test::filled(300, 0x5a);
  env.rt.write(2, a, data);
  EXPECT_NE(env.mem.backing_peek(a, 300), data);
  env.rt.broadcast_flush(0, a, 300);
  EXPECT_EQ(env.mem.backing_peek(a, 300), data);
}

TEST(Cluster, DescriptorBroadcastSendsBytesToEachPeer) {
  ClusterEnv env(3);
  columnar::RecordBatchDescriptor b;
  b.schema = Schema({{"a", DataType::UInt64, false}});
  b.num_rows = 3;
  columnar::ArrayDescriptor col;
  col.length = 3;
  col.data = {GlobalAddress(4096), 24};
  col.sealed = true;
  b.columns = {col};
  const auto bytes = env.rt.serialize(1, b);
  ASSERT_EQ(bytes.size(), 55u);
  const auto before = env.mem.ledger().node(1).bytes_over_ethernet;
  env.rt.broadcast_descriptor(1, bytes);
  EXPECT_EQ(env.mem.ledger().node(1).bytes_over_ethernet - before, 55u * 2);
  EXPECT_TRUE(env.rt.node(1).descriptors().empty());
  for (NodeId n : {0u, 2u}) {
    ASSERT_EQ(env.rt.node(n).descriptors().size(), 1u);
    EXPECT_EQ(env.rt.node(n).descriptors()[0], ipc::AnyDescriptor(b));
  }
}

TEST(Cluster, WritesIntoSealedRangesFail) {
  ClusterEnv env(2);
  const GlobalAddress a = env.rt.rpc_alloc(1, 0, 256);
  env.rt.broadcast_seal(1, a, 256);
  EXPECT_TRUE(env.rt.node(0).region().find(a)->sealed);
  EXPECT_CSM_ERROR(env.rt.write(1, a + 100, test::filled(4, 1)), Errc::sealed);
  EXPECT_CSM_ERROR(env.rt.write(0, a, test::filled(4, 1)), Errc::sealed);
  EXPECT_CSM_ERROR(env.rt.free_local(0, a), Errc::sealed);
}

TEST(Cluster, UnresponsiveNodeTimesOut) {
  ClusterEnv env(3);
  const GlobalAddress a = env.rt.rpc_alloc(0, 0, 128);
  env.rt.set_unresponsive(2, true);
  EXPECT_CSM_ERROR(env.rt.broadcast_flush(0, a, 128), Errc::timeout);
  EXPECT_CSM_ERROR(env.rt.rpc_alloc(1, 2, 8), Errc::timeout);
  EXPECT_GT(env.rt.in_flight(), 0u);
  EXPECT_GT(env.rt.shutdown(), 0u);
}

TEST(Cluster, ShutdownStopsEveryNode) {
  ClusterEnv env(3);
  env.rt.rpc_alloc(2, 1, 64);
  EXPECT_EQ(env.rt.shutdown(), 0u);
  EXPECT_TRUE(env.rt.is_shut_down());
  for (NodeId n = 0; n < 3; ++n) EXPECT_TRUE(env.rt.node(n).stopped());
  EXPECT_CSM_ERROR(env.rt.rpc_alloc(2, 1, 64), Errc::shutdown);
  EXPECT_EQ(env.rt.shutdown(), 0u);
}

std::vector<rt::Delivery> scripted_run(std::uint64_t seed) {
  ClusterEnv env(4, 1 << 20, {}, rt::RuntimeOptions{seed});
  for (NodeId n = 0; n < 4; ++n) {
    const GlobalAddress a = env.rt.rpc_alloc(n, (n + 1) % 4, 512);
    env.rt.broadcast_flush(n, a, 512);
    env.rt.broadcast_seal(n, a, 512);
  }
  return env.rt.deliveries();
}

TEST(Cluster, SeededScheduleIsDeterministic) {
  EXPECT_EQ(scripted_run(1), scripted_run(1));
  bool differs = false;
  for (std::uint64_t s = 2; s < 10 && !differs; ++s) differs = scripted_run(s) != scripted_run(1);
  EXPECT_TRUE(differs);
}

TEST(Cluster, ChannelsAreFifo) {
  // Per (from, to) the delivered kinds must be the sent kinds in order. The
  // ledger's msg events give the send order; payload sizes identify kinds.
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    ClusterEnv env(3, 1 << 20, {}, rt::RuntimeOptions{seed});
    for (NodeId n = 0; n < 3; ++n) {
      const GlobalAddress a = env.rt.rpc_alloc(n, (n + 2) % 3, 256);
      env.rt.broadcast_flush(n, a, 256);
      env.rt.broadcast_seal(n, a, 256);
    }
    std::map<std::pair<NodeId, NodeId>, std::vector<std::uint64_t>> sent, got;
    for (const auto& ev : env.mem.ledger().trace()) {
      if (ev.kind == sim::EventKind::msg) sent[{ev.node, ev.peer}].push_back(ev.len);
    }
    const std::map<rt::MessageKind, std::uint64_t> sizes = {
        {rt::MessageKind::alloc_request, 8}, {rt::MessageKind::alloc_response, 9},
        {rt::MessageKind::flush_request, 24}, {rt::MessageKind::flush_ack, 8},
        {rt::MessageKind::seal_notice, 16}};
    for (const auto& d : env.rt.deliveries()) got[{d.from, d.to}].push_back(sizes.at(d.kind));
    EXPECT_EQ(sent, got) << seed;
  }
}

RecordBatchDescriptor make_batch(rt::Cluster& rt, NodeId node, std::uint64_t rows) {
  protocol::Values<std::int64_t> ints;
  protocol::Values<std::string> strs;
  protocol::Values<bool> flags;
  for (std::uint64_t i = 0; i < rows; ++i) {
    ints.push_back(i % 5 == 0 ? std::nullopt : std::optional<std::int64_t>(-3 * int64_t(i)));
    strs.push_back(i % 7 == 3 ? std::nullopt : std::optional<std::string>(std::string(i % 9, 'q')));
    flags.push_back(i % 2 == 0);
  }
  RecordBatchDescriptor b;
  b.schema = Schema({{"i", DataType::Int64, true},
                     {"s", DataType::Utf8, true},
                     {"b", DataType::Bool, false}});
  b.num_rows = rows;
  b.columns = {protocol::build_array(rt, node, node, DataType::Int64, ints),
               protocol::build_array(rt, node, node, DataType::Utf8, strs),
               protocol::build_array(rt, node, node, DataType::Bool, flags)};
  return b;
}

TEST(Cluster, EthernetFullCopyPreservesValues) {
  ClusterEnv env(2, 4 << 20);
  const auto src = make_batch(env.rt, 0, 1000);
  const auto before = env.mem.ledger().node(0).bytes_over_ethernet;
  const auto copy = rt::ethernet_full_copy(env.rt, 0, 1, src);
  EXPECT_GT(env.mem.ledger().node(0).bytes_over_ethernet - before, 1000u * 8);
  EXPECT_EQ(copy.schema, src.schema);
  EXPECT_EQ(copy.num_rows, src.num_rows);
  for (std::size_t c = 0; c < src.columns.size(); ++c) {
    const auto& d = copy.columns[c];
    EXPECT_EQ(env.mem.owner_of(d.data.addr), 1u);
    EXPECT_EQ(d.null_count, src.columns[c].null_count);
    for (std::uint64_t r = 0; r < src.num_rows; ++r) {
      ASSERT_EQ(columnar::array_get(env.mem, 1, d, r),
                columnar::array_get(env.mem, 0, src.columns[c], r))
          << c << " " << r;
    }
  }
  EXPECT_EQ(env.rt.node(1).full_copies_pending(), 0u);
  EXPECT_CSM_ERROR(env.rt.take_full_copy(1), Errc::empty);
}

TEST(Cluster, EthernetFullCopyOfEmptyBatch) {
  ClusterEnv env(2);
  const auto src = make_batch(env.rt, 0, 0);
  const auto copy = rt::ethernet_full_copy(env.rt, 0, 1, src);
  EXPECT_EQ(copy.num_rows, 0u);
  EXPECT_EQ(copy.columns.size(), 3u);
  copy.validate_structure();
}

}  // namespace
}  // namespace csm
