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

#ifndef CSM_RT_CLUSTER_HPP_
#define CSM_RT_CLUSTER_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "csm/alloc/region.hpp"
#include "csm/common.hpp"
#include "csm/ipc/descriptor_codec.hpp"
#include "csm/protocol/sealed_registry.hpp"
#include "csm/rt/message.hpp"
#include "csm/sim/cluster_memory.hpp"

namespace csm::rt {

class Cluster;

/// Per-node state. Everything here is mutated only while the node handles
/// one of its own messages.
class NodeRuntime {
 public:
  NodeId id() const { return id_; }

  bool has_region() const { return region_.has_value(); }
  /// Throws Errc::invalid_argument if the node owns no memory.
  const alloc::Region& region() const;

  const protocol::SealedRegistry& sealed() const { return sealed_; }
  const std::vector<ipc::AnyDescriptor>& descriptors() const { return descriptors_; }

  std::size_t full_copies_pending() const { return full_copies_.size(); }
  std::uint64_t messages_handled() const { return handled_; }
  bool stopped() const { return stopped_; }

 private:
  friend class Cluster;

  NodeId id_ = 0;
  std::optional<alloc::Region> region_;
  protocol::SealedRegistry sealed_;
  std::vector<ipc::AnyDescriptor> descriptors_;
  std::deque<std::pair<NodeId, FullCopy>> full_copies_;
  std::map<NodeId, std::deque<AllocResponse>> alloc_replies_;
  std::map<std::uint64_t, std::uint32_t> acks_;
  std::uint64_t handled_ = 0;
  bool stopped_ = false;
};

struct RuntimeOptions {
  // Seeded random choice among ready channels; round robin when unset.
  std::optional<std::uint64_t> schedule_seed;
};

struct Delivery {
  NodeId from = 0;
  NodeId to = 0;
  MessageKind kind = MessageKind::shutdown;
  bool operator==(const Delivery&) const = default;
};

/// In-process cluster: one NodeRuntime per node over reliable FIFO channels,
/// driven by a deterministic single-threaded scheduler.
///
/// Blocking calls (rpc_alloc, broadcast_flush, ...) pump messages until
/// their reply arrives. Every node keeps serving its inbox meanwhile, so a
/// node waiting for acks still answers flush requests. If the system goes
/// quiet before the reply shows up, the call throws Errc::timeout; that is
/// how unresponsive nodes surface.
class Cluster {
 public:
  /// One runtime per node of `memory`; each node with a segment gets a
  /// Region spanning it.
  explicit Cluster(sim::ClusterMemory& memory, RuntimeOptions options = {});

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  sim::ClusterMemory& memory() { return mem_; }
  const sim::ClusterMemory& memory() const { return mem_; }
  std::uint32_t node_count() const { return static_cast<std::uint32_t>(nodes_.size()); }
  const NodeRuntime& node(NodeId n) const;
  std::size_t channel_count() const { return channels_.size(); }

  GlobalAddress rpc_alloc(NodeId from, NodeId owner, std::uint64_t size);

  /// Only the owner may free.
  void free_local(NodeId owner, GlobalAddress addr);

  /// Every node (the initiator included) runs barrier, flush_range, barrier
  /// over the range and acks; returns once all acks are in.
  void broadcast_flush(NodeId initiator, GlobalAddress addr, std::uint64_t len);

  /// Registers the range as sealed on every node; the owning region marks
  /// the allocation sealed. Returns once every replica has it.
  void broadcast_seal(NodeId initiator, GlobalAddress addr, std::uint64_t len);

  /// Ships serialized descriptor bytes to every other node, which decode
  /// and keep them. Returns once all peers have them.
  void broadcast_descriptor(NodeId initiator, std::span<const std::byte> bytes);

  /// Sends a FullCopy and waits for delivery; the receiver queues it.
  void send_full_copy(NodeId from, NodeId to, FullCopy copy);
  /// Oldest delivered FullCopy at `node` (sender, message). Throws
  /// Errc::empty if none.
  std::pair<NodeId, FullCopy> take_full_copy(NodeId node);

  /// csm write checked against the writer's sealed replica.
  void write(NodeId node, GlobalAddress addr, std::span<const std::byte> data);

  /// Descriptor encoding and decoding, charged to `node`.
  std::vector<std::byte> serialize(NodeId node, const ipc::AnyDescriptor& desc);
  ipc::AnyDescriptor deserialize(NodeId node, std::span<const std::byte> bytes);

  /// Delivers one message. False if nothing is deliverable.
  bool step();
  /// Delivers until nothing is deliverable; returns the number delivered.
  std::size_t drain();
  /// Pumps until `done` holds. Throws Errc::timeout if the system stalls.
  void run_until(const std::function<bool()>& done, const char* what);

  /// Drains all channels and stops every node. Later sends throw
  /// Errc::shutdown. Returns messages left undeliverable (held by
  /// unresponsive nodes).
  std::size_t shutdown();
  bool is_shut_down() const { return shut_down_; }

  /// Fault injection: an unresponsive node does not process its inbox.
  void set_unresponsive(NodeId n, bool unresponsive);

  const std::vector<Delivery>& deliveries() const { return deliveries_; }
  std::size_t in_flight() const;

 private:
  NodeRuntime& mut(NodeId n);
  void check(NodeId n) const;
  void send(NodeId from, NodeId to, const Message& m);
  void handle(NodeId at, NodeId from, Message m);
  std::deque<std::vector<std::byte>>& channel(NodeId from, NodeId to) {
    return channels_[static_cast<std::size_t>(from) * nodes_.size() + to];
  }

  sim::ClusterMemory& mem_;
  std::vector<NodeRuntime> nodes_;
  std::vector<std::deque<std::vector<std::byte>>> channels_;  // encoded frames
  std::vector<bool> unresponsive_;
  std::optional<std::mt19937_64> rng_;
  std::size_t cursor_ = 0;
  std::uint64_t next_req_id_ = 1;
  std::vector<Delivery> deliveries_;
  bool shut_down_ = false;
};

}  // namespace csm::rt

#endif  // CSM_RT_CLUSTER_HPP_
