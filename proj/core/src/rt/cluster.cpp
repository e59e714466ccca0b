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

#include "csm/rt/cluster.hpp"

#include <string>
#include <utility>

namespace csm::rt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

const alloc::Region& NodeRuntime::region() const {
  if (!region_) throw Error(Errc::invalid_argument, "node owns no memory");
  return *region_;
}

Cluster::Cluster(sim::ClusterMemory& memory, RuntimeOptions options)
    : mem_(memory), nodes_(memory.node_count()), unresponsive_(memory.node_count(), false) {
  channels_.resize(nodes_.size() * nodes_.size());
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    nodes_[n].id_ = n;
    if (const sim::Segment* seg = mem_.segments().segment_of(n)) {
      nodes_[n].region_.emplace(n, seg->base, seg->size, mem_.segments());
    }
  }
  if (options.schedule_seed) rng_.emplace(*options.schedule_seed);
}

void Cluster::check(NodeId n) const {
  if (n >= nodes_.size()) throw Error(Errc::out_of_range, "no node " + std::to_string(n));
}

const NodeRuntime& Cluster::node(NodeId n) const {
  check(n);
  return nodes_[n];
}

NodeRuntime& Cluster::mut(NodeId n) {
  check(n);
  return nodes_[n];
}

void Cluster::send(NodeId from, NodeId to, const Message& m) {
  check(from);
  check(to);
  if (shut_down_) throw Error(Errc::shutdown, "cluster is shut down");
  auto frame = encode_frame(m);
  const std::uint64_t payload = frame.size() - 5;
  sim::TraceEvent ev;
  ev.node = from;
  ev.kind = sim::EventKind::msg;
  ev.len = payload;
  ev.peer = to;
  ev.cost = mem_.prices().message(payload, from == to);
  if (const auto* f = std::get_if<FlushRequest>(&m)) ev.addr = f->addr.value;
  if (const auto* s = std::get_if<SealNotice>(&m)) ev.addr = s->addr.value;
  mem_.record(ev);
  channel(from, to).push_back(std::move(frame));
}

std::size_t Cluster::in_flight() const {
  std::size_t n = 0;
  for (const auto& c : channels_) n += c.size();
  return n;
}

bool Cluster::step() {
  const std::size_t nodes = nodes_.size();
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const std::size_t to = i % nodes;
    if (!channels_[i].empty() && !unresponsive_[to] && !nodes_[to].stopped_) ready.push_back(i);
  }
  if (ready.empty()) return false;
  std::size_t pick;
  if (rng_) {
    pick = ready[(*rng_)() % ready.size()];
  } else {
    pick = ready.front();
    for (std::size_t i : ready) {
      if (i >= cursor_) {
        pick = i;
        break;
      }
    }
    cursor_ = pick + 1;
  }
  const auto from = static_cast<NodeId>(pick / nodes);
  const auto to = static_cast<NodeId>(pick % nodes);
  std::vector<std::byte> frame = std::move(channels_[pick].front());
  channels_[pick].pop_front();
  Message m = decode_frame(frame);
  frame = {};
  deliveries_.push_back({from, to, kind_of(m)});
  handle(to, from, std::move(m));
  return true;
}

std::size_t Cluster::drain() {
  std::size_t n = 0;
  while (step()) ++n;
  return n;
}

void Cluster::run_until(const std::function<bool()>& done, const char* what) {
  while (!done()) {
    if (!step()) throw Error(Errc::timeout, std::string("timed out waiting for ") + what);
  }
}

void Cluster::handle(NodeId at, NodeId from, Message m) {
  NodeRuntime& self = nodes_[at];
  ++self.handled_;
  std::visit(
      overloaded{
          [&](AllocRequest& r) {
            AllocResponse resp;
            sim::TraceEvent ev;
            ev.node = at;
            ev.kind = sim::EventKind::alloc;
            ev.len = r.size;
            ev.peer = from;
            ev.charges.alloc_overheads = from != at ? 1 : 0;
            if (self.region_ && r.size > 0) {
              try {
                resp.addr = self.region_->alloc(r.size);
                resp.ok = true;
              } catch (const Error& e) {
                if (e.code() != Errc::out_of_memory) throw;
              }
            }
            ev.addr = resp.addr.value;
            ev.cost = mem_.prices().alloc_overhead() * ev.charges.alloc_overheads;
            mem_.record(ev);
            send(at, from, resp);
          },
          [&](AllocResponse& r) { self.alloc_replies_[from].push_back(r); },
          [&](FlushRequest& r) {
            mem_.barrier(at);
            mem_.flush_range(at, r.addr, r.len);
            mem_.barrier(at);
            send(at, from, FlushAck{r.req_id});
          },
          [&](FlushAck& r) { ++self.acks_[r.req_id]; },
          [&](SealNotice& r) {
            self.sealed_.add(r.addr, r.len);
            if (self.region_ && self.region_->contains(r.addr) && self.region_->find(r.addr)) {
              self.region_->seal(r.addr);
            }
          },
          [&](DescriptorBroadcast& r) { self.descriptors_.push_back(deserialize(at, r.bytes)); },
          [&](FullCopy& r) { self.full_copies_.emplace_back(from, std::move(r)); },
          [&](Shutdown&) { self.stopped_ = true; },
      },
      m);
}

GlobalAddress Cluster::rpc_alloc(NodeId from, NodeId owner, std::uint64_t size) {
  check(from);
  check(owner);
  if (size == 0) throw Error(Errc::invalid_argument, "allocation size must be positive");
  if (!nodes_[owner].region_) {
    throw Error(Errc::invalid_argument, "node " + std::to_string(owner) + " owns no memory");
  }
  send(from, owner, AllocRequest{size});
  auto& replies = nodes_[from].alloc_replies_[owner];
  run_until([&] { return !replies.empty(); }, "AllocResponse");
  const AllocResponse r = replies.front();
  replies.pop_front();
  if (!r.ok) {
    throw Error(Errc::out_of_memory, "node " + std::to_string(owner) + " cannot allocate " +
                                         std::to_string(size) + " bytes");
  }
  return r.addr;
}

void Cluster::free_local(NodeId owner, GlobalAddress addr) {
  NodeRuntime& n = mut(owner);
  if (!n.region_ || !n.region_->contains(addr)) {
    throw Error(Errc::invalid_argument, "only the owner can free an allocation");
  }
  const alloc::AllocRecord* rec = n.region_->find(addr);
  const std::uint64_t len = rec ? rec->requested : 0;
  n.region_->free(addr);
  sim::TraceEvent ev;
  ev.node = owner;
  ev.kind = sim::EventKind::free;
  ev.addr = addr.value;
  ev.len = len;
  ev.peer = owner;
  mem_.record(ev);
}

void Cluster::broadcast_flush(NodeId initiator, GlobalAddress addr, std::uint64_t len) {
  check(initiator);
  const std::uint64_t id = next_req_id_++;
  for (NodeId n = 0; n < nodes_.size(); ++n) send(initiator, n, FlushRequest{addr, len, id});
  auto& acks = nodes_[initiator].acks_;
  run_until([&] { return acks[id] == nodes_.size(); }, "FlushAck");
  acks.erase(id);
}

void Cluster::broadcast_seal(NodeId initiator, GlobalAddress addr, std::uint64_t len) {
  check(initiator);
  for (NodeId n = 0; n < nodes_.size(); ++n) send(initiator, n, SealNotice{addr, len});
  run_until(
      [&] {
        for (const NodeRuntime& n : nodes_) {
          if (!n.sealed_.contains(addr, len)) return false;
        }
        return true;
      },
      "SealNotice delivery");
}

void Cluster::broadcast_descriptor(NodeId initiator, std::span<const std::byte> bytes) {
  check(initiator);
  std::vector<std::size_t> before(nodes_.size());
  for (NodeId n = 0; n < nodes_.size(); ++n) before[n] = nodes_[n].descriptors_.size();
  DescriptorBroadcast msg{{bytes.begin(), bytes.end()}};
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    if (n != initiator) send(initiator, n, msg);
  }
  run_until(
      [&] {
        for (NodeId n = 0; n < nodes_.size(); ++n) {
          if (n != initiator && nodes_[n].descriptors_.size() == before[n]) return false;
        }
        return true;
      },
      "DescriptorBroadcast delivery");
}

void Cluster::send_full_copy(NodeId from, NodeId to, FullCopy copy) {
  const std::size_t before = mut(to).full_copies_.size();
  send(from, to, std::move(copy));
  run_until([&] { return nodes_[to].full_copies_.size() > before; }, "FullCopy delivery");
}

std::pair<NodeId, FullCopy> Cluster::take_full_copy(NodeId node) {
  auto& q = mut(node).full_copies_;
  if (q.empty()) throw Error(Errc::empty, "no FullCopy delivered");
  auto out = std::move(q.front());
  q.pop_front();
  return out;
}

void Cluster::write(NodeId node, GlobalAddress addr, std::span<const std::byte> data) {
  if (mut(node).sealed_.overlaps(addr, data.size())) {
    throw Error(Errc::sealed, "write into a sealed range");
  }
  mem_.write(node, addr, data);
}

std::vector<std::byte> Cluster::serialize(NodeId node, const ipc::AnyDescriptor& desc) {
  check(node);
  auto bytes = ipc::serialize_descriptor(desc);
  sim::TraceEvent ev;
  ev.node = node;
  ev.kind = sim::EventKind::serialize;
  ev.len = bytes.size();
  ev.peer = node;
  ev.cost = mem_.prices().serialize(bytes.size());
  mem_.record(ev);
  return bytes;
}

ipc::AnyDescriptor Cluster::deserialize(NodeId node, std::span<const std::byte> bytes) {
  check(node);
  sim::TraceEvent ev;
  ev.node = node;
  ev.kind = sim::EventKind::deserialize;
  ev.len = bytes.size();
  ev.peer = node;
  ev.cost = mem_.prices().serialize(bytes.size());
  mem_.record(ev);
  return ipc::deserialize_descriptor(bytes);
}

std::size_t Cluster::shutdown() {
  if (shut_down_) return in_flight();
  drain();
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    if (!unresponsive_[n]) send(n, n, Shutdown{});
  }
  drain();
  shut_down_ = true;
  return in_flight();
}

void Cluster::set_unresponsive(NodeId n, bool unresponsive) {
  check(n);
  unresponsive_[n] = unresponsive;
}

}  // namespace csm::rt
