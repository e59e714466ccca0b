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

#ifndef CSM_SIM_CLUSTER_MEMORY_HPP_
#define CSM_SIM_CLUSTER_MEMORY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <list>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "csm/common.hpp"
#include "csm/sim/cost_model.hpp"
#include "csm/sim/ledger.hpp"
#include "csm/sim/segment_map.hpp"

namespace csm::sim {

enum class CoherenceLevel {
  nc_csm,  // no snooping of the owner's cache
  lc_csm,  // coherent within a node only; the modeled target
  gc_csm,  // globally coherent; used as a test oracle
};

struct CacheLine {
  GlobalAddress line_addr;
  std::array<std::byte, kLineSize> data{};
  bool dirty = false;
};

/// Write-back cache of one node. Unbounded unless a line capacity is given,
/// in which case the least recently used line is the eviction victim.
class NodeCache {
 public:
  explicit NodeCache(std::uint64_t capacity_lines = 0) : capacity_(capacity_lines) {}

  // lookup() refreshes recency; peek() does not.
  CacheLine* lookup(std::uint64_t line);
  const CacheLine* peek(std::uint64_t line) const;
  CacheLine* peek(std::uint64_t line);

  // The line must be absent and the cache not full.
  CacheLine& insert(std::uint64_t line);
  std::optional<CacheLine> erase(std::uint64_t line);

  bool full() const { return capacity_ != 0 && lines_.size() >= capacity_; }
  std::uint64_t lru_victim() const { return lru_.back(); }
  std::size_t size() const { return lines_.size(); }
  std::uint64_t capacity() const { return capacity_; }

  std::vector<std::uint64_t> sorted_lines() const;
  std::vector<std::uint64_t> lines_in(std::uint64_t first_line, std::uint64_t end) const;

 private:
  struct Slot {
    CacheLine line;
    std::list<std::uint64_t>::iterator lru;
  };

  std::uint64_t capacity_;
  std::unordered_map<std::uint64_t, Slot> lines_;
  std::list<std::uint64_t> lru_;  // front = most recent; only used when bounded
};

struct Extent {
  GlobalAddress addr;
  std::uint64_t len = 0;
};

struct MemoryOptions {
  CostModel costs;
  CoherenceLevel level = CoherenceLevel::lc_csm;
  // Arms the adversary (spontaneous evictions and delayed write-backs).
  std::optional<std::uint64_t> eviction_seed;
  // Per-node cache capacity in lines; 0 = unbounded.
  std::uint64_t cache_capacity_lines = 0;
};

/// Cluster-global byte-addressable memory with one write-back cache per node.
///
/// Reads go to the reader's own cache, then (LC-CSM) the owner's cache, then
/// the backing store. Writes allocate into the writer's cache and stay there
/// until flushed or evicted; no other node's cache is ever invalidated. Every
/// operation appends to the cost ledger. All calls must be externally
/// serialized.
class ClusterMemory {
 public:
  explicit ClusterMemory(SegmentMap segments, MemoryOptions options = {});

  ClusterMemory(const ClusterMemory&) = delete;
  ClusterMemory& operator=(const ClusterMemory&) = delete;

  std::vector<std::byte> read(NodeId node, GlobalAddress addr, std::uint64_t len);
  void read_into(NodeId node, GlobalAddress addr, std::span<std::byte> out);

  // One batched request covering several extents; `out` receives them
  // back to back. The link round trip is paid at most once for the batch.
  void read_gather(NodeId node, std::span<const Extent> extents, std::span<std::byte> out);

  void write(NodeId node, GlobalAddress addr, std::span<const std::byte> data);

  /// Writes back dirty lines of [addr, addr+len) held by `node` and drops all
  /// of them from its cache. Returns the number of lines dropped.
  std::uint64_t flush_range(NodeId node, GlobalAddress addr, std::uint64_t len);

  /// Orders memory operations of `node`: any delayed write-backs it has in
  /// flight land before the barrier completes.
  void barrier(NodeId node);

  bool adversarial() const { return rng_.has_value(); }
  void step_adversary();
  // Take `steps` adversary steps before every memory operation.
  void set_auto_adversary(unsigned steps) { auto_steps_ = steps; }

  // Introspection, free of cost and side effects.
  std::vector<std::byte> backing_peek(GlobalAddress addr, std::uint64_t len) const;
  std::optional<CacheLine> cache_peek(NodeId node, GlobalAddress line_addr) const;
  std::size_t cached_lines(NodeId node) const { return caches_.at(node).size(); }
  std::size_t pending_writebacks(NodeId node) const { return pending_.at(node).size(); }

  const SegmentMap& segments() const { return segments_; }
  NodeId owner_of(GlobalAddress a) const { return segments_.owner_of(a); }
  std::uint32_t node_count() const { return static_cast<std::uint32_t>(caches_.size()); }
  CoherenceLevel level() const { return level_; }
  const PriceTable& prices() const { return prices_; }
  const CostLedger& ledger() const { return ledger_; }

  // Charges work done outside the memory system (messages, allocator
  // service time, descriptor encoding).
  void record(TraceEvent ev) { ledger_.record(ev); }

 private:
  struct Meter {
    Charges charges;
    SimDuration cost;
    bool crossed_link = false;
  };
  struct Pending {
    std::uint64_t line;
    std::array<std::byte, kLineSize> data;
  };

  void check_node(NodeId node) const;
  void check_range(GlobalAddress addr, std::uint64_t len) const;
  void before_op();

  CacheLine& fill(NodeId node, std::uint64_t line, Meter& m);
  const std::array<std::byte, kLineSize>* pending_copy(NodeId node, std::uint64_t line) const;
  // A newer write-back of a line makes queued older ones moot.
  void supersede_pending(NodeId node, std::uint64_t line);
  void make_room(NodeId node);
  void write_back(NodeId node, std::uint64_t line, const std::array<std::byte, kLineSize>& data,
                  Meter& m);
  void read_extent(NodeId node, GlobalAddress addr, std::span<std::byte> out, Meter& m);
  void finish(NodeId node, EventKind kind, GlobalAddress addr, std::uint64_t len, Meter& m);
  void drop_line(NodeId node, std::uint64_t line, bool write_dirty);

  SegmentMap segments_;
  CoherenceLevel level_;
  PriceTable prices_;
  std::unique_ptr<std::byte[]> backing_;
  std::vector<NodeCache> caches_;
  std::vector<std::deque<Pending>> pending_;
  std::optional<std::mt19937_64> rng_;
  unsigned auto_steps_ = 0;
  CostLedger ledger_;
};

}  // namespace csm::sim

#endif  // CSM_SIM_CLUSTER_MEMORY_HPP_
