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

#ifndef CSM_SIM_LEDGER_HPP_
#define CSM_SIM_LEDGER_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csm/common.hpp"
#include "csm/sim/cost_model.hpp"

namespace csm::sim {

enum class EventKind : std::uint8_t {
  read,
  write,
  flush,
  barrier,
  evict,
  snoop,
  writeback,  // completion of a spontaneous (adversarial) write-back
  msg,
  alloc,
  free,
  serialize,
  deserialize,
};

std::string_view event_kind_name(EventKind k);

/// Countable work behind one trace event. The event's cost is a pure function
/// of these counts (plus the message/serialize byte length), which is what
/// lets a trace be re-priced.
struct Charges {
  std::uint64_t local_fetches = 0;
  std::uint64_t remote_fetches = 0;
  std::uint64_t snoops = 0;
  std::uint64_t rtts = 0;
  std::uint64_t flush_local = 0;
  std::uint64_t flush_remote = 0;
  std::uint64_t local_writebacks = 0;
  std::uint64_t remote_writebacks = 0;
  std::uint64_t lines_removed = 0;
  std::uint64_t alloc_overheads = 0;

  Charges& operator+=(const Charges& o);
  bool operator==(const Charges&) const = default;
};

struct TraceEvent {
  std::uint64_t seq = 0;
  NodeId node = 0;
  EventKind kind = EventKind::read;
  std::uint64_t addr = 0;
  std::uint64_t len = 0;
  NodeId peer = 0;  // destination of msg events
  Charges charges;
  SimDuration cost;
};

struct NodeCounters {
  std::uint64_t lines_fetched_local = 0;
  std::uint64_t lines_fetched_remote = 0;
  std::uint64_t lines_flushed = 0;
  std::uint64_t owner_snoops = 0;
  std::uint64_t bytes_over_ethernet = 0;
  SimDuration simulated_time;
};

class CostLedger {
 public:
  explicit CostLedger(std::uint32_t nodes = 0) : counters_(nodes) {}

  /// Appends an event (assigning its seq) and bumps the node counters.
  /// Consecutive evictions of adjacent lines by one node merge into a single
  /// event.
  void record(TraceEvent ev);

  const NodeCounters& node(NodeId n) const { return counters_.at(n); }
  std::uint32_t node_count() const { return static_cast<std::uint32_t>(counters_.size()); }
  SimDuration total() const { return total_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }

  /// Position marker for slicing the trace.
  std::size_t mark() const { return trace_.size(); }
  SimDuration cost_between(std::size_t from, std::size_t to) const;
  SimDuration cost_since(std::size_t from) const { return cost_between(from, trace_.size()); }

  /// One JSON object per line: seq, node, op, addr, len, cost_ns (and `to`
  /// for msg events).
  void write_jsonl(std::ostream& os) const;
  std::string to_jsonl() const;

 private:
  std::vector<NodeCounters> counters_;
  std::vector<TraceEvent> trace_;
  std::uint64_t next_seq_ = 0;
  SimDuration total_;
};

/// Price of one event recomputed from its charges.
SimDuration price_event(const TraceEvent& ev, const PriceTable& prices);

/// Sum of price_event over a trace.
SimDuration replay_cost(std::span<const TraceEvent> trace, const PriceTable& prices);

}  // namespace csm::sim

#endif  // CSM_SIM_LEDGER_HPP_
