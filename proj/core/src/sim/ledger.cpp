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

#include "csm/sim/ledger.hpp"

#include <ostream>
#include <sstream>

namespace csm::sim {

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::read: return "read";
    case EventKind::write: return "write";
    case EventKind::flush: return "flush";
    case EventKind::barrier: return "barrier";
    case EventKind::evict: return "evict";
    case EventKind::snoop: return "snoop";
    case EventKind::writeback: return "writeback";
    case EventKind::msg: return "msg";
    case EventKind::alloc: return "alloc";
    case EventKind::free: return "free";
    case EventKind::serialize: return "serialize";
    case EventKind::deserialize: return "deserialize";
  }
  return "unknown";
}

Charges& Charges::operator+=(const Charges& o) {
  local_fetches += o.local_fetches;
  remote_fetches += o.remote_fetches;
  snoops += o.snoops;
  rtts += o.rtts;
  flush_local += o.flush_local;
  flush_remote += o.flush_remote;
  local_writebacks += o.local_writebacks;
  remote_writebacks += o.remote_writebacks;
  lines_removed += o.lines_removed;
  alloc_overheads += o.alloc_overheads;
  return *this;
}

void CostLedger::record(TraceEvent ev) {
  if (ev.node >= counters_.size()) counters_.resize(ev.node + 1);
  NodeCounters& c = counters_[ev.node];
  c.lines_fetched_local += ev.charges.local_fetches;
  c.lines_fetched_remote += ev.charges.remote_fetches;
  c.lines_flushed += ev.kind == EventKind::flush ? ev.charges.lines_removed : 0;
  c.owner_snoops += ev.charges.snoops;
  if (ev.kind == EventKind::msg && ev.peer != ev.node) c.bytes_over_ethernet += ev.len;
  c.simulated_time += ev.cost;
  total_ += ev.cost;

  if (ev.kind == EventKind::evict && !trace_.empty()) {
    TraceEvent& last = trace_.back();
    if (last.kind == EventKind::evict && last.node == ev.node && last.addr + last.len == ev.addr) {
      last.len += ev.len;
      last.charges += ev.charges;
      last.cost += ev.cost;
      return;
    }
  }
  ev.seq = next_seq_++;
  trace_.push_back(ev);
}

SimDuration CostLedger::cost_between(std::size_t from, std::size_t to) const {
  SimDuration sum;
  for (std::size_t i = from; i < to && i < trace_.size(); ++i) sum += trace_[i].cost;
  return sum;
}

void CostLedger::write_jsonl(std::ostream& os) const {
  for (const TraceEvent& ev : trace_) {
    os << "{\"seq\":" << ev.seq << ",\"node\":" << ev.node << ",\"op\":\""
       << event_kind_name(ev.kind) << "\",\"addr\":" << ev.addr << ",\"len\":" << ev.len;
    if (ev.kind == EventKind::msg) os << ",\"to\":" << ev.peer;
    // Exact decimal rendering of integer picoseconds.
    os << ",\"cost_ns\":" << ev.cost.ps / 1000 << '.';
    const auto frac = ev.cost.ps % 1000;
    os << static_cast<char>('0' + frac / 100) << static_cast<char>('0' + frac / 10 % 10)
       << static_cast<char>('0' + frac % 10) << "}\n";
  }
}

std::string CostLedger::to_jsonl() const {
  std::ostringstream os;
  write_jsonl(os);
  return os.str();
}

SimDuration price_event(const TraceEvent& ev, const PriceTable& p) {
  switch (ev.kind) {
    case EventKind::msg:
      return p.message(ev.len, ev.peer == ev.node);
    case EventKind::serialize:
    case EventKind::deserialize:
      return p.serialize(ev.len);
    default:
      break;
  }
  const Charges& c = ev.charges;
  return p.local_fetch() * c.local_fetches + p.remote_fetch() * (c.remote_fetches + c.snoops) +
         p.remote_rtt() * c.rtts + p.flush_issue(false) * c.flush_local +
         p.flush_issue(true) * c.flush_remote + p.writeback(false) * c.local_writebacks +
         p.writeback(true) * c.remote_writebacks + p.alloc_overhead() * c.alloc_overheads;
}

SimDuration replay_cost(std::span<const TraceEvent> trace, const PriceTable& prices) {
  SimDuration sum;
  for (const TraceEvent& ev : trace) sum += price_event(ev, prices);
  return sum;
}

}  // namespace csm::sim
