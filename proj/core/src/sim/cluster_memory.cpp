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

#include "csm/sim/cluster_memory.hpp"

#include <algorithm>
#include <cstring>
#include <string>
#include <utility>

namespace csm::sim {

CacheLine* NodeCache::lookup(std::uint64_t line) {
  auto it = lines_.find(line);
  if (it == lines_.end()) return nullptr;
  if (capacity_ != 0) lru_.splice(lru_.begin(), lru_, it->second.lru);
  return &it->second.line;
}

const CacheLine* NodeCache::peek(std::uint64_t line) const {
  auto it = lines_.find(line);
  return it == lines_.end() ? nullptr : &it->second.line;
}

CacheLine* NodeCache::peek(std::uint64_t line) {
  auto it = lines_.find(line);
  return it == lines_.end() ? nullptr : &it->second.line;
}

CacheLine& NodeCache::insert(std::uint64_t line) {
  auto [it, inserted] = lines_.try_emplace(line);
  if (capacity_ != 0) {
    lru_.push_front(line);
    it->second.lru = lru_.begin();
  }
  it->second.line.line_addr = GlobalAddress(line);
  return it->second.line;
}

std::optional<CacheLine> NodeCache::erase(std::uint64_t line) {
  auto it = lines_.find(line);
  if (it == lines_.end()) return std::nullopt;
  if (capacity_ != 0) lru_.erase(it->second.lru);
  CacheLine out = it->second.line;
  lines_.erase(it);
  return out;
}

std::vector<std::uint64_t> NodeCache::sorted_lines() const {
  std::vector<std::uint64_t> out;
  out.reserve(lines_.size());
  for (const auto& [line, slot] : lines_) out.push_back(line);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> NodeCache::lines_in(std::uint64_t first_line, std::uint64_t end) const {
  std::vector<std::uint64_t> out;
  if ((end - first_line) / kLineSize <= lines_.size()) {
    for (std::uint64_t l = first_line; l < end; l += kLineSize) {
      if (lines_.count(l) != 0) out.push_back(l);
    }
    return out;
  }
  for (const auto& [line, slot] : lines_) {
    if (line >= first_line && line < end) out.push_back(line);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClusterMemory::ClusterMemory(SegmentMap segments, MemoryOptions options)
    : segments_(std::move(segments)),
      level_(options.level),
      prices_(options.costs),
      ledger_(segments_.node_count()) {
  if (segments_.entries().empty()) throw Error(Errc::invalid_argument, "no segments");
  backing_ = std::make_unique<std::byte[]>(segments_.extent());
  caches_.assign(segments_.node_count(), NodeCache(options.cache_capacity_lines));
  pending_.resize(segments_.node_count());
  if (options.eviction_seed) rng_.emplace(*options.eviction_seed);
}

void ClusterMemory::check_node(NodeId node) const {
  if (node >= caches_.size()) {
    throw Error(Errc::out_of_range, "unknown node " + std::to_string(node));
  }
}

void ClusterMemory::check_range(GlobalAddress addr, std::uint64_t len) const {
  if (!segments_.covers(addr, len)) {
    throw Error(Errc::out_of_range, "range [" + std::to_string(addr.value) + ", +" +
                                        std::to_string(len) + ") is not mapped");
  }
}

void ClusterMemory::before_op() {
  if (!rng_) return;
  for (unsigned i = 0; i < auto_steps_; ++i) step_adversary();
}

const std::array<std::byte, kLineSize>* ClusterMemory::pending_copy(NodeId node,
                                                                    std::uint64_t line) const {
  const auto& q = pending_[node];
  for (auto it = q.rbegin(); it != q.rend(); ++it) {
    if (it->line == line) return &it->data;
  }
  return nullptr;
}

void ClusterMemory::write_back(NodeId node, std::uint64_t line,
                               const std::array<std::byte, kLineSize>& data, Meter& m) {
  std::memcpy(backing_.get() + line, data.data(), kLineSize);
  const bool remote = segments_.owner_of(GlobalAddress(line)) != node;
  if (remote) {
    ++m.charges.remote_writebacks;
  } else {
    ++m.charges.local_writebacks;
  }
  m.cost += prices_.writeback(remote);
}

void ClusterMemory::supersede_pending(NodeId node, std::uint64_t line) {
  auto& q = pending_[node];
  if (q.empty()) return;
  std::erase_if(q, [line](const Pending& p) { return p.line == line; });
}

void ClusterMemory::make_room(NodeId node) {
  NodeCache& cache = caches_[node];
  while (cache.full()) {
    const std::uint64_t victim = cache.lru_victim();
    std::optional<CacheLine> old = cache.erase(victim);
    Meter m;
    if (old->dirty) {
      supersede_pending(node, victim);
      write_back(node, victim, old->data, m);
    }
    ledger_.record({0, node, EventKind::evict, victim, kLineSize, 0, m.charges, m.cost});
  }
}

CacheLine& ClusterMemory::fill(NodeId node, std::uint64_t line, Meter& m) {
  NodeCache& cache = caches_[node];
  if (CacheLine* hit = cache.lookup(line)) return *hit;

  std::array<std::byte, kLineSize> data;
  const NodeId owner = segments_.owner_of(GlobalAddress(line));
  const CacheLine* owner_copy = nullptr;
  const std::array<std::byte, kLineSize>* owner_pending = nullptr;
  if (level_ != CoherenceLevel::nc_csm && owner != node) {
    owner_copy = std::as_const(caches_[owner]).peek(line);
    if (owner_copy == nullptr) owner_pending = pending_copy(owner, line);
  }

  if (const auto* own = pending_copy(node, line)) {
    // Store forwarding from this node's own in-flight write-back.
    data = *own;
  } else if (owner_copy != nullptr || owner_pending != nullptr) {
    data = owner_copy != nullptr ? owner_copy->data : *owner_pending;
    m.crossed_link = true;
    Charges c;
    c.snoops = 1;
    ledger_.record({0, node, EventKind::snoop, line, kLineSize, 0, c, prices_.remote_fetch()});
  } else {
    std::memcpy(data.data(), backing_.get() + line, kLineSize);
    if (owner == node) {
      ++m.charges.local_fetches;
      m.cost += prices_.local_fetch();
    } else {
      ++m.charges.remote_fetches;
      m.cost += prices_.remote_fetch();
      m.crossed_link = true;
    }
  }

  make_room(node);
  CacheLine& cl = cache.insert(line);
  cl.data = data;
  cl.dirty = false;
  return cl;
}

void ClusterMemory::read_extent(NodeId node, GlobalAddress addr, std::span<std::byte> out,
                                Meter& m) {
  std::uint64_t pos = 0;
  while (pos < out.size()) {
    const std::uint64_t a = addr.value + pos;
    const std::uint64_t line = align_down(a);
    const std::uint64_t off = a - line;
    const std::uint64_t n = std::min<std::uint64_t>(kLineSize - off, out.size() - pos);
    const CacheLine& cl = fill(node, line, m);
    std::memcpy(out.data() + pos, cl.data.data() + off, n);
    pos += n;
  }
}

void ClusterMemory::finish(NodeId node, EventKind kind, GlobalAddress addr, std::uint64_t len,
                           Meter& m) {
  if (m.crossed_link) {
    ++m.charges.rtts;
    m.cost += prices_.remote_rtt();
  }
  ledger_.record({0, node, kind, addr.value, len, 0, m.charges, m.cost});
}

std::vector<std::byte> ClusterMemory::read(NodeId node, GlobalAddress addr, std::uint64_t len) {
  std::vector<std::byte> out(len);
  read_into(node, addr, out);
  return out;
}

void ClusterMemory::read_into(NodeId node, GlobalAddress addr, std::span<std::byte> out) {
  before_op();
  check_node(node);
  check_range(addr, out.size());
  Meter m;
  read_extent(node, addr, out, m);
  finish(node, EventKind::read, addr, out.size(), m);
}

void ClusterMemory::read_gather(NodeId node, std::span<const Extent> extents,
                                std::span<std::byte> out) {
  before_op();
  check_node(node);
  std::uint64_t total = 0;
  for (const Extent& e : extents) {
    check_range(e.addr, e.len);
    total += e.len;
  }
  if (total != out.size()) {
    throw Error(Errc::invalid_argument, "gather output size does not match the extents");
  }
  Meter m;
  std::uint64_t pos = 0;
  for (const Extent& e : extents) {
    read_extent(node, e.addr, out.subspan(pos, e.len), m);
    pos += e.len;
  }
  const GlobalAddress first = extents.empty() ? GlobalAddress() : extents.front().addr;
  finish(node, EventKind::read, first, total, m);
}

void ClusterMemory::write(NodeId node, GlobalAddress addr, std::span<const std::byte> data) {
  before_op();
  check_node(node);
  check_range(addr, data.size());
  Meter m;
  std::uint64_t pos = 0;
  while (pos < data.size()) {
    const std::uint64_t a = addr.value + pos;
    const std::uint64_t line = align_down(a);
    const std::uint64_t off = a - line;
    const std::uint64_t n = std::min<std::uint64_t>(kLineSize - off, data.size() - pos);
    CacheLine& cl = fill(node, line, m);
    std::memcpy(cl.data.data() + off, data.data() + pos, n);
    if (level_ == CoherenceLevel::gc_csm) {
      write_back(node, line, cl.data, m);
      for (NodeId other = 0; other < caches_.size(); ++other) {
        if (other == node) continue;
        if (CacheLine* copy = caches_[other].peek(line)) {
          copy->data = cl.data;
        }
      }
    } else {
      cl.dirty = true;
    }
    pos += n;
  }
  finish(node, EventKind::write, addr, data.size(), m);
}

std::uint64_t ClusterMemory::flush_range(NodeId node, GlobalAddress addr, std::uint64_t len) {
  before_op();
  check_node(node);
  check_range(addr, len);
  Meter m;
  if (len == 0) {
    finish(node, EventKind::flush, addr, len, m);
    return 0;
  }
  const std::uint64_t first = align_down(addr.value);
  const std::uint64_t end = align_up(addr.value + len);

  // A flush instruction is issued for every line of the range, cached or not.
  for (const Segment& s : segments_.entries()) {
    const std::uint64_t lo = std::max(first, s.base.value);
    const std::uint64_t hi = std::min(end, s.end().value);
    if (lo >= hi) continue;
    const std::uint64_t count = (hi - lo) / kLineSize;
    const bool remote = s.node != node;
    (remote ? m.charges.flush_remote : m.charges.flush_local) += count;
    m.cost += prices_.flush_issue(remote) * count;
  }

  NodeCache& cache = caches_[node];
  std::uint64_t removed = 0;
  for (std::uint64_t line : cache.lines_in(first, end)) {
    std::optional<CacheLine> cl = cache.erase(line);
    if (cl->dirty) {
      supersede_pending(node, line);
      write_back(node, line, cl->data, m);
    }
    ++removed;
  }
  m.charges.lines_removed = removed;
  finish(node, EventKind::flush, addr, len, m);
  return removed;
}

void ClusterMemory::barrier(NodeId node) {
  before_op();
  check_node(node);
  auto& q = pending_[node];
  while (!q.empty()) {
    Meter m;
    write_back(node, q.front().line, q.front().data, m);
    ledger_.record({0, node, EventKind::writeback, q.front().line, kLineSize, 0, m.charges, m.cost});
    q.pop_front();
  }
  ledger_.record({0, node, EventKind::barrier, 0, 0, 0, {}, {}});
}

void ClusterMemory::drop_line(NodeId node, std::uint64_t line, bool write_dirty) {
  std::optional<CacheLine> cl = caches_[node].erase(line);
  Meter m;
  if (write_dirty && cl->dirty) {
    supersede_pending(node, line);
    write_back(node, line, cl->data, m);
  }
  ledger_.record({0, node, EventKind::evict, line, kLineSize, 0, m.charges, m.cost});
}

void ClusterMemory::step_adversary() {
  if (!rng_) throw Error(Errc::invalid_argument, "adversary is not armed");
  auto& rng = *rng_;
  const auto node = static_cast<NodeId>(rng() % caches_.size());
  const unsigned action = static_cast<unsigned>(rng() % 4);

  if (action == 3) {
    // A delayed write-back lands.
    auto& q = pending_[node];
    if (q.empty()) return;
    Meter m;
    write_back(node, q.front().line, q.front().data, m);
    ledger_.record({0, node, EventKind::writeback, q.front().line, kLineSize, 0, m.charges, m.cost});
    q.pop_front();
    return;
  }

  NodeCache& cache = caches_[node];
  const bool want_dirty = action != 0;
  std::vector<std::uint64_t> candidates;
  for (std::uint64_t line : cache.sorted_lines()) {
    if (cache.peek(line)->dirty == want_dirty) candidates.push_back(line);
  }
  if (candidates.empty()) return;
  const std::uint64_t line = candidates[rng() % candidates.size()];

  switch (action) {
    case 0:
    case 1:
      drop_line(node, line, true);
      break;
    case 2: {
      // Castout started but not yet visible in memory; the line turns clean.
      CacheLine* cl = cache.peek(line);
      pending_[node].push_back({line, cl->data});
      cl->dirty = false;
      break;
    }
  }
}

std::vector<std::byte> ClusterMemory::backing_peek(GlobalAddress addr, std::uint64_t len) const {
  if (addr.value > segments_.extent() || len > segments_.extent() - addr.value) {
    throw Error(Errc::out_of_range, "peek outside the backing store");
  }
  return {backing_.get() + addr.value, backing_.get() + addr.value + len};
}

std::optional<CacheLine> ClusterMemory::cache_peek(NodeId node, GlobalAddress line_addr) const {
  check_node(node);
  if (line_addr.value >= segments_.extent()) {
    throw Error(Errc::out_of_range, "peek outside the backing store");
  }
  const CacheLine* cl = caches_[node].peek(line_addr.line().value);
  if (cl == nullptr) return std::nullopt;
  return *cl;
}

}  // namespace csm::sim
