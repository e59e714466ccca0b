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

#include "csm/sim/segment_map.hpp"

#include <algorithm>
#include <string>

namespace csm::sim {

SegmentMap::SegmentMap(std::vector<Segment> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Segment& a, const Segment& b) { return a.base < b.base; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Segment& s = entries_[i];
    if (s.size == 0) throw Error(Errc::invalid_argument, "empty segment");
    if (!is_aligned(s.base.value) || !is_aligned(s.size)) {
      throw Error(Errc::misaligned, "segment of node " + std::to_string(s.node) +
                                        " is not aligned to the cache line");
    }
    if (i > 0 && entries_[i - 1].end() > s.base) {
      throw Error(Errc::overlap, "segments of nodes " + std::to_string(entries_[i - 1].node) +
                                     " and " + std::to_string(s.node) + " overlap");
    }
    extent_ = std::max(extent_, s.end().value);
    node_count_ = std::max(node_count_, s.node + 1);
  }
}

SegmentMap SegmentMap::uniform(std::uint32_t nodes, std::uint64_t bytes_per_node) {
  std::vector<Segment> v;
  v.reserve(nodes);
  for (std::uint32_t n = 0; n < nodes; ++n) {
    v.push_back({n, GlobalAddress(n * bytes_per_node), bytes_per_node});
  }
  return SegmentMap(std::move(v));
}

const Segment* SegmentMap::find(GlobalAddress a) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), a,
                             [](GlobalAddress x, const Segment& s) { return x < s.base; });
  if (it == entries_.begin()) return nullptr;
  --it;
  return it->contains(a) ? &*it : nullptr;
}

NodeId SegmentMap::owner_of(GlobalAddress a) const {
  const Segment* s = find(a);
  if (s == nullptr) {
    throw Error(Errc::out_of_range, "address " + std::to_string(a.value) + " is not mapped");
  }
  return s->node;
}

const Segment* SegmentMap::segment_of(NodeId node) const {
  for (const Segment& s : entries_) {
    if (s.node == node) return &s;
  }
  return nullptr;
}

bool SegmentMap::covers(GlobalAddress addr, std::uint64_t len) const {
  if (len == 0) return addr.value <= extent_;
  if (addr.value + len < addr.value) return false;
  GlobalAddress cur = addr;
  const GlobalAddress end = addr + len;
  while (cur < end) {
    const Segment* s = find(cur);
    if (s == nullptr) return false;
    cur = std::min(end, s->end());
  }
  return true;
}

}  // namespace csm::sim
