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

#include "csm/alloc/region.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace csm::alloc {

nlohmann::json RegionStats::to_json() const {
  return {{"size", size}, {"live", live}, {"free_spans", free_spans}, {"largest_free", largest_free}};
}

Region::Region(NodeId owner, GlobalAddress base, std::uint64_t size,
               const sim::SegmentMap& segments)
    : owner_(owner), base_(base), size_(size) {
  if (size == 0) throw Error(Errc::invalid_argument, "empty region");
  if (!is_aligned(base.value) || !is_aligned(size)) {
    throw Error(Errc::misaligned, "region base and size must be multiples of the cache line");
  }
  const sim::Segment* seg = segments.find(base);
  if (seg == nullptr || seg->node != owner || base + size > seg->end()) {
    throw Error(Errc::out_of_range,
                "region does not lie inside a segment of node " + std::to_string(owner));
  }
  free_.emplace(0, size);
}

GlobalAddress Region::alloc(std::uint64_t size) {
  if (size == 0) throw Error(Errc::invalid_argument, "zero-sized allocation");
  const std::uint64_t reserved = align_up(size);
  if (reserved < size) throw Error(Errc::out_of_memory, "allocation size overflows");
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->second < reserved) continue;
    const std::uint64_t offset = it->first;
    const std::uint64_t remaining = it->second - reserved;
    free_.erase(it);
    if (remaining > 0) free_.emplace(offset + reserved, remaining);
    const GlobalAddress addr = base_ + offset;
    live_.emplace(addr.value, AllocRecord{addr, size, reserved, false});
    freed_.erase(freed_.lower_bound(addr.value), freed_.lower_bound(addr.value + reserved));
    return addr;
  }
  throw Error(Errc::out_of_memory, "no free span of " + std::to_string(reserved) +
                                       " bytes in region of node " + std::to_string(owner_));
}

void Region::free(GlobalAddress addr) {
  auto it = live_.find(addr.value);
  if (it == live_.end()) {
    if (freed_.count(addr.value) != 0) {
      throw Error(Errc::double_free, "double free of address " + std::to_string(addr.value));
    }
    throw Error(Errc::unknown_address, "no allocation at address " + std::to_string(addr.value));
  }
  if (it->second.sealed) {
    throw Error(Errc::sealed, "sealed allocation at " + std::to_string(addr.value) +
                                  " cannot be freed");
  }
  std::uint64_t offset = addr - base_;
  std::uint64_t length = it->second.reserved;
  live_.erase(it);
  freed_.insert(addr.value);

  auto next = free_.lower_bound(offset);
  if (next != free_.end() && offset + length == next->first) {
    length += next->second;
    next = free_.erase(next);
  }
  if (next != free_.begin()) {
    auto prev = std::prev(next);
    if (prev->first + prev->second == offset) {
      prev->second += length;
      return;
    }
  }
  free_.emplace(offset, length);
}

void Region::seal(GlobalAddress addr) {
  auto it = live_.find(addr.value);
  if (it == live_.end()) {
    throw Error(Errc::unknown_address, "no allocation at address " + std::to_string(addr.value));
  }
  it->second.sealed = true;
}

const AllocRecord* Region::find(GlobalAddress addr) const {
  auto it = live_.find(addr.value);
  return it == live_.end() ? nullptr : &it->second;
}

std::vector<FreeSpan> Region::free_list() const {
  std::vector<FreeSpan> out;
  out.reserve(free_.size());
  for (const auto& [offset, length] : free_) out.push_back({offset, length});
  return out;
}

RegionStats Region::stats() const {
  RegionStats s;
  s.size = size_;
  s.live = live_.size();
  s.free_spans = free_.size();
  for (const auto& [offset, length] : free_) s.largest_free = std::max(s.largest_free, length);
  return s;
}

}  // namespace csm::alloc
