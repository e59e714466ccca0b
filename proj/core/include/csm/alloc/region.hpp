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

#ifndef CSM_ALLOC_REGION_HPP_
#define CSM_ALLOC_REGION_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "csm/common.hpp"
#include "csm/sim/segment_map.hpp"

namespace csm::alloc {

struct AllocRecord {
  GlobalAddress addr;
  std::uint64_t requested = 0;
  std::uint64_t reserved = 0;  // requested rounded up to whole cache lines
  bool sealed = false;
};

struct FreeSpan {
  std::uint64_t offset = 0;  // relative to the region base
  std::uint64_t length = 0;
  bool operator==(const FreeSpan&) const = default;
};

struct RegionStats {
  std::uint64_t size = 0;
  std::uint64_t live = 0;
  std::uint64_t free_spans = 0;
  std::uint64_t largest_free = 0;

  nlohmann::json to_json() const;
};

/// First-fit allocator over a line-aligned window of the owner's segment.
/// Every allocation starts on its own cache line, so no two objects ever
/// share a line. Bookkeeping is host-side; nothing is stored in the shared
/// address space. Only the owner's runtime may call the mutating methods.
class Region {
 public:
  /// Throws Errc::misaligned, Errc::invalid_argument (empty) or
  /// Errc::out_of_range (not inside a segment of `owner`).
  Region(NodeId owner, GlobalAddress base, std::uint64_t size, const sim::SegmentMap& segments);

  /// Lowest-addressed free span that fits. Throws Errc::out_of_memory.
  GlobalAddress alloc(std::uint64_t size);

  /// Throws Errc::unknown_address, Errc::double_free or Errc::sealed.
  void free(GlobalAddress addr);

  /// Marks a live allocation immutable (and immortal).
  void seal(GlobalAddress addr);

  NodeId owner() const { return owner_; }
  GlobalAddress base() const { return base_; }
  std::uint64_t size() const { return size_; }
  bool contains(GlobalAddress a) const { return a >= base_ && a < base_ + size_; }

  const AllocRecord* find(GlobalAddress addr) const;
  std::vector<FreeSpan> free_list() const;
  const std::map<std::uint64_t, AllocRecord>& allocations() const { return live_; }
  RegionStats stats() const;

 private:
  NodeId owner_;
  GlobalAddress base_;
  std::uint64_t size_;
  std::map<std::uint64_t, std::uint64_t> free_;  // offset -> length
  std::map<std::uint64_t, AllocRecord> live_;    // absolute address -> record
  std::set<std::uint64_t> freed_;  // freed and not yet reused, to report double frees
};

}  // namespace csm::alloc

#endif  // CSM_ALLOC_REGION_HPP_
