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

#ifndef CSM_SIM_SEGMENT_MAP_HPP_
#define CSM_SIM_SEGMENT_MAP_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "csm/common.hpp"

namespace csm::sim {

struct Segment {
  NodeId node = 0;
  GlobalAddress base;
  std::uint64_t size = 0;

  GlobalAddress end() const { return base + size; }
  bool contains(GlobalAddress a) const { return a >= base && a < end(); }
};

/// Ownership of the cluster address space. Each segment is lent out by the
/// node that physically holds its memory; that node is the address's owner.
class SegmentMap {
 public:
  SegmentMap() = default;

  /// Validates and sorts the entries. Throws Errc::overlap or Errc::misaligned.
  explicit SegmentMap(std::vector<Segment> entries);

  /// `nodes` equally sized, back-to-back segments starting at address 0.
  static SegmentMap uniform(std::uint32_t nodes, std::uint64_t bytes_per_node);

  const std::vector<Segment>& entries() const { return entries_; }

  /// One past the highest mapped byte; the backing store covers [0, extent).
  std::uint64_t extent() const { return extent_; }

  /// Largest node id plus one.
  std::uint32_t node_count() const { return node_count_; }

  const Segment* find(GlobalAddress a) const;

  /// Throws Errc::out_of_range for addresses outside every segment.
  NodeId owner_of(GlobalAddress a) const;

  /// The (first) segment lent by `node`, if any.
  const Segment* segment_of(NodeId node) const;

  /// True iff every byte of [addr, addr+len) is mapped.
  bool covers(GlobalAddress addr, std::uint64_t len) const;

 private:
  std::vector<Segment> entries_;
  std::uint64_t extent_ = 0;
  std::uint32_t node_count_ = 0;
};

}  // namespace csm::sim

#endif  // CSM_SIM_SEGMENT_MAP_HPP_
