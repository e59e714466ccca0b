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

#ifndef CSM_PROTOCOL_SEALED_REGISTRY_HPP_
#define CSM_PROTOCOL_SEALED_REGISTRY_HPP_

#include <cstdint>
#include <map>

#include "csm/common.hpp"

namespace csm::protocol {

/// Set of immutable address ranges. Ranges are disjoint and never removed.
/// Each node keeps a replica, fed by SealNotice broadcasts.
class SealedRegistry {
 public:
  /// Re-adding an identical range is a no-op. Throws Errc::overlap if the
  /// range intersects a different sealed range, Errc::invalid_argument if
  /// empty.
  void add(GlobalAddress addr, std::uint64_t len);

  bool overlaps(GlobalAddress addr, std::uint64_t len) const;
  bool contains(GlobalAddress addr, std::uint64_t len) const;
  std::size_t size() const { return ranges_.size(); }
  const std::map<std::uint64_t, std::uint64_t>& ranges() const { return ranges_; }

 private:
  std::map<std::uint64_t, std::uint64_t> ranges_;  // start -> end (exclusive)
};

}  // namespace csm::protocol

#endif  // CSM_PROTOCOL_SEALED_REGISTRY_HPP_
