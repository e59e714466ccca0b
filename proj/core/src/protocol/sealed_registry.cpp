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

#include "csm/protocol/sealed_registry.hpp"

#include <iterator>

namespace csm::protocol {

void SealedRegistry::add(GlobalAddress addr, std::uint64_t len) {
  if (len == 0) throw Error(Errc::invalid_argument, "cannot seal an empty range");
  auto it = ranges_.find(addr.value);
  if (it != ranges_.end() && it->second == addr.value + len) return;
  if (overlaps(addr, len)) throw Error(Errc::overlap, "range overlaps a sealed range");
  ranges_.emplace(addr.value, addr.value + len);
}

bool SealedRegistry::overlaps(GlobalAddress addr, std::uint64_t len) const {
  if (len == 0 || ranges_.empty()) return false;
  const std::uint64_t end = addr.value + len;
  // Candidates: the last range starting before `end`.
  auto it = ranges_.lower_bound(end);
  if (it == ranges_.begin()) return false;
  --it;
  return it->second > addr.value;
}

bool SealedRegistry::contains(GlobalAddress addr, std::uint64_t len) const {
  auto it = ranges_.upper_bound(addr.value);
  if (it == ranges_.begin()) return false;
  --it;
  return it->first <= addr.value && addr.value + len <= it->second;
}

}  // namespace csm::protocol
