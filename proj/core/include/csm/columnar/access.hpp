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

#ifndef CSM_COLUMNAR_ACCESS_HPP_
#define CSM_COLUMNAR_ACCESS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csm/columnar/types.hpp"
#include "csm/sim/cluster_memory.hpp"

namespace csm::columnar {

/// Value at `row`, read through `reader`'s cache; nullopt for nulls.
std::optional<Scalar> array_get(sim::ClusterMemory& mem, NodeId reader,
                                const ArrayDescriptor& array, std::uint64_t row);

std::optional<Scalar> chunked_get(sim::ClusterMemory& mem, NodeId reader,
                                  const ChunkedColumn& col, std::uint64_t row);

/// Batched array_get for fixed-width arrays: all rows are fetched with one
/// gathered memory request.
std::vector<std::optional<Scalar>> array_gather(sim::ClusterMemory& mem, NodeId reader,
                                                const ArrayDescriptor& array,
                                                std::span<const std::uint64_t> rows);

/// Checks the invariants that depend on buffer contents: Utf8 offsets start
/// at 0, never decrease and stay within the data buffer; null_count matches
/// the validity bitmap. Throws Errc::invalid_argument.
void validate_content(sim::ClusterMemory& mem, NodeId reader, const ArrayDescriptor& array);

}  // namespace csm::columnar

#endif  // CSM_COLUMNAR_ACCESS_HPP_
