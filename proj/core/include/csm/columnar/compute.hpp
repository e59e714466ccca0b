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

#ifndef CSM_COLUMNAR_COMPUTE_HPP_
#define CSM_COLUMNAR_COMPUTE_HPP_

#include <utility>

#include "csm/columnar/types.hpp"
#include "csm/sim/cluster_memory.hpp"

namespace csm::columnar {

// Kernels stream every chunk through the reader's cache, wherever the chunk
// lives. Nulls are skipped.

/// Sum of the valid elements; an all-null or empty column sums to zero of
/// the column type. Integer overflow throws Errc::overflow; non-numeric
/// columns throw Errc::type_mismatch.
Scalar compute_sum(sim::ClusterMemory& mem, NodeId reader, const ChunkedColumn& col);

/// Throws Errc::empty when no element is valid.
std::pair<Scalar, Scalar> compute_min_max(sim::ClusterMemory& mem, NodeId reader,
                                          const ChunkedColumn& col);

}  // namespace csm::columnar

#endif  // CSM_COLUMNAR_COMPUTE_HPP_
