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

#ifndef CSM_PROTOCOL_PROTOCOL_HPP_
#define CSM_PROTOCOL_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csm/columnar/types.hpp"
#include "csm/rt/cluster.hpp"

namespace csm::protocol {

enum class Step { alloc = 1, clear, write, flush, seal };
std::string_view step_name(Step s);

/// Fills `out` with the object bytes starting at `offset`.
using Producer = std::function<void(std::uint64_t offset, std::span<std::byte> out)>;

struct BuildOptions {
  // Turning either flush step off breaks coherence; only hazard tests do it.
  bool pre_write_flush = true;
  bool post_write_flush = true;
  std::uint64_t write_chunk = 1 << 20;
  // Called before (done = false) and after (done = true) each step. The
  // buffer is {0, 0} until the allocation has happened.
  std::function<void(Step, bool done, const columnar::BufferRef&)> observer;
};

/// Allocation on `owner`, cluster-wide flush of the range, write by
/// `writer`, writer-side flush when the memory is remote, seal broadcast.
columnar::BufferRef create_shared_buffer(rt::Cluster& rt, NodeId writer, NodeId owner,
                                         std::uint64_t size, const Producer& producer,
                                         const BuildOptions& options = {});
columnar::BufferRef create_shared_buffer(rt::Cluster& rt, NodeId writer, NodeId owner,
                                         std::span<const std::byte> bytes,
                                         const BuildOptions& options = {});

template <typename T>
using Values = std::vector<std::optional<T>>;

using ColumnValues = std::variant<Values<std::uint64_t>, Values<std::int64_t>, Values<double>,
                                  Values<bool>, Values<std::string>>;

columnar::DataType dtype_of(const ColumnValues& v);
std::uint64_t length_of(const ColumnValues& v);

/// One create_shared_buffer per buffer, in the order validity, offsets,
/// data. Zero-length buffers are not allocated and stay {0, 0}. Throws
/// Errc::type_mismatch if `values` does not hold `dtype`.
columnar::ArrayDescriptor build_array(rt::Cluster& rt, NodeId writer, NodeId owner,
                                      columnar::DataType dtype, const ColumnValues& values,
                                      const BuildOptions& options = {});

/// Non-null fixed-width array whose data bytes come from `producer`, for
/// sizes that should not be materialized host-side.
columnar::ArrayDescriptor build_fixed_array(rt::Cluster& rt, NodeId writer, NodeId owner,
                                            columnar::DataType dtype, std::uint64_t length,
                                            const Producer& producer,
                                            const BuildOptions& options = {});

struct Partition {
  NodeId node = 0;
  std::vector<ColumnValues> columns;  // one per schema field
};

/// Each partition becomes one chunk per column, written and owned by its
/// node. The serialized descriptor is broadcast from the first partition's
/// node.
columnar::TableDescriptor build_spanning_table(rt::Cluster& rt, const columnar::Schema& schema,
                                               const std::vector<Partition>& partitions,
                                               const BuildOptions& options = {});

}  // namespace csm::protocol

#endif  // CSM_PROTOCOL_PROTOCOL_HPP_
