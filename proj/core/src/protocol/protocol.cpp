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

#include "csm/protocol/protocol.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "csm/bytes.hpp"

namespace csm::protocol {

using columnar::ArrayDescriptor;
using columnar::BufferRef;
using columnar::DataType;

std::string_view step_name(Step s) {
  switch (s) {
    case Step::alloc: return "alloc";
    case Step::clear: return "clear";
    case Step::write: return "write";
    case Step::flush: return "flush";
    case Step::seal: return "seal";
  }
  return "?";
}

BufferRef create_shared_buffer(rt::Cluster& rt, NodeId writer, NodeId owner, std::uint64_t size,
                               const Producer& producer, const BuildOptions& options) {
  if (size == 0) throw Error(Errc::invalid_argument, "shared buffer size must be positive");
  if (options.write_chunk == 0) throw Error(Errc::invalid_argument, "write_chunk must be positive");
  auto notify = [&](Step s, bool done, const BufferRef& b) {
    if (options.observer) options.observer(s, done, b);
  };
  sim::ClusterMemory& mem = rt.memory();

  notify(Step::alloc, false, {});
  const BufferRef buf{rt.rpc_alloc(writer, owner, size), size};
  notify(Step::alloc, true, buf);

  notify(Step::clear, false, buf);
  if (options.pre_write_flush) rt.broadcast_flush(owner, buf.addr, size);
  notify(Step::clear, true, buf);

  notify(Step::write, false, buf);
  std::vector<std::byte> chunk(static_cast<std::size_t>(std::min(size, options.write_chunk)));
  for (std::uint64_t off = 0; off < size; off += chunk.size()) {
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(chunk.size(), size - off));
    std::span<std::byte> part(chunk.data(), n);
    producer(off, part);
    rt.write(writer, buf.addr + off, part);
  }
  notify(Step::write, true, buf);

  notify(Step::flush, false, buf);
  if (writer != owner && options.post_write_flush) {
    mem.barrier(writer);
    mem.flush_range(writer, buf.addr, size);
    mem.barrier(writer);
  }
  notify(Step::flush, true, buf);

  notify(Step::seal, false, buf);
  rt.broadcast_seal(writer, buf.addr, size);
  notify(Step::seal, true, buf);
  return buf;
}

BufferRef create_shared_buffer(rt::Cluster& rt, NodeId writer, NodeId owner,
                               std::span<const std::byte> bytes, const BuildOptions& options) {
  return create_shared_buffer(
      rt, writer, owner, bytes.size(),
      [bytes](std::uint64_t off, std::span<std::byte> out) {
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), out.size(), out.begin());
      },
      options);
}

DataType dtype_of(const ColumnValues& v) {
  static constexpr DataType kTypes[] = {DataType::UInt64, DataType::Int64, DataType::Float64,
                                        DataType::Bool, DataType::Utf8};
  return kTypes[v.index()];
}

std::uint64_t length_of(const ColumnValues& v) {
  return std::visit([](const auto& vals) -> std::uint64_t { return vals.size(); }, v);
}

namespace {

BufferRef shared_or_absent(rt::Cluster& rt, NodeId writer, NodeId owner,
                           const std::vector<std::byte>& bytes, const BuildOptions& options) {
  if (bytes.empty()) return {};
  return create_shared_buffer(rt, writer, owner, bytes, options);
}

template <typename T>
std::uint64_t as_word(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<std::uint64_t>(v);
  } else {
    return static_cast<std::uint64_t>(v);
  }
}

struct Encoded {
  std::uint64_t nulls = 0;
  std::vector<std::byte> validity;
  std::vector<std::byte> offsets;
  std::vector<std::byte> data;
  bool has_offsets = false;
};

template <typename T>
Encoded encode(const Values<T>& vals) {
  Encoded e;
  const std::uint64_t n = vals.size();
  std::vector<std::byte> bitmap((n + 7) / 8);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (vals[i]) {
      bitmap[i / 8] |= static_cast<std::byte>(1u << (i % 8));
    } else {
      ++e.nulls;
    }
  }
  if (e.nulls > 0) e.validity = std::move(bitmap);

  if constexpr (std::is_same_v<T, std::string>) {
    e.has_offsets = true;
    e.offsets.resize((n + 1) * 4);
    std::uint64_t pos = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (vals[i]) {
        e.data.insert(e.data.end(), reinterpret_cast<const std::byte*>(vals[i]->data()),
                      reinterpret_cast<const std::byte*>(vals[i]->data()) + vals[i]->size());
        pos += vals[i]->size();
      }
      if (pos > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::overflow, "string data exceeds 32-bit offsets");
      }
      store_le(e.offsets.data() + (i + 1) * 4, static_cast<std::uint32_t>(pos));
    }
  } else if constexpr (std::is_same_v<T, bool>) {
    e.data.resize((n + 7) / 8);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (vals[i] && *vals[i]) e.data[i / 8] |= static_cast<std::byte>(1u << (i % 8));
    }
  } else {
    e.data.resize(n * 8);
    for (std::uint64_t i = 0; i < n; ++i) {
      store_le(e.data.data() + i * 8, vals[i] ? as_word(*vals[i]) : std::uint64_t{0});
    }
  }
  return e;
}

}  // namespace

ArrayDescriptor build_array(rt::Cluster& rt, NodeId writer, NodeId owner, DataType dtype,
                            const ColumnValues& values, const BuildOptions& options) {
  if (dtype_of(values) != dtype) {
    throw Error(Errc::type_mismatch, std::string("values are not ") + columnar::dtype_name(dtype));
  }
  Encoded e = std::visit([](const auto& vals) { return encode(vals); }, values);

  ArrayDescriptor a;
  a.dtype = dtype;
  a.length = length_of(values);
  a.null_count = e.nulls;
  if (e.nulls > 0) a.validity = shared_or_absent(rt, writer, owner, e.validity, options);
  if (e.has_offsets) a.offsets = shared_or_absent(rt, writer, owner, e.offsets, options);
  a.data = shared_or_absent(rt, writer, owner, e.data, options);
  a.sealed = true;
  a.validate_structure();
  return a;
}

ArrayDescriptor build_fixed_array(rt::Cluster& rt, NodeId writer, NodeId owner, DataType dtype,
                                  std::uint64_t length, const Producer& producer,
                                  const BuildOptions& options) {
  if (dtype == DataType::Utf8) {
    throw Error(Errc::type_mismatch, "build_fixed_array needs a fixed-width type");
  }
  ArrayDescriptor a;
  a.dtype = dtype;
  a.length = length;
  const std::uint64_t bytes = columnar::fixed_data_bytes(dtype, length);
  if (bytes > 0) a.data = create_shared_buffer(rt, writer, owner, bytes, producer, options);
  a.sealed = true;
  a.validate_structure();
  return a;
}

columnar::TableDescriptor build_spanning_table(rt::Cluster& rt, const columnar::Schema& schema,
                                               const std::vector<Partition>& partitions,
                                               const BuildOptions& options) {
  if (partitions.empty()) throw Error(Errc::invalid_argument, "no partitions");
  const std::size_t ncols = schema.size();
  std::uint64_t total_rows = 0;
  for (const Partition& p : partitions) {
    if (p.columns.size() != ncols) {
      throw Error(Errc::invalid_argument, "partition column count differs from schema");
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const columnar::Field& f = schema.field(c);
      if (dtype_of(p.columns[c]) != f.dtype) {
        throw Error(Errc::type_mismatch, "partition column '" + f.name + "' has the wrong type");
      }
      const bool has_null = std::visit(
          [](const auto& vals) {
            return std::any_of(vals.begin(), vals.end(), [](const auto& v) { return !v; });
          },
          p.columns[c]);
      if (has_null && !f.nullable) {
        throw Error(Errc::invalid_argument, "nulls in non-nullable column '" + f.name + "'");
      }
      if (length_of(p.columns[c]) != length_of(p.columns[0])) {
        throw Error(Errc::invalid_argument, "partition columns have different lengths");
      }
    }
    total_rows += ncols ? length_of(p.columns[0]) : 0;
  }

  std::vector<std::vector<ArrayDescriptor>> chunks(ncols);
  for (const Partition& p : partitions) {
    for (std::size_t c = 0; c < ncols; ++c) {
      chunks[c].push_back(
          build_array(rt, p.node, p.node, schema.field(c).dtype, p.columns[c], options));
    }
  }

  columnar::TableDescriptor table;
  table.schema = schema;
  table.num_rows = total_rows;
  for (std::size_t c = 0; c < ncols; ++c) {
    table.columns.emplace_back(schema.field(c).dtype, std::move(chunks[c]));
  }
  table.validate_structure();

  const NodeId sender = partitions.front().node;
  const auto bytes = rt.serialize(sender, table);
  rt.broadcast_descriptor(sender, bytes);
  return table;
}

}  // namespace csm::protocol
