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

#include "csm/columnar/access.hpp"

#include <bit>
#include <string>

#include "csm/bytes.hpp"

namespace csm::columnar {

namespace {

void check_readable(const ArrayDescriptor& a, std::uint64_t row) {
  if (!a.sealed) throw Error(Errc::unsealed, "array is not sealed");
  if (row >= a.length) {
    throw Error(Errc::out_of_range, "row " + std::to_string(row) + " out of range for array of " +
                                        std::to_string(a.length) + " rows");
  }
}

bool bit_set(std::byte b, std::uint64_t bit) {
  return (std::to_integer<unsigned>(b) >> (bit % 8) & 1u) != 0;
}

Scalar decode_fixed(DataType t, const std::byte* p, std::uint64_t row) {
  switch (t) {
    case DataType::UInt64: return load_le<std::uint64_t>(p);
    case DataType::Int64: return static_cast<std::int64_t>(load_le<std::uint64_t>(p));
    case DataType::Float64: return std::bit_cast<double>(load_le<std::uint64_t>(p));
    case DataType::Bool: return bit_set(*p, row);
    case DataType::Utf8: break;
  }
  throw Error(Errc::type_mismatch, "not a fixed-width type");
}

}  // namespace

std::optional<Scalar> array_get(sim::ClusterMemory& mem, NodeId reader,
                                const ArrayDescriptor& array, std::uint64_t row) {
  check_readable(array, row);
  if (array.validity) {
    std::byte b;
    mem.read_into(reader, array.validity->addr + row / 8, {&b, 1});
    if (!bit_set(b, row)) return std::nullopt;
  }
  if (array.dtype == DataType::Utf8) {
    std::byte raw[8];
    mem.read_into(reader, array.offsets->addr + 4 * row, raw);
    const auto begin = load_le<std::uint32_t>(raw);
    const auto end = load_le<std::uint32_t>(raw + 4);
    if (begin > end || end > array.data.len) {
      throw Error(Errc::invalid_argument, "malformed utf8 offsets at row " + std::to_string(row));
    }
    std::string s(end - begin, '\0');
    if (!s.empty()) {
      mem.read_into(reader, array.data.addr + begin,
                    {reinterpret_cast<std::byte*>(s.data()), s.size()});
    }
    return s;
  }
  if (array.dtype == DataType::Bool) {
    std::byte b;
    mem.read_into(reader, array.data.addr + row / 8, {&b, 1});
    return decode_fixed(DataType::Bool, &b, row);
  }
  std::byte raw[8];
  mem.read_into(reader, array.data.addr + 8 * row, raw);
  return decode_fixed(array.dtype, raw, row);
}

std::optional<Scalar> chunked_get(sim::ClusterMemory& mem, NodeId reader,
                                  const ChunkedColumn& col, std::uint64_t row) {
  const auto [chunk, local] = col.locate(row);
  return array_get(mem, reader, col.chunks()[chunk], local);
}

std::vector<std::optional<Scalar>> array_gather(sim::ClusterMemory& mem, NodeId reader,
                                                const ArrayDescriptor& array,
                                                std::span<const std::uint64_t> rows) {
  if (array.dtype == DataType::Utf8) {
    throw Error(Errc::type_mismatch, "array_gather needs a fixed-width array");
  }
  for (std::uint64_t r : rows) check_readable(array, r);

  const std::uint64_t width = array.dtype == DataType::Bool ? 1 : value_width(array.dtype);
  std::vector<sim::Extent> extents;
  extents.reserve(rows.size() * (array.validity ? 2 : 1));
  for (std::uint64_t r : rows) {
    const std::uint64_t off = array.dtype == DataType::Bool ? r / 8 : r * width;
    extents.push_back({array.data.addr + off, width});
    if (array.validity) extents.push_back({array.validity->addr + r / 8, 1});
  }
  std::vector<std::byte> buf(rows.size() * (width + (array.validity ? 1 : 0)));
  mem.read_gather(reader, extents, buf);

  std::vector<std::optional<Scalar>> out;
  out.reserve(rows.size());
  const std::byte* p = buf.data();
  for (std::uint64_t r : rows) {
    const std::byte* value = p;
    p += width;
    if (array.validity) {
      const bool valid = bit_set(*p, r);
      ++p;
      if (!valid) {
        out.emplace_back(std::nullopt);
        continue;
      }
    }
    out.emplace_back(decode_fixed(array.dtype, value, r));
  }
  return out;
}

void validate_content(sim::ClusterMemory& mem, NodeId reader, const ArrayDescriptor& array) {
  array.validate_structure();
  if (array.validity) {
    const std::vector<std::byte> bits = mem.read(reader, array.validity->addr, (array.length + 7) / 8);
    std::uint64_t set = 0;
    for (std::uint64_t i = 0; i < bits.size(); ++i) {
      unsigned byte = std::to_integer<unsigned>(bits[i]);
      if (i == bits.size() - 1 && array.length % 8 != 0) byte &= (1u << (array.length % 8)) - 1;
      set += static_cast<std::uint64_t>(std::popcount(byte));
    }
    if (array.length - set != array.null_count) {
      throw Error(Errc::invalid_argument, "null_count does not match the validity bitmap");
    }
  }
  if (array.dtype == DataType::Utf8) {
    const std::vector<std::byte> raw = mem.read(reader, array.offsets->addr, 4 * (array.length + 1));
    std::uint32_t prev = load_le<std::uint32_t>(raw.data());
    if (prev != 0) throw Error(Errc::invalid_argument, "first utf8 offset must be 0");
    for (std::uint64_t i = 1; i <= array.length; ++i) {
      const auto cur = load_le<std::uint32_t>(raw.data() + 4 * i);
      if (cur < prev) throw Error(Errc::invalid_argument, "utf8 offsets decrease");
      prev = cur;
    }
    if (prev > array.data.len) {
      throw Error(Errc::invalid_argument, "utf8 offsets run past the data buffer");
    }
  }
}

}  // namespace csm::columnar
