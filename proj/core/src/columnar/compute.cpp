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

#include "csm/columnar/compute.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <vector>

#include "csm/bytes.hpp"

namespace csm::columnar {

namespace {

constexpr std::uint64_t kBlockRows = 8192;  // multiple of 8 keeps validity reads byte-aligned

// Calls visit(raw_bits) for every valid element of every chunk.
template <typename Visit>
void for_each_valid(sim::ClusterMemory& mem, NodeId reader, const ChunkedColumn& col,
                    Visit&& visit) {
  if (!is_numeric(col.dtype())) {
    throw Error(Errc::type_mismatch,
                std::string("kernel needs a numeric column, got ") + dtype_name(col.dtype()));
  }
  std::vector<std::byte> data;
  std::vector<std::byte> bits;
  for (const ArrayDescriptor& chunk : col.chunks()) {
    if (!chunk.sealed) throw Error(Errc::unsealed, "array is not sealed");
    for (std::uint64_t r = 0; r < chunk.length; r += kBlockRows) {
      const std::uint64_t n = std::min(kBlockRows, chunk.length - r);
      data.resize(8 * n);
      mem.read_into(reader, chunk.data.addr + 8 * r, data);
      if (chunk.validity) {
        bits.resize((n + 7) / 8);
        mem.read_into(reader, chunk.validity->addr + r / 8, bits);
      }
      for (std::uint64_t i = 0; i < n; ++i) {
        if (chunk.validity && ((std::to_integer<unsigned>(bits[i / 8]) >> (i % 8)) & 1u) == 0) {
          continue;
        }
        visit(load_le<std::uint64_t>(data.data() + 8 * i));
      }
    }
  }
}

Scalar as_scalar(DataType t, std::uint64_t raw) {
  switch (t) {
    case DataType::Int64: return static_cast<std::int64_t>(raw);
    case DataType::Float64: return std::bit_cast<double>(raw);
    default: return raw;
  }
}

}  // namespace

Scalar compute_sum(sim::ClusterMemory& mem, NodeId reader, const ChunkedColumn& col) {
  switch (col.dtype()) {
    case DataType::UInt64: {
      std::uint64_t sum = 0;
      for_each_valid(mem, reader, col, [&](std::uint64_t v) {
        if (__builtin_add_overflow(sum, v, &sum)) throw Error(Errc::overflow, "uint64 sum overflows");
      });
      return sum;
    }
    case DataType::Int64: {
      std::int64_t sum = 0;
      for_each_valid(mem, reader, col, [&](std::uint64_t v) {
        if (__builtin_add_overflow(sum, static_cast<std::int64_t>(v), &sum)) {
          throw Error(Errc::overflow, "int64 sum overflows");
        }
      });
      return sum;
    }
    case DataType::Float64: {
      double sum = 0;
      for_each_valid(mem, reader, col, [&](std::uint64_t v) { sum += std::bit_cast<double>(v); });
      return sum;
    }
    default:
      for_each_valid(mem, reader, col, [](std::uint64_t) {});  // throws
      return std::uint64_t{0};
  }
}

std::pair<Scalar, Scalar> compute_min_max(sim::ClusterMemory& mem, NodeId reader,
                                          const ChunkedColumn& col) {
  const DataType t = col.dtype();
  std::optional<std::uint64_t> lo;
  std::optional<std::uint64_t> hi;
  // Compare decoded values; keep the raw bits of the winners.
  auto less = [t](std::uint64_t a, std::uint64_t b) {
    switch (t) {
      case DataType::Int64: return static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b);
      case DataType::Float64: return std::bit_cast<double>(a) < std::bit_cast<double>(b);
      default: return a < b;
    }
  };
  for_each_valid(mem, reader, col, [&](std::uint64_t v) {
    if (!lo || less(v, *lo)) lo = v;
    if (!hi || less(*hi, v)) hi = v;
  });
  if (!lo) throw Error(Errc::empty, "min/max of a column without valid elements");
  return {as_scalar(t, *lo), as_scalar(t, *hi)};
}

}  // namespace csm::columnar
