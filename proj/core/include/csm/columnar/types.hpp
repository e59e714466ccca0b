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

#ifndef CSM_COLUMNAR_TYPES_HPP_
#define CSM_COLUMNAR_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csm/common.hpp"

namespace csm::columnar {

// Numeric values double as the wire codes.
enum class DataType : std::uint8_t {
  UInt64 = 1,
  Int64 = 2,
  Float64 = 3,
  Bool = 4,
  Utf8 = 5,
};

const char* dtype_name(DataType t);
std::optional<DataType> dtype_from_code(std::uint8_t code);

// Bytes per value for the 8-byte types; 0 for Bool (bit-packed) and Utf8.
constexpr std::uint64_t value_width(DataType t) {
  return (t == DataType::UInt64 || t == DataType::Int64 || t == DataType::Float64) ? 8 : 0;
}
constexpr bool is_numeric(DataType t) { return value_width(t) == 8; }

// Minimum data-buffer length for `length` values of a fixed-width type.
constexpr std::uint64_t fixed_data_bytes(DataType t, std::uint64_t length) {
  return t == DataType::Bool ? (length + 7) / 8 : length * value_width(t);
}

using Scalar = std::variant<std::uint64_t, std::int64_t, double, bool, std::string>;

struct Field {
  std::string name;
  DataType dtype = DataType::UInt64;
  bool nullable = false;
  bool operator==(const Field&) const = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws Errc::invalid_argument for no fields, empty or duplicate names.
  explicit Schema(std::vector<Field> fields);

  const std::vector<Field>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  const Field& field(std::size_t i) const { return fields_.at(i); }
  bool operator==(const Schema&) const = default;

 private:
  std::vector<Field> fields_;
};

/// Reference to a buffer in the cluster address space. {0, 0} is the absent
/// buffer.
struct BufferRef {
  GlobalAddress addr;
  std::uint64_t len = 0;
  bool operator==(const BufferRef&) const = default;
};

/// Structure of one contiguous array: lengths and buffer references, never
/// the data itself.
struct ArrayDescriptor {
  DataType dtype = DataType::UInt64;
  std::uint64_t length = 0;
  std::uint64_t null_count = 0;
  std::optional<BufferRef> validity;
  std::optional<BufferRef> offsets;  // Utf8 only; 32-bit entries
  BufferRef data;
  bool sealed = false;

  bool operator==(const ArrayDescriptor&) const = default;

  /// Checks the invariants that need no memory access (buffer presence and
  /// minimum lengths). Throws Errc::invalid_argument.
  void validate_structure() const;
};

struct RecordBatchDescriptor {
  Schema schema;
  std::uint64_t num_rows = 0;
  std::vector<ArrayDescriptor> columns;

  bool operator==(const RecordBatchDescriptor&) const = default;
  void validate_structure() const;
};

/// A logical column made of several contiguous arrays, possibly owned by
/// different nodes.
class ChunkedColumn {
 public:
  ChunkedColumn() = default;
  // Throws Errc::type_mismatch if a chunk's dtype differs.
  ChunkedColumn(DataType dtype, std::vector<ArrayDescriptor> chunks);

  DataType dtype() const { return dtype_; }
  const std::vector<ArrayDescriptor>& chunks() const { return chunks_; }
  std::uint64_t length() const { return ends_.empty() ? 0 : ends_.back(); }

  /// (chunk index, row within chunk). Throws Errc::out_of_range.
  std::pair<std::size_t, std::uint64_t> locate(std::uint64_t row) const;

  bool operator==(const ChunkedColumn& o) const {
    return dtype_ == o.dtype_ && chunks_ == o.chunks_;
  }

 private:
  DataType dtype_ = DataType::UInt64;
  std::vector<ArrayDescriptor> chunks_;
  std::vector<std::uint64_t> ends_;  // cumulative chunk lengths
};

struct TableDescriptor {
  Schema schema;
  std::vector<ChunkedColumn> columns;
  std::uint64_t num_rows = 0;

  bool operator==(const TableDescriptor&) const = default;
  void validate_structure() const;
};

}  // namespace csm::columnar

#endif  // CSM_COLUMNAR_TYPES_HPP_
