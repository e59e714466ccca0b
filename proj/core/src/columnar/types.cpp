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

#include "csm/columnar/types.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace csm::columnar {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::invalid_argument, what); }

void check_buffer(const BufferRef& b, const char* which) {
  if (b.len == 0) {
    if (b.addr.value != 0) invalid(std::string(which) + " buffer of length 0 must have address 0");
    return;
  }
  if (!is_aligned(b.addr.value)) invalid(std::string(which) + " buffer is not line aligned");
}

}  // namespace

const char* dtype_name(DataType t) {
  switch (t) {
    case DataType::UInt64: return "uint64";
    case DataType::Int64: return "int64";
    case DataType::Float64: return "float64";
    case DataType::Bool: return "bool";
    case DataType::Utf8: return "utf8";
  }
  return "unknown";
}

std::optional<DataType> dtype_from_code(std::uint8_t code) {
  if (code < 1 || code > 5) return std::nullopt;
  return static_cast<DataType>(code);
}

Schema::Schema(std::vector<Field> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) invalid("schema needs at least one field");
  std::set<std::string> seen;
  for (const Field& f : fields_) {
    if (f.name.empty()) invalid("field names must be non-empty");
    if (!dtype_from_code(static_cast<std::uint8_t>(f.dtype))) invalid("unknown data type");
    if (!seen.insert(f.name).second) invalid("duplicate field name: " + f.name);
  }
}

void ArrayDescriptor::validate_structure() const {
  if (!dtype_from_code(static_cast<std::uint8_t>(dtype))) invalid("unknown data type");
  if (null_count > length) invalid("null_count exceeds length");
  if (validity.has_value() != (null_count > 0)) {
    invalid("validity buffer must be present exactly when null_count > 0");
  }
  if (validity) {
    check_buffer(*validity, "validity");
    if (validity->len < (length + 7) / 8) invalid("validity buffer too short");
  }
  check_buffer(data, "data");
  if (dtype == DataType::Utf8) {
    if (!offsets) invalid("utf8 array needs an offsets buffer");
    check_buffer(*offsets, "offsets");
    if (offsets->len < 4 * (length + 1)) invalid("offsets buffer too short");
  } else {
    if (offsets) invalid("only utf8 arrays carry offsets");
    if (data.len < fixed_data_bytes(dtype, length)) invalid("data buffer too short");
  }
}

void RecordBatchDescriptor::validate_structure() const {
  if (columns.size() != schema.size()) invalid("column count does not match the schema");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const ArrayDescriptor& c = columns[i];
    const Field& f = schema.field(i);
    if (c.dtype != f.dtype) invalid("column " + f.name + " has the wrong type");
    if (c.length != num_rows) invalid("column " + f.name + " has the wrong length");
    if (!f.nullable && c.null_count != 0) invalid("non-nullable column " + f.name + " has nulls");
    c.validate_structure();
  }
}

ChunkedColumn::ChunkedColumn(DataType dtype, std::vector<ArrayDescriptor> chunks)
    : dtype_(dtype), chunks_(std::move(chunks)) {
  ends_.reserve(chunks_.size());
  std::uint64_t total = 0;
  for (const ArrayDescriptor& c : chunks_) {
    if (c.dtype != dtype_) throw Error(Errc::type_mismatch, "chunk type differs from column type");
    total += c.length;
    ends_.push_back(total);
  }
}

std::pair<std::size_t, std::uint64_t> ChunkedColumn::locate(std::uint64_t row) const {
  if (row >= length()) {
    throw Error(Errc::out_of_range, "row " + std::to_string(row) + " out of range for column of " +
                                        std::to_string(length()) + " rows");
  }
  const auto it = std::upper_bound(ends_.begin(), ends_.end(), row);
  const auto chunk = static_cast<std::size_t>(it - ends_.begin());
  const std::uint64_t start = chunk == 0 ? 0 : ends_[chunk - 1];
  return {chunk, row - start};
}

void TableDescriptor::validate_structure() const {
  if (columns.size() != schema.size()) invalid("column count does not match the schema");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const ChunkedColumn& c = columns[i];
    const Field& f = schema.field(i);
    if (c.dtype() != f.dtype) invalid("column " + f.name + " has the wrong type");
    if (c.length() != num_rows) invalid("column " + f.name + " has the wrong length");
    for (const ArrayDescriptor& chunk : c.chunks()) {
      if (!f.nullable && chunk.null_count != 0) {
        invalid("non-nullable column " + f.name + " has nulls");
      }
      chunk.validate_structure();
    }
  }
}

}  // namespace csm::columnar
