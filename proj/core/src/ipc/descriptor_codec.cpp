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

#include "csm/ipc/descriptor_codec.hpp"

#include <cctype>
#include <limits>

#include "csm/bytes.hpp"

namespace csm::ipc {

using columnar::ArrayDescriptor;
using columnar::BufferRef;
using columnar::ChunkedColumn;
using columnar::DataType;
using columnar::Field;
using columnar::RecordBatchDescriptor;
using columnar::Schema;
using columnar::TableDescriptor;

namespace {

constexpr std::uint8_t kHasValidity = 0x1;
constexpr std::uint8_t kHasOffsets = 0x2;

[[noreturn]] void decode_error(const std::string& what) { throw Error(Errc::decode, what); }

void put_header(ByteWriter& w, DescriptorKind kind, const Schema& schema) {
  w.put_string({kMagic, 4});
  w.put(kVersion);
  w.put(static_cast<std::uint8_t>(kind));
  if (schema.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::invalid_argument, "too many fields");
  }
  w.put(static_cast<std::uint16_t>(schema.size()));
  for (const Field& f : schema.fields()) {
    if (f.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(Errc::invalid_argument, "field name too long");
    }
    w.put(static_cast<std::uint16_t>(f.name.size()));
    w.put_string(f.name);
    w.put(static_cast<std::uint8_t>(f.dtype));
    w.put(static_cast<std::uint8_t>(f.nullable ? 1 : 0));
  }
}

void put_buffer(ByteWriter& w, const BufferRef& b) {
  w.put(b.addr.value);
  w.put(b.len);
}

void put_array(ByteWriter& w, const ArrayDescriptor& a) {
  if (!a.sealed) throw Error(Errc::unsealed, "cannot serialize an unsealed array");
  w.put(a.length);
  w.put(a.null_count);
  std::uint8_t flags = 0;
  if (a.validity) flags |= kHasValidity;
  if (a.offsets) flags |= kHasOffsets;
  w.put(flags);
  if (a.validity) put_buffer(w, *a.validity);
  if (a.offsets) put_buffer(w, *a.offsets);
  put_buffer(w, a.data);
}

BufferRef get_buffer(ByteReader& r) {
  BufferRef b;
  b.addr = GlobalAddress(r.get<std::uint64_t>());
  b.len = r.get<std::uint64_t>();
  return b;
}

ArrayDescriptor get_array(ByteReader& r, DataType dtype) {
  ArrayDescriptor a;
  a.dtype = dtype;
  a.length = r.get<std::uint64_t>();
  a.null_count = r.get<std::uint64_t>();
  const auto flags = r.get<std::uint8_t>();
  if ((flags & ~(kHasValidity | kHasOffsets)) != 0) decode_error("unknown buffer flags");
  if (flags & kHasValidity) a.validity = get_buffer(r);
  if (flags & kHasOffsets) a.offsets = get_buffer(r);
  a.data = get_buffer(r);
  a.sealed = true;
  return a;
}

Schema get_schema(ByteReader& r) {
  const auto count = r.get<std::uint16_t>();
  std::vector<Field> fields;
  fields.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    Field f;
    const auto name_len = r.get<std::uint16_t>();
    f.name = r.get_string(name_len);
    const auto code = r.get<std::uint8_t>();
    const auto dtype = columnar::dtype_from_code(code);
    if (!dtype) decode_error("unknown dtype " + std::to_string(code));
    f.dtype = *dtype;
    const auto nullable = r.get<std::uint8_t>();
    if (nullable > 1) decode_error("bad nullable flag");
    f.nullable = nullable == 1;
    fields.push_back(std::move(f));
  }
  try {
    return Schema(std::move(fields));
  } catch (const Error& e) {
    decode_error(std::string("invalid schema: ") + e.what());
  }
}

template <typename Desc>
Desc checked(Desc d) {
  try {
    d.validate_structure();
  } catch (const Error& e) {
    decode_error(std::string("invalid descriptor: ") + e.what());
  }
  return d;
}

}  // namespace

std::vector<std::byte> serialize_descriptor(const RecordBatchDescriptor& batch) {
  for (const ArrayDescriptor& c : batch.columns) {
    if (!c.sealed) throw Error(Errc::unsealed, "cannot serialize an unsealed array");
  }
  batch.validate_structure();
  ByteWriter w;
  put_header(w, DescriptorKind::record_batch, batch.schema);
  w.put(batch.num_rows);
  for (const ArrayDescriptor& c : batch.columns) put_array(w, c);
  return w.take();
}

std::vector<std::byte> serialize_descriptor(const TableDescriptor& table) {
  for (const ChunkedColumn& col : table.columns) {
    for (const ArrayDescriptor& c : col.chunks()) {
      if (!c.sealed) throw Error(Errc::unsealed, "cannot serialize an unsealed array");
    }
  }
  table.validate_structure();
  ByteWriter w;
  put_header(w, DescriptorKind::table, table.schema);
  w.put(table.num_rows);
  for (const ChunkedColumn& col : table.columns) {
    w.put(static_cast<std::uint32_t>(col.chunks().size()));
    for (const ArrayDescriptor& c : col.chunks()) put_array(w, c);
  }
  return w.take();
}

std::vector<std::byte> serialize_descriptor(const AnyDescriptor& desc) {
  return std::visit([](const auto& d) { return serialize_descriptor(d); }, desc);
}

AnyDescriptor deserialize_descriptor(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  const auto magic = r.get_bytes(4);
  for (int i = 0; i < 4; ++i) {
    if (magic[i] != static_cast<std::byte>(kMagic[i])) decode_error("bad magic");
  }
  if (r.get<std::uint16_t>() != kVersion) decode_error("unknown version");
  const auto kind = r.get<std::uint8_t>();
  if (kind != static_cast<std::uint8_t>(DescriptorKind::record_batch) &&
      kind != static_cast<std::uint8_t>(DescriptorKind::table)) {
    decode_error("unknown descriptor kind");
  }
  Schema schema = get_schema(r);
  const auto num_rows = r.get<std::uint64_t>();

  AnyDescriptor out;
  if (kind == static_cast<std::uint8_t>(DescriptorKind::record_batch)) {
    RecordBatchDescriptor batch;
    batch.num_rows = num_rows;
    for (const Field& f : schema.fields()) batch.columns.push_back(get_array(r, f.dtype));
    batch.schema = std::move(schema);
    out = checked(std::move(batch));
  } else {
    TableDescriptor table;
    table.num_rows = num_rows;
    for (const Field& f : schema.fields()) {
      const auto chunk_count = r.get<std::uint32_t>();
      // Every chunk takes at least 33 bytes; reject counts the input cannot hold.
      if (chunk_count > r.remaining() / 33 + 1) decode_error("truncated");
      std::vector<ArrayDescriptor> chunks;
      chunks.reserve(chunk_count);
      for (std::uint32_t i = 0; i < chunk_count; ++i) chunks.push_back(get_array(r, f.dtype));
      table.columns.emplace_back(f.dtype, std::move(chunks));
    }
    table.schema = std::move(schema);
    out = checked(std::move(table));
  }
  if (r.remaining() != 0) decode_error("trailing bytes");
  return out;
}

std::string to_hex(std::span<const std::byte> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::byte b : bytes) {
    const auto v = std::to_integer<unsigned>(b);
    s.push_back(kDigits[v >> 4]);
    s.push_back(kDigits[v & 0xf]);
  }
  return s;
}

std::vector<std::byte> from_hex(std::string_view text) {
  std::vector<std::byte> out;
  int pending = -1;
  bool comment = false;
  for (char c : text) {
    if (comment) {
      comment = c != '\n';
      continue;
    }
    if (c == '#') {
      comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw Error(Errc::decode, std::string("bad hex digit '") + c + "'");
    }
    if (pending < 0) {
      pending = v;
    } else {
      out.push_back(static_cast<std::byte>(pending << 4 | v));
      pending = -1;
    }
  }
  if (pending >= 0) throw Error(Errc::decode, "odd number of hex digits");
  return out;
}

}  // namespace csm::ipc
