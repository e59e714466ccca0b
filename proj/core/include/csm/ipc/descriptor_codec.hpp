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

#ifndef CSM_IPC_DESCRIPTOR_CODEC_HPP_
#define CSM_IPC_DESCRIPTOR_CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csm/columnar/types.hpp"

// Wire format (little-endian throughout):
//
//   header       "CSMT" | version u16 (=1) | kind u8 (1 = record batch, 2 = table)
//   schema       field_count u16 | per field: name_len u16, name, dtype u8, nullable u8
//   batch body   num_rows u64 | per column: <array>
//   table body   num_rows u64 | per column: chunk_count u32, per chunk: <array>
//   <array>      length u64 | null_count u64 | buffer_flags u8 (bit0 validity,
//                bit1 offsets) | for each present buffer in the order validity,
//                offsets, data: addr u64, len u64
//
// The data buffer is always encoded, possibly as {0, 0}. Buffer addresses
// are cluster-global and are carried verbatim; no buffer content is ever
// read or written by the codec.

namespace csm::ipc {

inline constexpr char kMagic[4] = {'C', 'S', 'M', 'T'};
inline constexpr std::uint16_t kVersion = 1;

enum class DescriptorKind : std::uint8_t { record_batch = 1, table = 2 };

using AnyDescriptor = std::variant<columnar::RecordBatchDescriptor, columnar::TableDescriptor>;

/// Throws Errc::unsealed if any array is unsealed and Errc::invalid_argument
/// if the descriptor breaks a structural invariant.
std::vector<std::byte> serialize_descriptor(const columnar::RecordBatchDescriptor& batch);
std::vector<std::byte> serialize_descriptor(const columnar::TableDescriptor& table);
std::vector<std::byte> serialize_descriptor(const AnyDescriptor& desc);

/// Structural validation is eager; content checks (offset monotonicity,
/// bitmap popcounts) are left to columnar::validate_content. All failures
/// throw Errc::decode ("bad magic", "truncated", "unknown version", ...).
/// Decoded arrays are sealed.
AnyDescriptor deserialize_descriptor(std::span<const std::byte> bytes);

// Golden-fixture helpers. Parsing skips whitespace and '#' comments.
std::string to_hex(std::span<const std::byte> bytes);
std::vector<std::byte> from_hex(std::string_view text);

}  // namespace csm::ipc

#endif  // CSM_IPC_DESCRIPTOR_CODEC_HPP_
