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

#ifndef CSM_RT_MESSAGE_HPP_
#define CSM_RT_MESSAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "csm/common.hpp"

// Channel framing, little-endian:
//
//   u32 length (bytes that follow) | u8 kind | payload
//
//   1 AllocRequest          size u64
//   2 AllocResponse         status u8 (0 ok, 1 out of memory) | addr u64
//   3 FlushRequest          addr u64 | len u64 | req_id u64
//   4 FlushAck              req_id u64
//   5 SealNotice            addr u64 | len u64
//   6 DescriptorBroadcast   descriptor bytes (rest of frame)
//   7 FullCopy              desc_len u32 | descriptor | data_len u64 | data
//   8 Shutdown              (empty)

namespace csm::rt {

struct AllocRequest {
  std::uint64_t size = 0;
  bool operator==(const AllocRequest&) const = default;
};
struct AllocResponse {
  bool ok = false;
  GlobalAddress addr;
  bool operator==(const AllocResponse&) const = default;
};
struct FlushRequest {
  GlobalAddress addr;
  std::uint64_t len = 0;
  std::uint64_t req_id = 0;
  bool operator==(const FlushRequest&) const = default;
};
struct FlushAck {
  std::uint64_t req_id = 0;
  bool operator==(const FlushAck&) const = default;
};
struct SealNotice {
  GlobalAddress addr;
  std::uint64_t len = 0;
  bool operator==(const SealNotice&) const = default;
};
struct DescriptorBroadcast {
  std::vector<std::byte> bytes;
  bool operator==(const DescriptorBroadcast&) const = default;
};
struct FullCopy {
  std::vector<std::byte> descriptor;
  std::vector<std::byte> data;
  bool operator==(const FullCopy&) const = default;
};
struct Shutdown {
  bool operator==(const Shutdown&) const = default;
};

using Message = std::variant<AllocRequest, AllocResponse, FlushRequest, FlushAck, SealNotice,
                             DescriptorBroadcast, FullCopy, Shutdown>;

enum class MessageKind : std::uint8_t {
  alloc_request = 1,
  alloc_response = 2,
  flush_request = 3,
  flush_ack = 4,
  seal_notice = 5,
  descriptor_broadcast = 6,
  full_copy = 7,
  shutdown = 8,
};

MessageKind kind_of(const Message& m);
std::string_view message_kind_name(MessageKind k);

/// Bytes after the kind byte; this is what the ledger charges for.
std::uint64_t payload_size(const Message& m);

/// Throws Errc::overflow if the frame would not fit the u32 length.
std::vector<std::byte> encode_frame(const Message& m);

/// Decodes exactly one frame. Throws Errc::decode.
Message decode_frame(std::span<const std::byte> frame);

}  // namespace csm::rt

#endif  // CSM_RT_MESSAGE_HPP_
