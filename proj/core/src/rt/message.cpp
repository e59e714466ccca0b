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

#include "csm/rt/message.hpp"

#include <limits>
#include <string>

#include "csm/bytes.hpp"

namespace csm::rt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void put_payload(ByteWriter& w, const Message& m) {
  std::visit(overloaded{
                 [&](const AllocRequest& r) { w.put(r.size); },
                 [&](const AllocResponse& r) {
                   w.put(static_cast<std::uint8_t>(r.ok ? 0 : 1));
                   w.put(r.addr.value);
                 },
                 [&](const FlushRequest& r) {
                   w.put(r.addr.value);
                   w.put(r.len);
                   w.put(r.req_id);
                 },
                 [&](const FlushAck& r) { w.put(r.req_id); },
                 [&](const SealNotice& r) {
                   w.put(r.addr.value);
                   w.put(r.len);
                 },
                 [&](const DescriptorBroadcast& r) { w.put_bytes(r.bytes); },
                 [&](const FullCopy& r) {
                   w.put(static_cast<std::uint32_t>(r.descriptor.size()));
                   w.put_bytes(r.descriptor);
                   w.put(static_cast<std::uint64_t>(r.data.size()));
                   w.put_bytes(r.data);
                 },
                 [&](const Shutdown&) {},
             },
             m);
}

}  // namespace

MessageKind kind_of(const Message& m) { return static_cast<MessageKind>(m.index() + 1); }

std::string_view message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::alloc_request: return "AllocRequest";
    case MessageKind::alloc_response: return "AllocResponse";
    case MessageKind::flush_request: return "FlushRequest";
    case MessageKind::flush_ack: return "FlushAck";
    case MessageKind::seal_notice: return "SealNotice";
    case MessageKind::descriptor_broadcast: return "DescriptorBroadcast";
    case MessageKind::full_copy: return "FullCopy";
    case MessageKind::shutdown: return "Shutdown";
  }
  return "?";
}

std::uint64_t payload_size(const Message& m) {
  return std::visit(overloaded{
                        [](const AllocRequest&) -> std::uint64_t { return 8; },
                        [](const AllocResponse&) -> std::uint64_t { return 9; },
                        [](const FlushRequest&) -> std::uint64_t { return 24; },
                        [](const FlushAck&) -> std::uint64_t { return 8; },
                        [](const SealNotice&) -> std::uint64_t { return 16; },
                        [](const DescriptorBroadcast& r) -> std::uint64_t { return r.bytes.size(); },
                        [](const FullCopy& r) -> std::uint64_t {
                          return 4 + r.descriptor.size() + 8 + r.data.size();
                        },
                        [](const Shutdown&) -> std::uint64_t { return 0; },
                    },
                    m);
}

std::vector<std::byte> encode_frame(const Message& m) {
  const std::uint64_t body = 1 + payload_size(m);
  if (body > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::overflow, "message too large for one frame");
  }
  if (const auto* fc = std::get_if<FullCopy>(&m);
      fc && fc->descriptor.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::overflow, "descriptor too large");
  }
  ByteWriter w;
  w.reserve(4 + body);
  w.put(static_cast<std::uint32_t>(body));
  w.put(static_cast<std::uint8_t>(kind_of(m)));
  put_payload(w, m);
  return w.take();
}

Message decode_frame(std::span<const std::byte> frame) {
  ByteReader r(frame);
  const auto body = r.get<std::uint32_t>();
  if (body != r.remaining()) {
    throw Error(Errc::decode, body > r.remaining() ? "truncated" : "trailing bytes");
  }
  if (body == 0) throw Error(Errc::decode, "truncated");
  const auto kind = r.get<std::uint8_t>();
  Message m;
  switch (static_cast<MessageKind>(kind)) {
    case MessageKind::alloc_request:
      m = AllocRequest{r.get<std::uint64_t>()};
      break;
    case MessageKind::alloc_response: {
      const auto status = r.get<std::uint8_t>();
      if (status > 1) throw Error(Errc::decode, "bad alloc status");
      m = AllocResponse{status == 0, GlobalAddress(r.get<std::uint64_t>())};
      break;
    }
    case MessageKind::flush_request: {
      FlushRequest f;
      f.addr = GlobalAddress(r.get<std::uint64_t>());
      f.len = r.get<std::uint64_t>();
      f.req_id = r.get<std::uint64_t>();
      m = f;
      break;
    }
    case MessageKind::flush_ack:
      m = FlushAck{r.get<std::uint64_t>()};
      break;
    case MessageKind::seal_notice: {
      SealNotice s;
      s.addr = GlobalAddress(r.get<std::uint64_t>());
      s.len = r.get<std::uint64_t>();
      m = s;
      break;
    }
    case MessageKind::descriptor_broadcast: {
      auto b = r.get_bytes(r.remaining());
      m = DescriptorBroadcast{{b.begin(), b.end()}};
      break;
    }
    case MessageKind::full_copy: {
      FullCopy fc;
      auto d = r.get_bytes(r.get<std::uint32_t>());
      fc.descriptor.assign(d.begin(), d.end());
      const auto n = r.get<std::uint64_t>();
      if (n > r.remaining()) throw Error(Errc::decode, "truncated");
      auto data = r.get_bytes(static_cast<std::size_t>(n));
      fc.data.assign(data.begin(), data.end());
      m = std::move(fc);
      break;
    }
    case MessageKind::shutdown:
      m = Shutdown{};
      break;
    default:
      throw Error(Errc::decode, "unknown message kind " + std::to_string(kind));
  }
  if (r.remaining() != 0) throw Error(Errc::decode, "trailing bytes");
  return m;
}

}  // namespace csm::rt
