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

#include "csm/rt/full_copy.hpp"

#include <optional>
#include <variant>

namespace csm::rt {

using columnar::ArrayDescriptor;
using columnar::BufferRef;
using columnar::RecordBatchDescriptor;

namespace {

template <typename F>
void for_each_buffer(ArrayDescriptor& a, F&& f) {
  if (a.validity) f(*a.validity);
  if (a.offsets) f(*a.offsets);
  f(a.data);
}

}  // namespace

RecordBatchDescriptor ethernet_full_copy(Cluster& rt, NodeId from, NodeId to,
                                         const RecordBatchDescriptor& batch,
                                         const protocol::BuildOptions& options) {
  FullCopy msg;
  msg.descriptor = rt.serialize(from, batch);
  RecordBatchDescriptor src = batch;
  for (ArrayDescriptor& col : src.columns) {
    for_each_buffer(col, [&](BufferRef& b) {
      if (b.len == 0) return;
      auto bytes = rt.memory().read(from, b.addr, b.len);
      msg.data.insert(msg.data.end(), bytes.begin(), bytes.end());
    });
  }
  rt.send_full_copy(from, to, std::move(msg));

  auto [sender, got] = rt.take_full_copy(to);
  auto decoded = rt.deserialize(to, got.descriptor);
  auto* out = std::get_if<RecordBatchDescriptor>(&decoded);
  if (!out) throw Error(Errc::decode, "FullCopy does not carry a record batch");

  std::uint64_t pos = 0;
  for (ArrayDescriptor& col : out->columns) {
    for_each_buffer(col, [&](BufferRef& b) {
      if (b.len == 0) return;
      if (b.len > got.data.size() - pos) throw Error(Errc::decode, "FullCopy data truncated");
      std::span<const std::byte> slice(got.data.data() + pos, b.len);
      pos += b.len;
      b = protocol::create_shared_buffer(rt, to, to, slice, options);
    });
  }
  if (pos != got.data.size()) throw Error(Errc::decode, "FullCopy has trailing data");
  out->validate_structure();
  return std::move(*out);
}

}  // namespace csm::rt
