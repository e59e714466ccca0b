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

#ifndef CSM_RT_FULL_COPY_HPP_
#define CSM_RT_FULL_COPY_HPP_

#include "csm/columnar/types.hpp"
#include "csm/protocol/protocol.hpp"
#include "csm/rt/cluster.hpp"

namespace csm::rt {

/// The conventional path: `from` reads every buffer of the batch and ships
/// descriptor plus data in one FullCopy; `to` writes the data into fresh
/// buffers of its own memory (full build protocol) and returns a descriptor
/// of the copy.
columnar::RecordBatchDescriptor ethernet_full_copy(rt::Cluster& rt, NodeId from, NodeId to,
                                                   const columnar::RecordBatchDescriptor& batch,
                                                   const protocol::BuildOptions& options = {});

}  // namespace csm::rt

#endif  // CSM_RT_FULL_COPY_HPP_
