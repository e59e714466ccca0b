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

#ifndef CSM_SIM_COST_MODEL_HPP_
#define CSM_SIM_COST_MODEL_HPP_

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "csm/common.hpp"

namespace csm::sim {

/// Simulated-time prices. Durations are in nanoseconds, bandwidths in bytes
/// per simulated second.
///
/// Line movement is priced per 128-byte line and assumed fully pipelined; the
/// link round trip `remote_rtt_ns` is paid once per memory operation that
/// has to go over the link at all. Ethernet traffic is priced per message as
/// half of `ethernet_msg_latency_ns` (one direction of a call) plus wire time.
struct CostModel {
  double local_line_fetch_ns = 4.0;
  double remote_rtt_ns = 650.0;
  // Unset means "wire time of one line at csm_link_bandwidth".
  std::optional<double> remote_line_transfer_ns;
  double flush_local_line_ns = 0.5;
  double flush_remote_line_ns = 2.0;
  double ethernet_msg_latency_ns = 3.3e6;
  double ethernet_bandwidth = 125e6;
  double csm_link_bandwidth = 10.0 * 1024 * 1024 * 1024;

  // Owner-side service time of a remote allocation request, on top of the
  // call latency.
  double rpc_alloc_overhead_ns = 20e3;
  double serialize_fixed_ns = 50e3;
  double serialize_per_byte_ns = 2.0;

  double effective_remote_line_transfer_ns() const;

  /// Throws Errc::invalid_argument on negative prices or zero bandwidths.
  void validate() const;

  nlohmann::json to_json() const;

  /// Overrides fields of `base` with the keys present in `j`. Unknown keys
  /// are rejected.
  static CostModel from_json(const nlohmann::json& j, CostModel base);
  static CostModel from_json(const nlohmann::json& j);
};

/// Integer-picosecond unit prices derived from a CostModel.
class PriceTable {
 public:
  explicit PriceTable(const CostModel& model);

  SimDuration local_fetch() const { return local_fetch_; }
  SimDuration remote_fetch() const { return remote_fetch_; }
  SimDuration remote_rtt() const { return remote_rtt_; }
  SimDuration flush_issue(bool remote) const { return remote ? flush_remote_ : flush_local_; }
  SimDuration writeback(bool remote) const { return remote ? remote_fetch_ : local_fetch_; }
  SimDuration alloc_overhead() const { return alloc_overhead_; }

  /// One-way ethernet message carrying `payload` bytes. Self-sends are free.
  SimDuration message(std::uint64_t payload, bool self) const;
  SimDuration serialize(std::uint64_t bytes) const;

  const CostModel& model() const { return model_; }

 private:
  CostModel model_;
  SimDuration local_fetch_;
  SimDuration remote_fetch_;
  SimDuration remote_rtt_;
  SimDuration flush_local_;
  SimDuration flush_remote_;
  SimDuration alloc_overhead_;
};

}  // namespace csm::sim

#endif  // CSM_SIM_COST_MODEL_HPP_
