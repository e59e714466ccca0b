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

#include "csm/sim/cost_model.hpp"

#include <cmath>
#include <string>

namespace csm::sim {

namespace {

using Field = double CostModel::*;

struct NamedField {
  const char* name;
  Field field;
};

constexpr NamedField kFields[] = {
    {"local_line_fetch_ns", &CostModel::local_line_fetch_ns},
    {"remote_rtt_ns", &CostModel::remote_rtt_ns},
    {"flush_local_line_ns", &CostModel::flush_local_line_ns},
    {"flush_remote_line_ns", &CostModel::flush_remote_line_ns},
    {"ethernet_msg_latency_ns", &CostModel::ethernet_msg_latency_ns},
    {"ethernet_bandwidth", &CostModel::ethernet_bandwidth},
    {"csm_link_bandwidth", &CostModel::csm_link_bandwidth},
    {"rpc_alloc_overhead_ns", &CostModel::rpc_alloc_overhead_ns},
    {"serialize_fixed_ns", &CostModel::serialize_fixed_ns},
    {"serialize_per_byte_ns", &CostModel::serialize_per_byte_ns},
};

constexpr const char* kRemoteTransfer = "remote_line_transfer_ns";

}  // namespace

double CostModel::effective_remote_line_transfer_ns() const {
  if (remote_line_transfer_ns) return *remote_line_transfer_ns;
  return static_cast<double>(kLineSize) / csm_link_bandwidth * 1e9;
}

void CostModel::validate() const {
  for (const auto& f : kFields) {
    const double v = this->*f.field;
    if (!std::isfinite(v) || v < 0) {
      throw Error(Errc::invalid_argument, std::string("cost model field ") + f.name +
                                              " must be a non-negative number");
    }
  }
  if (remote_line_transfer_ns && (!std::isfinite(*remote_line_transfer_ns) ||
                                  *remote_line_transfer_ns < 0)) {
    throw Error(Errc::invalid_argument, "remote_line_transfer_ns must be non-negative");
  }
  if (ethernet_bandwidth <= 0 || csm_link_bandwidth <= 0) {
    throw Error(Errc::invalid_argument, "bandwidths must be positive");
  }
}

nlohmann::json CostModel::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : kFields) j[f.name] = this->*f.field;
  j[kRemoteTransfer] = effective_remote_line_transfer_ns();
  return j;
}

CostModel CostModel::from_json(const nlohmann::json& j, CostModel base) {
  if (!j.is_object()) throw Error(Errc::invalid_argument, "cost model must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == kRemoteTransfer) {
      if (value.is_null()) {
        base.remote_line_transfer_ns.reset();
      } else if (value.is_number()) {
        base.remote_line_transfer_ns = value.get<double>();
      } else {
        throw Error(Errc::invalid_argument, "remote_line_transfer_ns must be a number");
      }
      continue;
    }
    bool known = false;
    for (const auto& f : kFields) {
      if (key == f.name) {
        if (!value.is_number()) {
          throw Error(Errc::invalid_argument, "cost model field " + key + " must be a number");
        }
        base.*f.field = value.get<double>();
        known = true;
        break;
      }
    }
    if (!known) throw Error(Errc::invalid_argument, "unknown cost model field: " + key);
  }
  base.validate();
  return base;
}

CostModel CostModel::from_json(const nlohmann::json& j) { return from_json(j, CostModel{}); }

PriceTable::PriceTable(const CostModel& model) : model_(model) {
  model_.validate();
  local_fetch_ = SimDuration::from_ns(model_.local_line_fetch_ns);
  remote_fetch_ = SimDuration::from_ns(model_.effective_remote_line_transfer_ns());
  remote_rtt_ = SimDuration::from_ns(model_.remote_rtt_ns);
  flush_local_ = SimDuration::from_ns(model_.flush_local_line_ns);
  flush_remote_ = SimDuration::from_ns(model_.flush_remote_line_ns);
  alloc_overhead_ = SimDuration::from_ns(model_.rpc_alloc_overhead_ns);
}

SimDuration PriceTable::message(std::uint64_t payload, bool self) const {
  if (self) return {};
  const double wire_ns = static_cast<double>(payload) / model_.ethernet_bandwidth * 1e9;
  return SimDuration::from_ns(model_.ethernet_msg_latency_ns / 2 + wire_ns);
}

SimDuration PriceTable::serialize(std::uint64_t bytes) const {
  return SimDuration::from_ns(model_.serialize_fixed_ns +
                              model_.serialize_per_byte_ns * static_cast<double>(bytes));
}

}  // namespace csm::sim
