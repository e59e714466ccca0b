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

#ifndef CSM_BENCH_BENCH_HPP_
#define CSM_BENCH_BENCH_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "csm/columnar/types.hpp"
#include "csm/sim/cost_model.hpp"
#include "csm/sim/ledger.hpp"

namespace csm::bench {

enum class Mode { local, remote };
enum class Method { ethernet, csm };

std::string_view mode_name(Mode m);
std::string_view method_name(Method m);
Mode parse_mode(std::string_view s);
Method parse_method(std::string_view s);
columnar::DataType parse_type(std::string_view s);

/// Parses "1GiB", "16MiB", "4096", "2KB" (binary and decimal suffixes).
std::uint64_t parse_size(std::string_view s);

/// Lines of the reference table the calibration is fitted to (1 GiB).
inline constexpr std::uint64_t kReferenceLines = (std::uint64_t{1} << 30) / kLineSize;

/// Fits the two free constants of `base` so that a 1 GiB, two-node table
/// build reproduces the measured rows: the remote-line flush price from the
/// pre-write flush row (51.84 ms) and the allocation service overhead from
/// the malloc row (4.99 ms). All other prices are kept.
sim::CostModel calibrated(const sim::CostModel& base);

struct BenchConfig {
  std::uint32_t nodes = 2;
  std::uint64_t table_bytes = 16ull << 20;
  columnar::DataType element_type = columnar::DataType::UInt64;
  std::uint64_t stride = 1;
  Mode mode = Mode::remote;
  Method method = Method::csm;
  std::uint64_t seed = 1;
  sim::CostModel costs;
  // Per-node cache; large enough for the strided working sets, small
  // enough that a 1 GiB write streams through it.
  std::uint64_t cache_bytes = 120ull << 20;

  /// Throws Errc::invalid_argument.
  void validate() const;
};

/// Simulated milliseconds per component of a table build.
struct BreakdownReport {
  static constexpr std::array<const char*, 6> kRows = {
      "malloc_request",   "pre_write_flush",      "write_remote",
      "post_write_flush", "serialize_descriptor", "send_descriptor"};

  double malloc_request = 0;
  double pre_write_flush = 0;
  double write_remote = 0;
  double post_write_flush = 0;
  double serialize_descriptor = 0;
  double send_descriptor = 0;
  double total = 0;

  // Exact picosecond sums behind the rows, in kRows order.
  std::array<SimDuration, 6> exact{};
  SimDuration exact_total;

  double row(std::size_t i) const;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

struct TransferReport {
  Method method = Method::csm;
  std::uint64_t table_bytes = 0;
  std::uint64_t bytes_on_wire = 0;
  SimDuration exact_time;
  double simulated_time = 0;  // ms
  double throughput = 0;      // table bytes per simulated second

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

struct StridedReport {
  std::uint64_t stride = 1;
  Mode mode = Mode::remote;
  std::uint64_t elements_read = 0;
  std::uint64_t useful_bytes = 0;
  std::uint64_t lines_touched = 0;
  SimDuration exact_time;
  double simulated_time = 0;        // ms
  double effective_throughput = 0;  // useful bytes per simulated second

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Optional copy of the ledger trace of a run.
struct RunTrace {
  std::string jsonl;
};

BreakdownReport bench_init_table(const BenchConfig& config, RunTrace* trace = nullptr);
TransferReport bench_transfer(const BenchConfig& config, RunTrace* trace = nullptr);
StridedReport bench_strided(const BenchConfig& config, RunTrace* trace = nullptr);

}  // namespace csm::bench

#endif  // CSM_BENCH_BENCH_HPP_
