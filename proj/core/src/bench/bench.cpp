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

#include "csm/bench/bench.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

#include "csm/bytes.hpp"
#include "csm/columnar/access.hpp"
#include "csm/ipc/descriptor_codec.hpp"
#include "csm/protocol/protocol.hpp"
#include "csm/rt/cluster.hpp"
#include "csm/rt/full_copy.hpp"
#include "csm/sim/cluster_memory.hpp"

namespace csm::bench {

using columnar::DataType;

std::string_view mode_name(Mode m) { return m == Mode::local ? "local" : "remote"; }
std::string_view method_name(Method m) { return m == Method::csm ? "csm" : "ethernet"; }

Mode parse_mode(std::string_view s) {
  if (s == "local") return Mode::local;
  if (s == "remote") return Mode::remote;
  throw Error(Errc::invalid_argument, "mode must be local or remote");
}

Method parse_method(std::string_view s) {
  if (s == "csm") return Method::csm;
  if (s == "ethernet") return Method::ethernet;
  throw Error(Errc::invalid_argument, "method must be ethernet or csm");
}

DataType parse_type(std::string_view s) {
  if (s == "uint64") return DataType::UInt64;
  if (s == "int64") return DataType::Int64;
  if (s == "float64") return DataType::Float64;
  throw Error(Errc::invalid_argument, "type must be uint64, int64 or float64");
}

std::uint64_t parse_size(std::string_view s) {
  std::uint64_t n = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, n);
  if (ec != std::errc() || p == s.data()) {
    throw Error(Errc::invalid_argument, "bad size '" + std::string(s) + "'");
  }
  std::string unit(p, end);
  for (char& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  struct Suffix {
    const char* name;
    std::uint64_t mul;
  };
  static constexpr Suffix kSuffixes[] = {
      {"", 1},           {"b", 1},           {"k", 1ull << 10},   {"kib", 1ull << 10},
      {"m", 1ull << 20}, {"mib", 1ull << 20}, {"g", 1ull << 30},  {"gib", 1ull << 30},
      {"kb", 1000},      {"mb", 1000000},     {"gb", 1000000000},
  };
  for (const auto& sfx : kSuffixes) {
    if (unit == sfx.name) {
      if (n > UINT64_MAX / sfx.mul) throw Error(Errc::overflow, "size too large");
      return n * sfx.mul;
    }
  }
  throw Error(Errc::invalid_argument, "bad size unit '" + unit + "'");
}

sim::CostModel calibrated(const sim::CostModel& base) {
  sim::CostModel m = base;
  const sim::PriceTable p(m);
  const double L = static_cast<double>(kReferenceLines);

  // Pre-write flush on two nodes: one FlushRequest/FlushAck pair over the
  // wire (the owner's own request is a free self-send), L local-line and L
  // remote-line flush issues, no dirty lines.
  const double rpc_ns = (p.message(24, false) + p.message(8, false)).ns();
  m.flush_remote_line_ns = (51.84e6 - rpc_ns - L * m.flush_local_line_ns) / L;

  // Malloc: AllocRequest and AllocResponse plus the owner's service time.
  const double alloc_rpc_ns = (p.message(8, false) + p.message(9, false)).ns();
  m.rpc_alloc_overhead_ns = 4.99e6 - alloc_rpc_ns;

  m.validate();
  return m;
}

void BenchConfig::validate() const {
  const std::uint64_t width = columnar::value_width(element_type);
  if (width == 0) throw Error(Errc::invalid_argument, "element type must be 8 bytes wide");
  if (table_bytes == 0 || table_bytes % width != 0) {
    throw Error(Errc::invalid_argument, "table size must be a positive multiple of the element width");
  }
  if (stride == 0) throw Error(Errc::invalid_argument, "stride must be at least 1");
  if (nodes < 2) throw Error(Errc::invalid_argument, "benchmarks need at least 2 nodes");
  if (cache_bytes < kLineSize) throw Error(Errc::invalid_argument, "cache must hold a line");
  costs.validate();
}

double BreakdownReport::row(std::size_t i) const {
  const double rows[] = {malloc_request,   pre_write_flush,      write_remote,
                         post_write_flush, serialize_descriptor, send_descriptor};
  return rows[i];
}

nlohmann::ordered_json BreakdownReport::to_json() const {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < kRows.size(); ++i) j[kRows[i]] = row(i);
  j["total"] = total;
  return j;
}

std::string BreakdownReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "component,ms\n";
  for (std::size_t i = 0; i < kRows.size(); ++i) os << kRows[i] << ',' << row(i) << '\n';
  os << "total," << total << '\n';
  return os.str();
}

nlohmann::ordered_json TransferReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method_name(method);
  j["table_bytes"] = table_bytes;
  j["bytes_on_wire"] = bytes_on_wire;
  j["simulated_time"] = simulated_time;
  j["throughput"] = throughput;
  return j;
}

std::string TransferReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "method,table_bytes,bytes_on_wire,simulated_time,throughput\n"
     << method_name(method) << ',' << table_bytes << ',' << bytes_on_wire << ','
     << simulated_time << ',' << throughput << '\n';
  return os.str();
}

nlohmann::ordered_json StridedReport::to_json() const {
  nlohmann::ordered_json j;
  j["stride"] = stride;
  j["mode"] = mode_name(mode);
  j["elements_read"] = elements_read;
  j["useful_bytes"] = useful_bytes;
  j["lines_touched"] = lines_touched;
  j["simulated_time"] = simulated_time;
  j["effective_throughput"] = effective_throughput;
  return j;
}

std::string StridedReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "stride,mode,elements_read,useful_bytes,lines_touched,simulated_time,"
        "effective_throughput\n"
     << stride << ',' << mode_name(mode) << ',' << elements_read << ',' << useful_bytes << ','
     << lines_touched << ',' << simulated_time << ',' << effective_throughput << '\n';
  return os.str();
}

namespace {

constexpr std::uint64_t kSlack = 1ull << 20;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Node 0 holds `owner_bytes`, node 1 `second_bytes`, the rest a token
// segment; all back to back.
sim::SegmentMap layout(std::uint32_t nodes, std::uint64_t owner_bytes, std::uint64_t second_bytes) {
  std::vector<sim::Segment> segs;
  std::uint64_t base = 0;
  for (NodeId n = 0; n < nodes; ++n) {
    std::uint64_t size = n == 0 ? owner_bytes : n == 1 ? second_bytes : 0;
    size = align_up(size + kSlack);
    segs.push_back({n, GlobalAddress(base), size});
    base += size;
  }
  return sim::SegmentMap(std::move(segs));
}

sim::MemoryOptions memory_options(const BenchConfig& c) {
  sim::MemoryOptions o;
  o.costs = c.costs;
  o.cache_capacity_lines = c.cache_bytes / kLineSize;
  return o;
}

protocol::Producer value_producer(DataType type, std::uint64_t seed) {
  return [type, seed](std::uint64_t off, std::span<std::byte> out) {
    // Chunks are multiples of 8 bytes, so element boundaries line up.
    for (std::size_t i = 0; i + 8 <= out.size(); i += 8) {
      std::uint64_t v = splitmix64(seed ^ ((off + i) / 8));
      if (type == DataType::Float64) v = std::bit_cast<std::uint64_t>(static_cast<double>(v >> 11));
      store_le(out.data() + i, v);
    }
  };
}

columnar::RecordBatchDescriptor single_column(DataType type, const columnar::ArrayDescriptor& a) {
  columnar::RecordBatchDescriptor b;
  b.schema = columnar::Schema({{"value", type, false}});
  b.num_rows = a.length;
  b.columns = {a};
  return b;
}

void keep_trace(const sim::ClusterMemory& mem, RunTrace* trace) {
  if (trace) trace->jsonl = mem.ledger().to_jsonl();
}

}  // namespace

BreakdownReport bench_init_table(const BenchConfig& config, RunTrace* trace) {
  config.validate();
  constexpr NodeId kOwner = 0;
  constexpr NodeId kWriter = 1;
  sim::ClusterMemory mem(layout(config.nodes, config.table_bytes, 0), memory_options(config));
  rt::Cluster rt(mem, rt::RuntimeOptions{config.seed});

  // Trace index where each step starts; the descriptor phase follows seal.
  std::array<std::size_t, 7> begin{};
  const std::size_t start = mem.ledger().mark();
  protocol::BuildOptions opts;
  opts.observer = [&](protocol::Step s, bool done, const columnar::BufferRef&) {
    if (!done) begin[static_cast<std::size_t>(s) - 1] = mem.ledger().mark();
  };
  const std::uint64_t n = config.table_bytes / columnar::value_width(config.element_type);
  const auto array = protocol::build_fixed_array(rt, kWriter, kOwner, config.element_type, n,
                                                 value_producer(config.element_type, config.seed),
                                                 opts);
  begin[5] = mem.ledger().mark();
  const auto bytes = rt.serialize(kWriter, single_column(config.element_type, array));
  rt.broadcast_descriptor(kWriter, bytes);

  // Step k (alloc..seal) maps to rows malloc, pre, write, post, send.
  static constexpr std::size_t kStepRow[] = {0, 1, 2, 3, 5};
  BreakdownReport r;
  const auto& trace_events = mem.ledger().trace();
  for (std::size_t i = start; i < trace_events.size(); ++i) {
    const sim::TraceEvent& ev = trace_events[i];
    std::size_t row;
    if (i >= begin[5]) {
      const bool codec = ev.kind == sim::EventKind::serialize || ev.kind == sim::EventKind::deserialize;
      row = codec ? 4 : 5;
    } else {
      std::size_t step = 0;
      while (step + 1 < 5 && i >= begin[step + 1]) ++step;
      row = kStepRow[step];
    }
    r.exact[row] += ev.cost;
  }
  for (const SimDuration& d : r.exact) r.exact_total += d;
  if (r.exact_total != mem.ledger().cost_since(start)) {
    throw Error(Errc::invalid_argument, "breakdown does not cover the ledger");
  }
  r.malloc_request = r.exact[0].ms();
  r.pre_write_flush = r.exact[1].ms();
  r.write_remote = r.exact[2].ms();
  r.post_write_flush = r.exact[3].ms();
  r.serialize_descriptor = r.exact[4].ms();
  r.send_descriptor = r.exact[5].ms();
  r.total = r.exact_total.ms();
  keep_trace(mem, trace);
  return r;
}

TransferReport bench_transfer(const BenchConfig& config, RunTrace* trace) {
  config.validate();
  constexpr NodeId kSource = 0;
  constexpr NodeId kDest = 1;
  sim::ClusterMemory mem(layout(config.nodes, config.table_bytes, config.table_bytes),
                         memory_options(config));
  rt::Cluster rt(mem, rt::RuntimeOptions{config.seed});
  const std::uint64_t n = config.table_bytes / columnar::value_width(config.element_type);
  const auto array = protocol::build_fixed_array(rt, kSource, kSource, config.element_type, n,
                                                 value_producer(config.element_type, config.seed));
  const auto batch = single_column(config.element_type, array);

  auto wire_bytes = [&] {
    std::uint64_t b = 0;
    for (NodeId i = 0; i < mem.node_count(); ++i) b += mem.ledger().node(i).bytes_over_ethernet;
    return b;
  };
  const std::uint64_t wire_before = wire_bytes();
  const std::size_t start = mem.ledger().mark();
  if (config.method == Method::csm) {
    const auto bytes = rt.serialize(kSource, batch);
    rt.broadcast_descriptor(kSource, bytes);
  } else {
    rt::ethernet_full_copy(rt, kSource, kDest, batch);
  }

  TransferReport r;
  r.method = config.method;
  r.table_bytes = config.table_bytes;
  r.bytes_on_wire = wire_bytes() - wire_before;
  r.exact_time = mem.ledger().cost_since(start);
  r.simulated_time = r.exact_time.ms();
  r.throughput = static_cast<double>(config.table_bytes) / r.exact_time.seconds();
  keep_trace(mem, trace);
  return r;
}

StridedReport bench_strided(const BenchConfig& config, RunTrace* trace) {
  config.validate();
  constexpr NodeId kOwner = 0;
  // Built by a third party so neither reader starts with cached lines.
  constexpr NodeId kBuilder = 1;
  sim::ClusterMemory mem(layout(config.nodes, config.table_bytes, 0), memory_options(config));
  rt::Cluster rt(mem, rt::RuntimeOptions{config.seed});
  const std::uint64_t n = config.table_bytes / columnar::value_width(config.element_type);
  const auto array = protocol::build_fixed_array(rt, kBuilder, kOwner, config.element_type, n,
                                                 value_producer(config.element_type, config.seed));
  const NodeId reader = config.mode == Mode::local ? kOwner : 1;
  mem.barrier(reader);
  mem.flush_range(reader, array.data.addr, array.data.len);
  mem.barrier(reader);

  std::vector<std::uint64_t> rows;
  rows.reserve(n / config.stride + 1);
  for (std::uint64_t i = 0; i < n; i += config.stride) rows.push_back(i);

  const std::size_t start = mem.ledger().mark();
  const auto values = columnar::array_gather(mem, reader, array, rows);

  StridedReport r;
  r.stride = config.stride;
  r.mode = config.mode;
  r.elements_read = values.size();
  r.useful_bytes = values.size() * columnar::value_width(config.element_type);
  const auto& t = mem.ledger().trace();
  for (std::size_t i = start; i < t.size(); ++i) {
    const auto& c = t[i].charges;
    r.lines_touched += c.local_fetches + c.remote_fetches + c.snoops;
  }
  r.exact_time = mem.ledger().cost_since(start);
  r.simulated_time = r.exact_time.ms();
  r.effective_throughput = static_cast<double>(r.useful_bytes) / r.exact_time.seconds();
  keep_trace(mem, trace);
  return r;
}

}  // namespace csm::bench
