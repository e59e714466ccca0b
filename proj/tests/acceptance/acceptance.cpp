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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csm/alloc/region.hpp"
#include "csm/bench/bench.hpp"
#include "csm/columnar/compute.hpp"
#include "csm/ipc/descriptor_codec.hpp"
#include "csm/protocol/protocol.hpp"
#include "csm/rt/cluster.hpp"
#include "csm/sim/cluster_memory.hpp"
#include "descriptor_gen.hpp"

namespace {

using namespace csm;
using columnar::BufferRef;
using columnar::DataType;
using columnar::Scalar;

// Thrown by require() to end a criterion with a reason.
struct Failure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

int failures = 0;

void criterion(int n, const char* title, const std::function<std::string()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const Failure& f) {
    ok = false;
    detail = f.why;
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("unexpected error: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", n, title,
              detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<std::byte> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::byte> out(n);
  for (auto& b : out) b = static_cast<std::byte>(rng() & 0xff);
  return out;
}

struct Env {
  Env(std::uint32_t nodes, std::uint64_t bytes, sim::MemoryOptions o, rt::RuntimeOptions r = {})
      : mem(sim::SegmentMap::uniform(nodes, bytes), o), rt(mem, r) {}
  sim::ClusterMemory mem;
  rt::Cluster rt;
};

// Builds `data` as one shared buffer after every node has cached the start of
// the owner's region, then returns what each node reads.
std::vector<std::vector<std::byte>> build_and_read(sim::CoherenceLevel level,
                                                   std::optional<std::uint64_t> seed,
                                                   std::uint32_t nodes, NodeId writer,
                                                   NodeId owner,
                                                   const std::vector<std::byte>& data,
                                                   protocol::BuildOptions options = {}) {
  sim::MemoryOptions o;
  o.level = level;
  o.eviction_seed = seed;
  Env env(nodes, 256 << 10, o, rt::RuntimeOptions{seed});
  if (seed) env.mem.set_auto_adversary(2);
  const GlobalAddress base = env.rt.node(owner).region().base();
  for (NodeId n = 0; n < nodes; ++n) env.mem.read(n, base, 4096);
  const BufferRef b = protocol::create_shared_buffer(env.rt, writer, owner, data, options);
  std::vector<std::vector<std::byte>> reads;
  for (NodeId n = 0; n < nodes; ++n) reads.push_back(env.mem.read(n, b.addr, b.len));
  return reads;
}

std::string protocol_soundness() {
  constexpr int kSeeds = 1200;
  const std::uint32_t sizes[] = {2, 3, 5};
  std::mt19937_64 rng(2026);
  for (int seed = 0; seed < kSeeds; ++seed) {
    const std::uint32_t nodes = sizes[seed % 3];
    const auto writer = static_cast<NodeId>(rng() % nodes);
    const auto owner = static_cast<NodeId>(rng() % nodes);
    const std::uint64_t len = 1 + rng() % (64 << 10);
    const auto data = random_bytes(rng, len);
    const auto lc = build_and_read(sim::CoherenceLevel::lc_csm, seed, nodes, writer, owner, data);
    const auto gc = build_and_read(sim::CoherenceLevel::gc_csm, {}, nodes, writer, owner, data);
    for (NodeId n = 0; n < nodes; ++n) {
      require(lc[n] == gc[n], "seed " + std::to_string(seed) + " node " + std::to_string(n) +
                                  " differs from the oracle");
    }
  }
  return std::to_string(kSeeds) + " adversarial schedules, 0 mismatches";
}

std::string hazards() {
  const auto count = [](bool clear, bool flush, int* first_bad) {
    int bad = 0;
    std::mt19937_64 rng(7);
    for (int seed = 0; seed < 64; ++seed) {
      const auto data = random_bytes(rng, 1 + rng() % 4096);
      protocol::BuildOptions o;
      o.pre_write_flush = clear;
      o.post_write_flush = flush;
      // Writer 1, owner 0: node 2 holds stale lines, node 0 must fetch
      // the writer's data through memory.
      const auto reads = build_and_read(sim::CoherenceLevel::lc_csm, seed, 3, 1, 0, data, o);
      bool wrong = false;
      for (const auto& r : reads) wrong |= r != data;
      if (wrong && bad++ == 0) *first_bad = seed;
    }
    return bad;
  };
  int first = -1;
  require(count(true, true, &first) == 0, "full protocol failed");
  int stale_seed = -1;
  const int stale = count(false, true, &stale_seed);
  require(stale > 0, "no stale read without the pre-write flush");
  int lost_seed = -1;
  const int lost = count(true, false, &lost_seed);
  require(lost > 0, "no lost write without the writer flush");
  return "without pre-write flush " + std::to_string(stale) + "/64 schedules read stale data (first seed " +
         std::to_string(stale_seed) + "); without writer flush " + std::to_string(lost) +
         "/64 lose the write (first seed " + std::to_string(lost_seed) + ")";
}

bool ordered(const bench::BreakdownReport& r) {
  return r.write_remote > r.post_write_flush && r.post_write_flush > r.pre_write_flush &&
         r.pre_write_flush > r.malloc_request && r.malloc_request > r.send_descriptor &&
         r.send_descriptor > r.serialize_descriptor;
}

std::string breakdown() {
  bench::BenchConfig c;
  c.table_bytes = 1ull << 30;
  const auto plain = bench::bench_init_table(c);
  c.costs = bench::calibrated(c.costs);
  const auto cal = bench::bench_init_table(c);
  std::ostringstream rows;
  for (std::size_t i = 0; i < 6; ++i) rows << (i ? "/" : "") << cal.row(i);
  require(std::abs(cal.total - 300.44) <= 0.05 * 300.44,
          fmt("calibrated total %.3f ms outside 300.44 +/- 5%%", cal.total));
  require(ordered(cal), "calibrated ordering broken: " + rows.str());
  require(ordered(plain), "uncalibrated ordering broken");
  return fmt("calibrated total %.3f ms, uncalibrated %.3f ms, ordering holds; rows ", cal.total,
             plain.total) +
         rows.str();
}

std::string transfer() {
  std::ostringstream out;
  double ratio256 = 0;
  for (std::uint64_t mib : {1, 16, 256}) {
    bench::BenchConfig c;
    c.table_bytes = mib << 20;
    c.method = bench::Method::csm;
    const auto csm = bench::bench_transfer(c);
    c.method = bench::Method::ethernet;
    const auto eth = bench::bench_transfer(c);
    require(csm.bytes_on_wire < 1024,
            std::to_string(csm.bytes_on_wire) + " csm bytes on the wire at " + std::to_string(mib) + " MiB");
    const double ratio = eth.simulated_time / csm.simulated_time;
    if (mib == 256) ratio256 = ratio;
    out << mib << " MiB: " << csm.bytes_on_wire << " B, ratio " << fmt("%.0f", ratio) << "; ";
  }
  require(ratio256 >= 1e3, fmt("ratio %.1f below 1000 at 256 MiB", ratio256));
  return out.str() + "ratio >= 1000 at 256 MiB";
}

std::string strided() {
  double prev[2] = {1e300, 1e300};
  double unit[2] = {0, 0};
  SimDuration t1[2];
  for (std::uint64_t s = 1; s <= 1024; s *= 2) {
    double tp[2];
    for (int m = 0; m < 2; ++m) {
      bench::BenchConfig c;
      c.stride = s;
      c.mode = m == 0 ? bench::Mode::local : bench::Mode::remote;
      const auto r = bench::bench_strided(c);
      tp[m] = r.effective_throughput;
      require(tp[m] <= prev[m], "throughput rises at stride " + std::to_string(s));
      prev[m] = tp[m];
      if (s == 1) {
        unit[m] = tp[m];
        t1[m] = r.exact_time;
      }
      if (s == 16) {
        // Same lines, one element per line instead of sixteen.
        require(r.exact_time == t1[m] && r.useful_bytes * 16 == c.table_bytes,
                "stride 16 is not exactly 1/16 of stride 1");
        require(tp[m] * 16 == unit[m], "stride-16 throughput ratio is not 1/16");
      }
    }
    require(tp[1] < tp[0], "remote not slower at stride " + std::to_string(s));
  }
  return "non-increasing over strides 1..1024, remote < local, stride 16 = 1/16 exactly";
}

std::vector<std::byte> golden(const std::string& name) {
  std::ifstream in(std::string(CSM_GOLDEN_DIR) + "/" + name);
  require(in.good(), "missing golden file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ipc::from_hex(ss.str());
}

std::string codec() {
  test::DescriptorGen gen(42);
  for (int i = 0; i < 10000; ++i) {
    const auto d = gen.any();
    const auto bytes = ipc::serialize_descriptor(d);
    require(bytes.size() == test::expected_size(d), "size formula mismatch at " + std::to_string(i));
    require(ipc::deserialize_descriptor(bytes) == d, "round trip mismatch at " + std::to_string(i));
    require(ipc::serialize_descriptor(ipc::deserialize_descriptor(bytes)) == bytes,
            "re-encoding differs at " + std::to_string(i));
  }
  const std::pair<const char*, std::size_t> files[] = {
      {"batch_uint64_a.hex", 55}, {"table_id_name.hex", 170}, {"batch_empty.hex", 55}};
  for (const auto& [name, size] : files) {
    const auto bytes = golden(name);
    require(bytes.size() == size, std::string(name) + " has the wrong size");
    require(ipc::serialize_descriptor(ipc::deserialize_descriptor(bytes)) == bytes,
            std::string(name) + " does not re-encode byte for byte");
  }
  // Encoding and decoding a real table touches no memory.
  Env env(3, 4 << 20, {});
  std::vector<protocol::Partition> parts;
  for (NodeId n = 0; n < 3; ++n) {
    parts.push_back({n, {protocol::Values<std::uint64_t>(1000, std::uint64_t{n})}});
  }
  const auto t = protocol::build_spanning_table(
      env.rt, columnar::Schema({{"v", DataType::UInt64, false}}), parts);
  const auto mark = env.mem.ledger().mark();
  std::uint64_t fetched_before = 0;
  for (NodeId n = 0; n < 3; ++n) {
    fetched_before += env.mem.ledger().node(n).lines_fetched_local +
                      env.mem.ledger().node(n).lines_fetched_remote;
  }
  const auto bytes = env.rt.serialize(0, t);
  env.rt.deserialize(2, bytes);
  std::uint64_t fetched_after = 0;
  for (NodeId n = 0; n < 3; ++n) {
    fetched_after += env.mem.ledger().node(n).lines_fetched_local +
                     env.mem.ledger().node(n).lines_fetched_remote;
  }
  require(fetched_after == fetched_before, "serialize/deserialize fetched lines");
  for (std::size_t i = mark; i < env.mem.ledger().trace().size(); ++i) {
    const auto k = env.mem.ledger().trace()[i].kind;
    require(k == sim::EventKind::serialize || k == sim::EventKind::deserialize,
            "memory traffic during encoding");
  }
  return "10000 fuzzed descriptors round-trip with the closed-form size; 3 golden files match; 0 line fetches";
}

// Line-granular first-fit over a bitmap.
class BitmapOracle {
 public:
  explicit BitmapOracle(std::uint64_t lines) : used_(lines, false) {}
  std::optional<std::uint64_t> alloc(std::uint64_t bytes) {
    const std::uint64_t k = (bytes + 127) / 128;
    std::uint64_t run = 0;
    for (std::uint64_t i = 0; i < used_.size(); ++i) {
      run = used_[i] ? 0 : run + 1;
      if (run == k) {
        const std::uint64_t first = i + 1 - k;
        std::fill(used_.begin() + static_cast<long>(first), used_.begin() + static_cast<long>(i + 1), true);
        return first * 128;
      }
    }
    return std::nullopt;
  }
  void free(std::uint64_t offset, std::uint64_t bytes) {
    for (std::uint64_t j = offset / 128; j < (offset + bytes + 127) / 128; ++j) used_[j] = false;
  }

 private:
  std::vector<bool> used_;
};

std::vector<std::uint64_t> allocator_run(std::uint64_t seed, int ops, bool check) {
  constexpr std::uint64_t kSize = 1 << 20;
  const auto segments = sim::SegmentMap::uniform(1, kSize);
  alloc::Region region(0, GlobalAddress(0), kSize, segments);
  BitmapOracle oracle(kSize / 128);
  std::mt19937_64 rng(seed);
  std::vector<GlobalAddress> live;
  std::vector<std::uint64_t> log;
  for (int op = 0; op < ops; ++op) {
    if (live.empty() || rng() % 5 < 3) {
      const std::uint64_t size = 1 + rng() % 8000;
      const auto want = check ? oracle.alloc(size) : std::nullopt;
      try {
        const auto got = region.alloc(size);
        log.push_back(got.value);
        live.push_back(got);
        if (check) require(want && *want == got.value, "first-fit mismatch at op " + std::to_string(op));
      } catch (const Error& e) {
        require(e.code() == Errc::out_of_memory, e.what());
        if (check) require(!want, "spurious out of memory at op " + std::to_string(op));
        log.push_back(~0ull);
      }
    } else {
      const std::size_t i = rng() % live.size();
      const auto rec = *region.find(live[i]);
      region.free(live[i]);
      if (check) oracle.free(rec.addr.value, rec.requested);
      live[i] = live.back();
      live.pop_back();
    }
    if (check && op % 16 == 0) {
      std::uint64_t total = 0;
      std::uint64_t prev_end = 0;
      for (const auto& [a, rec] : region.allocations()) {
        require(a % 128 == 0, "misaligned allocation");
        require(a >= prev_end, "overlapping allocations");
        prev_end = a + rec.reserved;
        total += rec.reserved;
      }
      for (const auto& s : region.free_list()) total += s.length;
      require(total == kSize, "bytes not conserved at op " + std::to_string(op));
    }
  }
  return log;
}

std::string allocator() {
  constexpr int kOps = 100000;
  const auto first = allocator_run(1, kOps, true);
  const auto replay = allocator_run(1, kOps, false);
  require(first == replay, "replay produced different addresses");
  return "100000 ops match the bitmap first-fit oracle; conservation, disjointness, alignment hold; replay identical";
}

// Element sums and extrema from raw backing bytes.
struct Brute {
  double sum_f = 0;
  std::uint64_t sum_u = 0;
  std::int64_t sum_i = 0;
  std::optional<Scalar> lo, hi;
};

Brute brute_force(const sim::ClusterMemory& mem, const columnar::ChunkedColumn& col) {
  Brute b;
  for (const auto& chunk : col.chunks()) {
    if (chunk.length == 0) continue;
    const auto data = mem.backing_peek(chunk.data.addr, chunk.length * 8);
    std::vector<std::byte> valid;
    if (chunk.validity) valid = mem.backing_peek(chunk.validity->addr, chunk.validity->len);
    for (std::uint64_t r = 0; r < chunk.length; ++r) {
      if (chunk.validity && ((std::to_integer<unsigned>(valid[r / 8]) >> (r % 8)) & 1) == 0) continue;
      std::uint64_t raw = 0;
      for (int k = 7; k >= 0; --k) raw = raw << 8 | std::to_integer<std::uint64_t>(data[r * 8 + k]);
      Scalar v;
      switch (chunk.dtype) {
        case DataType::UInt64: b.sum_u += raw; v = raw; break;
        case DataType::Int64: b.sum_i += static_cast<std::int64_t>(raw); v = static_cast<std::int64_t>(raw); break;
        default: b.sum_f += std::bit_cast<double>(raw); v = std::bit_cast<double>(raw); break;
      }
      if (!b.lo || v < *b.lo) b.lo = v;
      if (!b.hi || *b.hi < v) b.hi = v;
    }
  }
  return b;
}

std::string spanning_compute() {
  std::mt19937_64 rng(8);
  std::uint64_t max_rows = 0;
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t rows = t == 0 ? 1'000'000 : 1 + rng() % 1'000'000;
    max_rows = std::max(max_rows, rows);
    const auto dtype = static_cast<DataType>(1 + t % 3);
    const bool nullable = rng() % 2 == 0;
    std::uint64_t cut1 = rng() % (rows + 1), cut2 = rng() % (rows + 1);
    if (cut1 > cut2) std::swap(cut1, cut2);
    const std::uint64_t bounds[] = {0, cut1, cut2, rows};
    std::vector<protocol::Partition> parts;
    for (NodeId n = 0; n < 3; ++n) {
      const std::uint64_t len = bounds[n + 1] - bounds[n];
      const auto is_null = [&] { return nullable && rng() % 10 == 0; };
      protocol::ColumnValues values;
      if (dtype == DataType::UInt64) {
        protocol::Values<std::uint64_t> v(len);
        for (auto& x : v) if (!is_null()) x = rng() % (1ull << 40);
        values = std::move(v);
      } else if (dtype == DataType::Int64) {
        protocol::Values<std::int64_t> v(len);
        for (auto& x : v) if (!is_null()) x = static_cast<std::int64_t>(rng() % (1ull << 40)) - (1ll << 39);
        values = std::move(v);
      } else {
        // Quarter steps keep every partial sum exact.
        protocol::Values<double> v(len);
        for (auto& x : v) if (!is_null()) x = static_cast<double>(static_cast<std::int64_t>(rng() % (1 << 22)) - (1 << 21)) / 4;
        values = std::move(v);
      }
      parts.push_back({n, {std::move(values)}});
    }
    Env env(3, 12 << 20, {});
    const auto table = protocol::build_spanning_table(
        env.rt, columnar::Schema({{"x", dtype, nullable}}), parts);
    const auto& col = table.columns[0];
    // Writers own their chunks and never flush them; push the dirty lines
    // to memory so the oracle can see them.
    for (NodeId n = 0; n < 3; ++n) {
      const auto& seg = *env.mem.segments().segment_of(n);
      env.mem.flush_range(n, seg.base, seg.size);
    }
    const Brute b = brute_force(env.mem, col);
    const NodeId reader = static_cast<NodeId>(t % 3);
    const Scalar sum = columnar::compute_sum(env.mem, reader, col);
    const Scalar want = dtype == DataType::UInt64  ? Scalar(b.sum_u)
                        : dtype == DataType::Int64 ? Scalar(b.sum_i)
                                                   : Scalar(b.sum_f);
    require(sum == want, "sum mismatch on table " + std::to_string(t));
    if (b.lo) {
      const auto [lo, hi] = columnar::compute_min_max(env.mem, reader, col);
      require(lo == *b.lo && hi == *b.hi, "min/max mismatch on table " + std::to_string(t));
    }
  }
  return "100 tables (up to " + std::to_string(max_rows) + " rows) over 3 nodes match the backing-store oracle";
}

}  // namespace

int main() {
  criterion(1, "protocol soundness against the global-coherence oracle", protocol_soundness);
  criterion(2, "hazard demonstrations", hazards);
  criterion(3, "component breakdown at 1 GiB", breakdown);
  criterion(4, "transfer comparison", transfer);
  criterion(5, "strided read throughput", strided);
  criterion(6, "descriptor codec", codec);
  criterion(7, "allocator", allocator);
  criterion(8, "spanning-table compute", spanning_compute);
  return failures;
}
