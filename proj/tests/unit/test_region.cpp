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

#include "csm/alloc/region.hpp"

#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace csm::alloc {
namespace {

const auto kSegs = sim::SegmentMap::uniform(2, 1 << 20);

Region fresh(std::uint64_t size = 65536) { return Region(0, GlobalAddress(0), size, kSegs); }

TEST(Region, CreateHasOneFreeSpan) {
  const auto r = fresh();
  EXPECT_EQ(r.free_list(), (std::vector<FreeSpan>{{0, 65536}}));
  EXPECT_EQ(r.stats().to_json(),
            nlohmann::json::parse(R"({"size":65536,"live":0,"free_spans":1,"largest_free":65536})"));
}

TEST(Region, CreateValidatesPlacement) {
  EXPECT_CSM_ERROR(Region(0, GlobalAddress(64), 1024, kSegs), Errc::misaligned);
  EXPECT_CSM_ERROR(Region(0, GlobalAddress(0), 0, kSegs), Errc::invalid_argument);
  EXPECT_CSM_ERROR(Region(1, GlobalAddress(0), 1024, kSegs), Errc::out_of_range);
  EXPECT_CSM_ERROR(Region(0, GlobalAddress((1 << 20) - 128), 256, kSegs), Errc::out_of_range);
  EXPECT_NO_THROW(Region(1, GlobalAddress(1 << 20), 1024, kSegs));
}

TEST(Region, FirstFitHandTrace) {
  auto r = fresh();
  EXPECT_EQ(r.alloc(100).value, 0u);
  EXPECT_EQ(r.find(GlobalAddress(0))->reserved, 128u);
  EXPECT_EQ(r.find(GlobalAddress(0))->requested, 100u);
  EXPECT_EQ(r.alloc(100).value, 128u);
}

TEST(Region, ExactFitThenOutOfMemory) {
  auto r = fresh();
  EXPECT_EQ(r.alloc(65536).value, 0u);
  EXPECT_CSM_ERROR(r.alloc(1), Errc::out_of_memory);
  EXPECT_CSM_ERROR(r.alloc(0), Errc::invalid_argument);
}

TEST(Region, FreeCoalesces) {
  auto r = fresh();
  const auto a = r.alloc(100);
  const auto b = r.alloc(100);
  r.free(a);
  EXPECT_EQ(r.free_list().size(), 2u);
  r.free(b);
  EXPECT_EQ(r.free_list(), (std::vector<FreeSpan>{{0, 65536}}));
}

TEST(Region, FreeErrors) {
  auto r = fresh();
  const auto a = r.alloc(10);
  EXPECT_CSM_ERROR(r.free(GlobalAddress(4096)), Errc::unknown_address);
  r.free(a);
  EXPECT_CSM_ERROR(r.free(a), Errc::double_free);
  const auto b = r.alloc(10);  // reuses the same address
  EXPECT_EQ(b, a);
  r.seal(b);
  EXPECT_TRUE(r.find(b)->sealed);
  EXPECT_CSM_ERROR(r.free(b), Errc::sealed);
}

TEST(Region, RegionAtNonzeroBaseUsesAbsoluteAddresses) {
  Region r(1, GlobalAddress(1 << 20), 4096, kSegs);
  const auto a = r.alloc(1);
  EXPECT_EQ(a.value, 1u << 20);
  EXPECT_EQ(r.free_list().front().offset, 128u);
}

// Line-granular first-fit over a bitmap; slow but obviously right.
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
        for (std::uint64_t j = first; j <= i; ++j) used_[j] = true;
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

TEST(Region, RandomSequencesMatchOracleAndKeepInvariants) {
  constexpr std::uint64_t kSize = 256 * 1024;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto r = fresh(kSize);
    BitmapOracle oracle(kSize / 128);
    std::mt19937_64 rng(seed);
    std::vector<GlobalAddress> live;
    for (int op = 0; op < 5000; ++op) {
      if (live.empty() || rng() % 3 != 0) {
        const std::uint64_t size = 1 + rng() % 6000;
        const auto want = oracle.alloc(size);
        try {
          const auto got = r.alloc(size);
          ASSERT_TRUE(want.has_value());
          ASSERT_EQ(got.value, *want);
          live.push_back(got);
        } catch (const Error& e) {
          ASSERT_EQ(e.code(), Errc::out_of_memory);
          ASSERT_FALSE(want.has_value());
        }
      } else {
        const std::size_t i = rng() % live.size();
        const auto rec = *r.find(live[i]);
        r.free(live[i]);
        oracle.free(rec.addr.value, rec.requested);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      }
      std::uint64_t total = 0;
      std::uint64_t prev_end = 0;
      for (const auto& [a, rec] : r.allocations()) {
        ASSERT_EQ(a % 128, 0u);
        ASSERT_GE(a, prev_end);
        ASSERT_EQ(rec.reserved, (rec.requested + 127) / 128 * 128);
        prev_end = a + rec.reserved;
        total += rec.reserved;
      }
      for (const auto& s : r.free_list()) total += s.length;
      ASSERT_EQ(total, kSize);
    }
  }
}

}  // namespace
}  // namespace csm::alloc
