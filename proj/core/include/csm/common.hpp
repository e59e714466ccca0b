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

#ifndef CSM_COMMON_HPP_
#define CSM_COMMON_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace csm {

using NodeId = std::uint32_t;

// Cache-line granularity of the simulated machines. Every allocation, segment
// and flush is expressed in whole lines of this size.
inline constexpr std::uint64_t kLineSize = 128;

constexpr std::uint64_t align_down(std::uint64_t v) { return v & ~(kLineSize - 1); }
constexpr std::uint64_t align_up(std::uint64_t v) { return align_down(v + kLineSize - 1); }
constexpr bool is_aligned(std::uint64_t v) { return (v & (kLineSize - 1)) == 0; }

// Number of cache lines overlapped by the byte range [addr, addr + len).
constexpr std::uint64_t lines_spanned(std::uint64_t addr, std::uint64_t len) {
  if (len == 0) return 0;
  return (align_down(addr + len - 1) - align_down(addr)) / kLineSize + 1;
}

/// A byte offset into the single cluster-wide address space. The same value
/// designates the same byte on every node.
struct GlobalAddress {
  std::uint64_t value = 0;

  constexpr GlobalAddress() = default;
  constexpr explicit GlobalAddress(std::uint64_t v) : value(v) {}

  constexpr GlobalAddress line() const { return GlobalAddress(align_down(value)); }
  constexpr auto operator<=>(const GlobalAddress&) const = default;

  friend constexpr GlobalAddress operator+(GlobalAddress a, std::uint64_t off) {
    return GlobalAddress(a.value + off);
  }
  friend constexpr std::uint64_t operator-(GlobalAddress a, GlobalAddress b) {
    return a.value - b.value;
  }
};

/// Simulated time, kept as integer picoseconds so that ledgers sum and replay
/// exactly.
struct SimDuration {
  std::uint64_t ps = 0;

  static SimDuration from_ns(double ns);

  constexpr double ns() const { return static_cast<double>(ps) / 1e3; }
  constexpr double ms() const { return static_cast<double>(ps) / 1e9; }
  constexpr double seconds() const { return static_cast<double>(ps) / 1e12; }

  constexpr auto operator<=>(const SimDuration&) const = default;
  constexpr SimDuration& operator+=(SimDuration o) {
    ps += o.ps;
    return *this;
  }
  friend constexpr SimDuration operator+(SimDuration a, SimDuration b) { return {a.ps + b.ps}; }
  friend constexpr SimDuration operator-(SimDuration a, SimDuration b) { return {a.ps - b.ps}; }
  friend constexpr SimDuration operator*(SimDuration a, std::uint64_t n) { return {a.ps * n}; }
};

enum class Errc {
  invalid_argument,
  out_of_range,
  overlap,
  misaligned,
  out_of_memory,
  unknown_address,
  double_free,
  sealed,
  unsealed,
  decode,
  timeout,
  overflow,
  type_mismatch,
  empty,
  shutdown,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace csm

#endif  // CSM_COMMON_HPP_
