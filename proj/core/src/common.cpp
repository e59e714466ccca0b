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

#include "csm/common.hpp"

#include <cmath>

namespace csm {

SimDuration SimDuration::from_ns(double ns) {
  return SimDuration{static_cast<std::uint64_t>(std::llround(ns * 1e3))};
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::out_of_range: return "out_of_range";
    case Errc::overlap: return "overlap";
    case Errc::misaligned: return "misaligned";
    case Errc::out_of_memory: return "out_of_memory";
    case Errc::unknown_address: return "unknown_address";
    case Errc::double_free: return "double_free";
    case Errc::sealed: return "sealed";
    case Errc::unsealed: return "unsealed";
    case Errc::decode: return "decode";
    case Errc::timeout: return "timeout";
    case Errc::overflow: return "overflow";
    case Errc::type_mismatch: return "type_mismatch";
    case Errc::empty: return "empty";
    case Errc::shutdown: return "shutdown";
  }
  return "unknown";
}

}  // namespace csm
