// Copyright 2026 The MBRB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbrb {

using Bytes = std::vector<std::uint8_t>;

/// Process identity. Processes are numbered 0..n-1.
enum class ProcessId : std::uint32_t {};

constexpr ProcessId pid(std::uint32_t index) { return ProcessId{index}; }
constexpr std::uint32_t index_of(ProcessId p) {
  return static_cast<std::uint32_t>(p);
}

using ProcessSet = std::set<ProcessId>;

/// Range [first, first + count) as a process set.
ProcessSet process_range(std::uint32_t first, std::uint32_t count);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

std::string to_hex(const Bytes& b);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Slot identity: the (sender, sequence number) pair an app-message is
/// broadcast under.
struct SlotKey {
  ProcessId sender{};
  std::uint64_t sn = 0;

  auto operator<=>(const SlotKey&) const = default;
};

/// Invalid parameters or scenario descriptions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (a bug, not protocol input).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mbrb
