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

// JSON scenario and grid files. Unknown keys are errors at every level so a
// typo cannot silently fall back to a default.
//
// Scenario ("mbrb-scenario/1"):
//   schema, n, t, d, master_seed      required
//   scheme                            "test" | "ed25519"
//   key_seed                          64 hex digits
//   schedule {mode, seed, priority_payload}
//   horizon, dedup_emit
//   drop_policy {kind, victims, by_payload {text: [ids]}, tau, suppress_self}
//   byzantine [{id, strategy, m, m_alt, sn, group_a, group_b, coalition,
//               targets, leader}]
//   broadcasts [{sender, m, sn, step}]
//   delays [{payload, receivers, until}]
//
// Grid ("mbrb-grid/1"): n, t, d (lists; t/d optional), byzantine, drop,
// schedule, seeds (list or count), horizon.
//
// App-messages are written as plain text.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mbrb/experiments.h"
#include "mbrb/simnet.h"

namespace mbrb {

inline constexpr std::string_view kScenarioSchema = "mbrb-scenario/1";
inline constexpr std::string_view kGridSchema = "mbrb-grid/1";

class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Parses and validates. Throws SchemaError for malformed documents and
/// ConfigError for well-formed but inconsistent ones.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
/// Inverse of parse_scenario.
std::string dump_scenario(const Scenario& scenario);

GridSpec parse_grid(std::string_view text);
GridSpec load_grid(const std::filesystem::path& path);

}  // namespace mbrb
