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

// Deterministic execution engine. A Scenario fully determines the resulting
// Trace: n state machines, Byzantine strategies, the message adversary and
// either a lockstep or a seeded asynchronous scheduler.
//
// Lockstep: bundles sent at step r are received at step r+1 (or at the step a
// DelayRule releases them). Receivers drain their step inbox in
// (sender id, send order). A correct process hears its own broadcast at once;
// local computation takes no time.
//
// Async: one reception per step, picked uniformly among the eligible copies in
// flight. Every copy that is not suppressed is eventually received.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mbrb/adversary.h"
#include "mbrb/core.h"
#include "mbrb/sigcrypt.h"

namespace mbrb {

enum class ScheduleMode { kLockstep, kAsync };

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(std::string_view name);

struct Schedule {
  ScheduleMode mode = ScheduleMode::kLockstep;
  std::uint64_t seed = 0;  // async only
  /// Async only: copies carrying this app-message are received first.
  std::optional<Bytes> priority_payload;
};

struct InitialBroadcast {
  ProcessId sender{};
  Bytes m;
  std::uint64_t sn = 1;
  std::uint64_t step = 0;
};

struct Scenario {
  Config config;
  std::map<ProcessId, ByzStrategy> byzantine;
  DropPolicy drop;
  Schedule schedule;
  std::vector<InitialBroadcast> broadcasts;
  std::vector<DelayRule> delays;
  std::uint64_t horizon = 0;  // 0 selects the default for the schedule
  std::uint64_t master_seed = 0;
  SchemeKind scheme = SchemeKind::kTest;
  std::optional<KeySeed> key_seed;

  ProcessSet correct() const;
  /// 4n rounds lockstep, 50n^2 receptions async.
  std::uint64_t effective_horizon() const;
  /// Throws ConfigError on inconsistent descriptions (c mismatch, more than t
  /// Byzantine, ids out of range, Byzantine initial senders, ...).
  void validate() const;
};

// ---------------------------------------------------------------------------
// Trace

struct InvokeEvent {
  std::uint64_t step = 0;
  ProcessId process{};
  Bytes m;
  std::uint64_t sn = 0;
};

struct SendEvent {
  std::uint64_t step = 0;
  ProcessId sender{};
  std::uint64_t send_id = 0;
  bool from_correct = true;
  std::uint32_t intended = 0;         // copies before suppression
  std::vector<ProcessId> receivers;   // after suppression
  Bundle bundle;
};

struct SuppressEvent {
  std::uint64_t step = 0;
  ProcessId sender{};
  std::uint64_t send_id = 0;
  ProcessId victim{};
};

struct ReceiveEvent {
  std::uint64_t step = 0;
  ProcessId receiver{};
  std::uint64_t send_id = 0;
};

struct DeliverEvent {
  std::uint64_t step = 0;
  ProcessId process{};
  Bytes m;
  std::uint64_t sn = 0;
  ProcessId sender{};
};

using Event = std::variant<InvokeEvent, SendEvent, SuppressEvent, ReceiveEvent,
                           DeliverEvent>;

std::uint64_t step_of(const Event& e);

struct Trace {
  Config config;
  ProcessSet correct;
  std::vector<Event> events;
  std::vector<std::size_t> send_index;  // send_id -> position in events
  bool truncated = false;
  std::uint64_t last_step = 0;
  std::map<ProcessId, ProcessState> final_states;  // correct processes only

  const SendEvent& send(std::uint64_t send_id) const;
};

/// The key material a run of this scenario uses.
KeyRing keyring_for(const Scenario& scenario);

Trace run_lockstep(const Scenario& scenario);
Trace run_async(const Scenario& scenario);
/// Dispatches on scenario.schedule.mode.
Trace run(const Scenario& scenario);

/// One JSON object per line: a header, every event in order, then one summary
/// line per correct process.
void write_trace(std::ostream& out, const Trace& trace);
std::string serialize_trace(const Trace& trace);

inline constexpr std::string_view kTraceSchema = "mbrb-trace/1";

}  // namespace mbrb
