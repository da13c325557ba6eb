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

// Per-process state machine of the signature-based message-adversary-tolerant
// Byzantine reliable broadcast.
//
// A process collects signatures ("witnesses") for triplets (m, sn, j). On the
// first valid bundle for a slot (sn, j) it adds its own signature and
// re-broadcasts everything it holds; once strictly more than (n+t)/2
// signatures for one triplet are saved it broadcasts that quorum and delivers.
//
// The state machine performs no I/O: both entry points return the bundles to
// broadcast and the deliveries to hand to the application.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "mbrb/sigcrypt.h"
#include "mbrb/types.h"

namespace mbrb {

/// System parameters. Processes only ever look at n and t; d and c describe
/// the run and are used by the harness.
struct Config {
  int n = 1;
  int t = 0;
  int d = 0;
  int c = 1;  // processes that actually behave correctly in the run
  /// Skip the quorum broadcast when it would repeat the forward bundle
  /// emitted by the same reception.
  bool dedup_emit = false;

  /// Throws ConfigError unless n >= 1, 0 <= t < n, d >= 0, n-t <= c <= n.
  void validate() const;
  /// n > 3t + 2d
  bool assumption_ok() const { return n > 3 * t + 2 * d; }
  /// c - d > floor((n+t)/2)
  bool quorum_reachable() const { return c - d > (n + t) / 2; }
};

/// Smallest signature count that is strictly more than (n+t)/2.
constexpr int quorum_threshold(int n, int t) { return (n + t) / 2 + 1; }

/// The only wire message: a triplet plus the signatures backing it.
struct Bundle {
  Bytes m;
  std::uint64_t sn = 0;
  ProcessId sender{};
  std::vector<Signature> sigs;

  Triplet triplet() const { return Triplet{m, sn, sender}; }
  SlotKey slot() const { return SlotKey{sender, sn}; }
  const Signature* signature_of(ProcessId signer) const;

  bool operator==(const Bundle&) const = default;
};

/// Canonical octets of a bundle: triplet encoding, u32be signature count, then
/// (u64be signer, u32be length, bytes) per signature sorted by signer.
Bytes serialize_bundle(const Bundle& b);

struct Delivery {
  Bytes m;
  std::uint64_t sn = 0;
  ProcessId sender{};
  ProcessId at_process{};

  bool operator==(const Delivery&) const = default;
};

struct SlotState {
  /// Saved signatures per app-message, at most one per signer.
  std::map<Bytes, std::map<ProcessId, Signature>> sigs_by_message;
  std::optional<Bytes> signed_by_me;
  std::optional<Bytes> delivered;

  bool operator==(const SlotState&) const = default;
};

struct ProcessState {
  ProcessId id{};
  Config config;
  KeyPair keys;
  std::shared_ptr<const Verifier> peers;
  std::map<SlotKey, SlotState> store;

  ProcessState(ProcessId id, Config config, KeyPair keys,
               std::shared_ptr<const Verifier> peers);

  const SlotState* slot(const SlotKey& key) const;
  /// Value equality on everything but the shared verifier.
  bool same_as(const ProcessState& other) const;
};

struct Outputs {
  std::vector<Bundle> outbound;
  std::vector<Delivery> delivered;

  bool empty() const { return outbound.empty() && delivered.empty(); }
};

/// Entry point for the application. Throws PreconditionError when this
/// process already used sn.
Outputs mbrb_broadcast(ProcessState& state, const Bytes& m, std::uint64_t sn);

/// Reception of a (possibly Byzantine-crafted) bundle. Never throws on bad
/// input; such bundles are ignored or partially salvaged.
Outputs handle_bundle(ProcessState& state, const Bundle& b);

/// Number of saved signatures for exactly (m, sn, sender).
int saved_count(const ProcessState& state, const Bytes& m, std::uint64_t sn,
                ProcessId sender);

}  // namespace mbrb
