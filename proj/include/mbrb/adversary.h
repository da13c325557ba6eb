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

// The two adversaries a run is exposed to:
//
//  * the message adversary, which may suppress up to d copies of every
//    broadcast issued by a correct process (copies meant for correct
//    receivers only), and
//  * Byzantine processes, which send arbitrary point-to-point bundles but can
//    only sign with their own key.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mbrb/core.h"
#include "mbrb/rng.h"
#include "mbrb/sigcrypt.h"
#include "mbrb/types.h"

namespace mbrb {

// ---------------------------------------------------------------------------
// Message adversary

enum class DropKind {
  kNone,
  kStaticSet,           // always the same victims D
  kPerBroadcastRandom,  // fresh random victims for every broadcast
  kTargetedPartition,   // victims chosen by the bundle's app-message
  kQuiescentAfterTau,   // like static_set (or random if no victims) until tau
};

std::string to_string(DropKind kind);
DropKind drop_kind_from_string(std::string_view name);

struct DropPolicy {
  DropKind kind = DropKind::kNone;
  ProcessSet victims;
  std::map<Bytes, ProcessSet> by_payload;
  std::uint64_t tau = 0;
  /// Count the sender's own copy as suppressible. Off by default: a process
  /// always hears its own broadcast.
  bool suppress_self = false;

  /// Throws ConfigError when a fixed victim set exceeds d.
  void validate(int d) const;
};

struct BroadcastEvent {
  ProcessId sender{};
  const Bundle& bundle;
  std::uint64_t step = 0;
};

/// Receivers whose copy of a correct process's broadcast is dropped. Always a
/// subset of `correct` with at most d members.
ProcessSet select_suppressed(const DropPolicy& policy,
                             const BroadcastEvent& event,
                             const ProcessSet& correct, int d, Rng& rng);

// ---------------------------------------------------------------------------
// Byzantine processes

enum class ByzKind {
  kSilent,
  kCrashMidBroadcast,
  kEquivocate,
  kReplayer,
  kPartitionAttacker,
};

std::string to_string(ByzKind kind);
ByzKind byz_kind_from_string(std::string_view name);

struct ByzStrategy {
  ByzKind kind = ByzKind::kSilent;
  Bytes m = to_bytes("m");
  Bytes m_alt = to_bytes("m'");
  std::uint64_t sn = 1;
  ProcessSet group_a;    // equivocate / partition_attacker: receivers of m
  ProcessSet group_b;    // ... receivers of m_alt
  ProcessSet coalition;  // partition_attacker: the colluding Byzantine set
  ProcessSet targets;    // crash_mid_broadcast: who gets the bundle
  ProcessId leader{};    // partition_attacker: owner of the attacked slot
};

/// Point-to-point sends; Byzantine processes are not bound to broadcast.
struct RawSend {
  ProcessSet receivers;
  Bundle bundle;
};

class ByzProcess {
 public:
  ByzProcess(ProcessId id, ByzStrategy strategy, KeyPair own_keys,
             std::shared_ptr<const Verifier> verifier, int n);

  ProcessId id() const { return id_; }
  const ByzStrategy& strategy() const { return strategy_; }

  std::vector<RawSend> step(std::span<const Bundle> inbox, std::uint64_t round);

 private:
  Signature sign(const Bytes& m, std::uint64_t sn, ProcessId sender) const;
  Bundle own_bundle(const Bytes& m) const;

  ProcessId id_;
  ByzStrategy strategy_;
  KeyPair keys_;
  std::shared_ptr<const Verifier> verifier_;
  ProcessSet everyone_;
  bool started_ = false;
  std::set<Bytes> relayed_;                       // partition_attacker
  std::map<Bytes, std::pair<int, Bundle>> seen_;  // replayer: encoding -> (count, first)
};

inline std::vector<RawSend> byz_step(ByzProcess& p,
                                     std::span<const Bundle> inbox,
                                     std::uint64_t round) {
  return p.step(inbox, round);
}

// ---------------------------------------------------------------------------
// Partition attack at n = 3t + 2d

/// Holds back bundles carrying `payload` to `receivers` until step `until`.
struct DelayRule {
  Bytes payload;
  ProcessSet receivers;
  std::uint64_t until = 0;
};

struct PartitionSchedule {
  ProcessSet q1, q2, q3, d1, d2;
  Bytes m, m_alt;
  std::uint64_t sn = 1;
  std::uint64_t tau = 0;
};

struct PartitionPlan {
  int n = 0;
  int t = 0;
  int d = 0;
  PartitionSchedule schedule;
  DropPolicy drop;
  std::map<ProcessId, ByzStrategy> byzantine;
  std::vector<DelayRule> delays;
  /// With t = 0 there is nobody to equivocate; a correct member of D1
  /// broadcasts m instead.
  std::optional<ProcessId> correct_sender;
  ProcessId attacked_sender{};
};

/// Splits processes into Q1 | Q2 | Q3 | D1 | D2 (ids in that order). Q3 is
/// Byzantine and equivocates m to Q1+D1 and m_alt to Q2+D2; m copies to D2
/// and m_alt copies to D1 are suppressed; m to Q2 and m_alt to Q1 are delayed
/// until tau. With `one_extra`, an additional correct process joins Q1
/// (n = 3t + 2d + 1), which is the control configuration.
PartitionPlan build_partition_attack(int t, int d, const Bytes& m,
                                     const Bytes& m_alt, std::uint64_t tau,
                                     bool one_extra = false);

}  // namespace mbrb
