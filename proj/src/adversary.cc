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

#include "mbrb/adversary.h"

#include <algorithm>
#include <iterator>

namespace mbrb {
namespace {

ProcessSet eligible_victims(const DropPolicy& policy, ProcessId sender,
                            const ProcessSet& correct) {
  ProcessSet out = correct;
  if (!policy.suppress_self) out.erase(sender);
  return out;
}

ProcessSet intersect(const ProcessSet& a, const ProcessSet& b) {
  ProcessSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

ProcessSet random_subset(const ProcessSet& from, int d, Rng& rng) {
  std::vector<ProcessId> pool(from.begin(), from.end());
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(d), pool.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_below(pool.size() - i)]);
  }
  return ProcessSet(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
}

ProcessSet truncate(ProcessSet s, int d) {
  while (static_cast<int>(s.size()) > d) s.erase(std::prev(s.end()));
  return s;
}

}  // namespace

std::string to_string(DropKind kind) {
  switch (kind) {
    case DropKind::kNone:
      return "none";
    case DropKind::kStaticSet:
      return "static_set";
    case DropKind::kPerBroadcastRandom:
      return "per_broadcast_random";
    case DropKind::kTargetedPartition:
      return "targeted_partition";
    case DropKind::kQuiescentAfterTau:
      return "quiescent_after_tau";
  }
  return "unknown";
}

DropKind drop_kind_from_string(std::string_view name) {
  for (auto k : {DropKind::kNone, DropKind::kStaticSet,
                 DropKind::kPerBroadcastRandom, DropKind::kTargetedPartition,
                 DropKind::kQuiescentAfterTau}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown drop policy '" + std::string(name) + "'");
}

void DropPolicy::validate(int d) const {
  if (d < 0) throw ConfigError("d must be non-negative");
  if (static_cast<int>(victims.size()) > d) {
    throw ConfigError("victim set of size " + std::to_string(victims.size()) +
                      " exceeds the adversary budget d = " + std::to_string(d));
  }
  for (const auto& [payload, set] : by_payload) {
    if (static_cast<int>(set.size()) > d) {
      throw ConfigError("targeted victim set for payload '" +
                        mbrb::to_string(payload) + "' exceeds d = " +
                        std::to_string(d));
    }
  }
}

ProcessSet select_suppressed(const DropPolicy& policy,
                             const BroadcastEvent& event,
                             const ProcessSet& correct, int d, Rng& rng) {
  if (d <= 0) return {};
  const ProcessSet candidates = eligible_victims(policy, event.sender, correct);
  switch (policy.kind) {
    case DropKind::kNone:
      return {};
    case DropKind::kStaticSet:
      return truncate(intersect(policy.victims, candidates), d);
    case DropKind::kPerBroadcastRandom:
      return random_subset(candidates, d, rng);
    case DropKind::kTargetedPartition: {
      auto it = policy.by_payload.find(event.bundle.m);
      if (it == policy.by_payload.end()) return {};
      return truncate(intersect(it->second, candidates), d);
    }
    case DropKind::kQuiescentAfterTau:
      if (event.step >= policy.tau) return {};
      if (!policy.victims.empty()) {
        return truncate(intersect(policy.victims, candidates), d);
      }
      return random_subset(candidates, d, rng);
  }
  return {};
}

// ---------------------------------------------------------------------------

std::string to_string(ByzKind kind) {
  switch (kind) {
    case ByzKind::kSilent:
      return "silent";
    case ByzKind::kCrashMidBroadcast:
      return "crash_mid_broadcast";
    case ByzKind::kEquivocate:
      return "equivocate";
    case ByzKind::kReplayer:
      return "replayer";
    case ByzKind::kPartitionAttacker:
      return "partition_attacker";
  }
  return "unknown";
}

ByzKind byz_kind_from_string(std::string_view name) {
  for (auto k : {ByzKind::kSilent, ByzKind::kCrashMidBroadcast,
                 ByzKind::kEquivocate, ByzKind::kReplayer,
                 ByzKind::kPartitionAttacker}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown Byzantine strategy '" + std::string(name) + "'");
}

ByzProcess::ByzProcess(ProcessId id, ByzStrategy strategy, KeyPair own_keys,
                       std::shared_ptr<const Verifier> verifier, int n)
    : id_(id),
      strategy_(std::move(strategy)),
      keys_(std::move(own_keys)),
      verifier_(std::move(verifier)),
      everyone_(process_range(0, static_cast<std::uint32_t>(n))) {
  if (keys_.owner != id_) {
    throw PreconditionError("Byzantine process given someone else's key");
  }
  if (strategy_.kind == ByzKind::kCrashMidBroadcast &&
      strategy_.targets.size() >= everyone_.size()) {
    throw ConfigError("crash_mid_broadcast targets must be a strict subset");
  }
}

Signature ByzProcess::sign(const Bytes& m, std::uint64_t sn,
                           ProcessId sender) const {
  return verifier_->scheme().sign(keys_, encode_triplet(m, sn, sender));
}

Bundle ByzProcess::own_bundle(const Bytes& m) const {
  return Bundle{m, strategy_.sn, id_, {sign(m, strategy_.sn, id_)}};
}

std::vector<RawSend> ByzProcess::step(std::span<const Bundle> inbox,
                                      std::uint64_t /*round*/) {
  std::vector<RawSend> out;
  const bool first = !started_;
  started_ = true;

  switch (strategy_.kind) {
    case ByzKind::kSilent:
      break;

    case ByzKind::kCrashMidBroadcast:
      if (first) out.push_back({strategy_.targets, own_bundle(strategy_.m)});
      break;

    case ByzKind::kEquivocate:
      if (first) {
        out.push_back({strategy_.group_a, own_bundle(strategy_.m)});
        out.push_back({strategy_.group_b, own_bundle(strategy_.m_alt)});
      }
      break;

    case ByzKind::kReplayer:
      // Endorse every new triplet to everybody on first sight, then replay
      // that first (by now stale) bundle once more after n sightings.
      for (const Bundle& b : inbox) {
        if (b.m.size() > kMaxPayloadBytes) continue;
        Bytes key = encode_triplet(b.m, b.sn, b.sender).bytes;
        auto [it, fresh] = seen_.try_emplace(std::move(key), 0, b);
        auto& [count, first_bundle] = it->second;
        ++count;
        if (fresh) {
          Bundle endorsed = b;
          if (endorsed.signature_of(id_) == nullptr) {
            endorsed.sigs.push_back(sign(b.m, b.sn, b.sender));
          }
          out.push_back({everyone_, std::move(endorsed)});
        } else if (count == static_cast<int>(everyone_.size())) {
          out.push_back({everyone_, first_bundle});
        }
      }
      break;

    case ByzKind::kPartitionAttacker: {
      const auto& s = strategy_;
      if (first && id_ == s.leader) {
        ProcessSet to_a = s.group_a, to_b = s.group_b;
        to_a.insert(s.coalition.begin(), s.coalition.end());
        to_b.insert(s.coalition.begin(), s.coalition.end());
        to_a.erase(id_);
        to_b.erase(id_);
        out.push_back({to_a, own_bundle(s.m)});
        out.push_back({to_b, own_bundle(s.m_alt)});
      }
      for (const Bundle& b : inbox) {
        if (b.sender != s.leader || b.sn != s.sn || id_ == s.leader) continue;
        const bool is_m = b.m == s.m;
        if (!is_m && b.m != s.m_alt) continue;
        if (relayed_.contains(b.m)) continue;
        const Signature* lead = b.signature_of(s.leader);
        if (lead == nullptr ||
            !verifier_->verify(encode_triplet(b.m, b.sn, b.sender), *lead)) {
          continue;
        }
        relayed_.insert(b.m);
        Bundle endorsed{b.m, b.sn, b.sender, {*lead, sign(b.m, b.sn, b.sender)}};
        out.push_back({is_m ? s.group_a : s.group_b, std::move(endorsed)});
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PartitionPlan build_partition_attack(int t, int d, const Bytes& m,
                                     const Bytes& m_alt, std::uint64_t tau,
                                     bool one_extra) {
  if (t < 0 || d < 0) throw ConfigError("t and d must be non-negative");
  if (t + d < 1) throw ConfigError("partition attack needs t >= 1 or d >= 1");
  if (m == m_alt) throw ConfigError("the two payloads must differ");

  PartitionPlan plan;
  plan.t = t;
  plan.d = d;
  plan.n = 3 * t + 2 * d + (one_extra ? 1 : 0);

  const auto ut = static_cast<std::uint32_t>(t);
  const auto ud = static_cast<std::uint32_t>(d);
  auto& s = plan.schedule;
  s.q1 = process_range(0, ut);
  s.q2 = process_range(ut, ut);
  s.q3 = process_range(2 * ut, ut);
  s.d1 = process_range(3 * ut, ud);
  s.d2 = process_range(3 * ut + ud, ud);
  if (one_extra) s.q1.insert(pid(3 * ut + 2 * ud));
  s.m = m;
  s.m_alt = m_alt;
  s.sn = 1;
  s.tau = tau;

  ProcessSet side_a = s.q1, side_b = s.q2;
  side_a.insert(s.d1.begin(), s.d1.end());
  side_b.insert(s.d2.begin(), s.d2.end());

  plan.drop.kind = DropKind::kTargetedPartition;
  plan.drop.by_payload[m] = s.d2;
  plan.drop.by_payload[m_alt] = s.d1;
  plan.delays.push_back(DelayRule{m, s.q2, tau});
  plan.delays.push_back(DelayRule{m_alt, s.q1, tau});

  if (t == 0) {
    plan.correct_sender = *s.d1.begin();
    plan.attacked_sender = *s.d1.begin();
    return plan;
  }

  plan.attacked_sender = *s.q3.begin();
  for (ProcessId p : s.q3) {
    ByzStrategy strat;
    strat.kind = ByzKind::kPartitionAttacker;
    strat.m = m;
    strat.m_alt = m_alt;
    strat.sn = s.sn;
    strat.group_a = side_a;
    strat.group_b = side_b;
    strat.coalition = s.q3;
    strat.leader = plan.attacked_sender;
    plan.byzantine.emplace(p, std::move(strat));
  }
  return plan;
}

}  // namespace mbrb
