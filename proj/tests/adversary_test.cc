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

#include <gtest/gtest.h>

namespace mbrb {
namespace {

const Bundle kBundle{to_bytes("m"), 1, pid(0), {}};

TEST(SelectSuppressed, ZeroBudgetSuppressesNothing) {
  Rng rng(1);
  const ProcessSet correct = process_range(0, 6);
  for (auto kind : {DropKind::kNone, DropKind::kStaticSet,
                    DropKind::kPerBroadcastRandom, DropKind::kQuiescentAfterTau}) {
    DropPolicy p{kind};
    EXPECT_TRUE(select_suppressed(p, {pid(0), kBundle, 0}, correct, 0, rng).empty());
  }
}

TEST(SelectSuppressed, StaticSetHitsEveryBroadcast) {
  Rng rng(1);
  DropPolicy p{DropKind::kStaticSet, {pid(3), pid(4)}};
  const ProcessSet correct = process_range(0, 6);
  for (std::uint32_t s : {0u, 1u, 2u, 5u}) {
    EXPECT_EQ(select_suppressed(p, {pid(s), kBundle, 7}, correct, 2, rng),
              (ProcessSet{pid(3), pid(4)}));
  }
  // The sender still hears itself.
  EXPECT_EQ(select_suppressed(p, {pid(3), kBundle, 7}, correct, 2, rng),
            (ProcessSet{pid(4)}));
  p.suppress_self = true;
  EXPECT_EQ(select_suppressed(p, {pid(3), kBundle, 7}, correct, 2, rng),
            (ProcessSet{pid(3), pid(4)}));
}

TEST(SelectSuppressed, OnlyCorrectReceiversAreVictims) {
  Rng rng(1);
  DropPolicy p{DropKind::kStaticSet, {pid(3), pid(5)}};
  const ProcessSet correct = process_range(0, 5);  // p5 is Byzantine
  EXPECT_EQ(select_suppressed(p, {pid(0), kBundle, 0}, correct, 2, rng),
            (ProcessSet{pid(3)}));
}

TEST(SelectSuppressed, QuiescentAfterTau) {
  Rng rng(3);
  DropPolicy p{DropKind::kQuiescentAfterTau};
  p.tau = 5;
  const ProcessSet correct = process_range(0, 8);
  EXPECT_TRUE(select_suppressed(p, {pid(0), kBundle, 7}, correct, 2, rng).empty());
  EXPECT_TRUE(select_suppressed(p, {pid(0), kBundle, 5}, correct, 2, rng).empty());
  const auto early = select_suppressed(p, {pid(0), kBundle, 3}, correct, 2, rng);
  EXPECT_LE(early.size(), 2u);
  EXPECT_FALSE(early.contains(pid(0)));
}

TEST(SelectSuppressed, RandomRespectsBudgetAndVaries) {
  Rng rng(11);
  DropPolicy p{DropKind::kPerBroadcastRandom};
  const ProcessSet correct = process_range(0, 9);
  std::set<ProcessSet> seen;
  for (int i = 0; i < 200; ++i) {
    const auto s = select_suppressed(p, {pid(0), kBundle, 0}, correct, 2, rng);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_FALSE(s.contains(pid(0)));
    for (ProcessId v : s) EXPECT_TRUE(correct.contains(v));
    seen.insert(s);
  }
  EXPECT_GT(seen.size(), 10u);
}

TEST(SelectSuppressed, TargetedDependsOnPayload) {
  Rng rng(1);
  DropPolicy p{DropKind::kTargetedPartition};
  p.by_payload[to_bytes("m")] = {pid(4)};
  p.by_payload[to_bytes("x")] = {pid(3)};
  const ProcessSet correct = process_range(0, 5);
  EXPECT_EQ(select_suppressed(p, {pid(0), kBundle, 0}, correct, 1, rng),
            (ProcessSet{pid(4)}));
  const Bundle other{to_bytes("y"), 1, pid(0), {}};
  EXPECT_TRUE(select_suppressed(p, {pid(0), other, 0}, correct, 1, rng).empty());
}

TEST(DropPolicyTest, OversizedSetsAreRejected) {
  DropPolicy p{DropKind::kStaticSet, {pid(1), pid(2), pid(3)}};
  EXPECT_THROW(p.validate(2), ConfigError);
  EXPECT_NO_THROW(p.validate(3));
  EXPECT_EQ(drop_kind_from_string("per_broadcast_random"), DropKind::kPerBroadcastRandom);
  EXPECT_THROW(drop_kind_from_string("sometimes"), ConfigError);
}

// ---------------------------------------------------------------------------

class ByzTest : public ::testing::Test {
 protected:
  ByzProcess make(std::uint32_t id, ByzStrategy s) {
    return ByzProcess(pid(id), std::move(s), ring.pairs[id], ring.verifier, 5);
  }
  bool valid(const Bundle& b, const Signature& s) const {
    return ring.verifier->verify(encode_triplet(b.m, b.sn, b.sender), s);
  }

  KeyRing ring = KeyRing::generate(make_scheme(SchemeKind::kTest),
                                   key_seed_from_master(2), 5);
};

TEST_F(ByzTest, SilentNeverSends) {
  ByzProcess p = make(4, ByzStrategy{ByzKind::kSilent});
  const Bundle in{to_bytes("m"), 1, pid(0), {}};
  for (std::uint64_t r = 0; r < 5; ++r) {
    EXPECT_TRUE(byz_step(p, std::span<const Bundle>(&in, 1), r).empty());
  }
}

TEST_F(ByzTest, EquivocateSendsBothValuesOnce) {
  ByzStrategy s{ByzKind::kEquivocate};
  s.m = to_bytes("m");
  s.m_alt = to_bytes("m'");
  s.group_a = {pid(0), pid(1)};
  s.group_b = {pid(2), pid(3)};
  ByzProcess p = make(4, s);
  const auto out = byz_step(p, {}, 0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].receivers, s.group_a);
  EXPECT_EQ(out[0].bundle.m, s.m);
  EXPECT_EQ(out[1].receivers, s.group_b);
  EXPECT_EQ(out[1].bundle.m, s.m_alt);
  for (const auto& send : out) {
    EXPECT_EQ(send.bundle.sender, pid(4));
    ASSERT_EQ(send.bundle.sigs.size(), 1u);
    EXPECT_EQ(send.bundle.sigs[0].signer, pid(4));
    EXPECT_TRUE(valid(send.bundle, send.bundle.sigs[0]));
  }
  EXPECT_TRUE(byz_step(p, {}, 1).empty());
}

TEST_F(ByzTest, CrashSendsToStrictSubsetThenStops) {
  ByzStrategy s{ByzKind::kCrashMidBroadcast};
  s.targets = {pid(1)};
  ByzProcess p = make(4, s);
  const auto out = byz_step(p, {}, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].receivers, s.targets);
  EXPECT_TRUE(byz_step(p, {}, 1).empty());

  s.targets = process_range(0, 5);
  EXPECT_THROW(make(4, s), ConfigError);
}

TEST_F(ByzTest, ReplayerEndorsesThenReplaysOnce) {
  ByzProcess p = make(4, ByzStrategy{ByzKind::kReplayer});
  const Bytes m = to_bytes("m");
  const Bundle in{m, 1, pid(0),
                  {ring.scheme->sign(ring.pairs[0], encode_triplet(m, 1, pid(0)))}};
  auto first = byz_step(p, std::span<const Bundle>(&in, 1), 0);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(first[0].bundle.sigs.size(), 2u);
  ASSERT_NE(first[0].bundle.signature_of(pid(4)), nullptr);
  EXPECT_TRUE(valid(first[0].bundle, *first[0].bundle.signature_of(pid(4))));
  int replays = 0;
  for (int k = 0; k < 20; ++k) {
    const auto out = byz_step(p, std::span<const Bundle>(&in, 1), 1);
    replays += static_cast<int>(out.size());
    for (const auto& s : out) EXPECT_EQ(s.bundle, in);
  }
  EXPECT_EQ(replays, 1);
}

TEST_F(ByzTest, PartitionRelaysOnlyLeaderBundles) {
  ByzStrategy s{ByzKind::kPartitionAttacker};
  s.group_a = {pid(0)};
  s.group_b = {pid(1)};
  s.coalition = {pid(3), pid(4)};
  s.leader = pid(3);
  ByzProcess leader = make(3, s);
  ByzProcess helper = make(4, s);

  const auto opening = byz_step(leader, {}, 0);
  ASSERT_EQ(opening.size(), 2u);
  EXPECT_EQ(opening[0].receivers, (ProcessSet{pid(0), pid(4)}));
  EXPECT_EQ(opening[1].receivers, (ProcessSet{pid(1), pid(4)}));

  EXPECT_TRUE(byz_step(helper, {}, 0).empty());
  const auto relay = byz_step(helper, std::span<const Bundle>(&opening[1].bundle, 1), 1);
  ASSERT_EQ(relay.size(), 1u);
  EXPECT_EQ(relay[0].receivers, s.group_b);
  EXPECT_EQ(relay[0].bundle.m, s.m_alt);
  EXPECT_EQ(relay[0].bundle.sigs.size(), 2u);
  EXPECT_TRUE(byz_step(helper, std::span<const Bundle>(&opening[1].bundle, 1), 2).empty());

  Bundle forged = opening[0].bundle;
  forged.sigs[0].bytes[0] ^= 1;
  ByzProcess other = make(4, s);
  EXPECT_TRUE(byz_step(other, std::span<const Bundle>(&forged, 1), 1).empty());
}

TEST_F(ByzTest, ForeignKeyIsRejected) {
  EXPECT_THROW(ByzProcess(pid(4), ByzStrategy{}, ring.pairs[0], ring.verifier, 5),
               PreconditionError);
}

// ---------------------------------------------------------------------------

int available_signers(const PartitionPlan& plan, bool side_a) {
  const auto& s = plan.schedule;
  const ProcessSet& q = side_a ? s.q1 : s.q2;
  const ProcessSet& dd = side_a ? s.d1 : s.d2;
  return static_cast<int>(q.size() + dd.size() + s.q3.size());
}

TEST(PartitionAttack, OneOneCounts) {
  const auto plan = build_partition_attack(1, 1, to_bytes("m"), to_bytes("m'"), 10);
  EXPECT_EQ(plan.n, 5);
  EXPECT_EQ(quorum_threshold(plan.n, 1), 4);
  EXPECT_EQ(available_signers(plan, true), 3);
  EXPECT_EQ(available_signers(plan, false), 3);
  EXPECT_EQ(plan.byzantine.size(), 1u);
  EXPECT_EQ(plan.attacked_sender, pid(2));
  EXPECT_FALSE(plan.correct_sender);
  EXPECT_EQ(plan.drop.by_payload.at(to_bytes("m")), plan.schedule.d2);
  EXPECT_EQ(plan.drop.by_payload.at(to_bytes("m'")), plan.schedule.d1);
  ASSERT_EQ(plan.delays.size(), 2u);
  EXPECT_EQ(plan.delays[0].receivers, plan.schedule.q2);
  EXPECT_EQ(plan.delays[0].until, 10u);
}

TEST(PartitionAttack, ClassicThreeProcessBoundary) {
  const auto plan = build_partition_attack(1, 0, to_bytes("m"), to_bytes("m'"), 10);
  EXPECT_EQ(plan.n, 3);
  EXPECT_EQ(quorum_threshold(3, 1), 3);
  EXPECT_EQ(available_signers(plan, true), 2);
}

TEST(PartitionAttack, PartitionIsExactAndDisjoint) {
  for (int t = 0; t <= 3; ++t) {
    for (int d = 0; d <= 3; ++d) {
      if (t + d == 0) continue;
      for (bool extra : {false, true}) {
        const auto plan =
            build_partition_attack(t, d, to_bytes("m"), to_bytes("m'"), 4, extra);
        const auto& s = plan.schedule;
        ProcessSet all;
        std::size_t total = 0;
        for (const ProcessSet* part : {&s.q1, &s.q2, &s.q3, &s.d1, &s.d2}) {
          all.insert(part->begin(), part->end());
          total += part->size();
        }
        EXPECT_EQ(total, all.size());
        EXPECT_EQ(static_cast<int>(all.size()), plan.n);
        EXPECT_EQ(plan.n, 3 * t + 2 * d + (extra ? 1 : 0));
        EXPECT_EQ(static_cast<int>(plan.byzantine.size()), t);
        const int q = quorum_threshold(plan.n, t);
        if (!extra) EXPECT_LT(available_signers(plan, true), q);
        if (extra) EXPECT_GE(available_signers(plan, true), q);
      }
    }
  }
}

TEST(PartitionAttack, DegenerateInputsRejected) {
  EXPECT_THROW(build_partition_attack(0, 0, to_bytes("m"), to_bytes("x"), 1), ConfigError);
  EXPECT_THROW(build_partition_attack(1, 1, to_bytes("m"), to_bytes("m"), 1), ConfigError);
  const auto plan = build_partition_attack(0, 1, to_bytes("m"), to_bytes("x"), 1);
  EXPECT_EQ(plan.n, 2);
  ASSERT_TRUE(plan.correct_sender);
  EXPECT_EQ(*plan.correct_sender, *plan.schedule.d1.begin());
}

}  // namespace
}  // namespace mbrb
