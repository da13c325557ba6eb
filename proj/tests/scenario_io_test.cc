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

#include "mbrb/scenario_io.h"

#include <gtest/gtest.h>

namespace mbrb {
namespace {

const std::string kMinimal = R"({
  "schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 9,
  "broadcasts": [{"sender": 0, "m": "hi"}]
})";

TEST(ParseScenario, Minimal) {
  const Scenario sc = parse_scenario(kMinimal);
  EXPECT_EQ(sc.config.n, 4);
  EXPECT_EQ(sc.config.c, 4);
  EXPECT_EQ(sc.master_seed, 9u);
  ASSERT_EQ(sc.broadcasts.size(), 1u);
  EXPECT_EQ(sc.broadcasts[0].m, to_bytes("hi"));
  EXPECT_EQ(sc.broadcasts[0].sn, 1u);
  EXPECT_EQ(sc.schedule.mode, ScheduleMode::kLockstep);
}

TEST(ParseScenario, FullDocumentRoundTrips) {
  const std::string text = R"({
    "schema": "mbrb-scenario/1", "n": 7, "t": 2, "d": 1, "master_seed": 3,
    "scheme": "ed25519",
    "key_seed": "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
    "schedule": {"mode": "seeded_async", "seed": 5, "priority_payload": "b"},
    "horizon": 500, "dedup_emit": true,
    "drop_policy": {"kind": "targeted_partition", "by_payload": {"a": [1]}, "tau": 3},
    "byzantine": [{"id": 6, "strategy": "equivocate", "m": "a", "m_alt": "b",
                   "group_a": [0, 1], "group_b": [2, 3]},
                  {"id": 5, "strategy": "crash_mid_broadcast", "targets": [0]}],
    "broadcasts": [{"sender": 0, "m": "x", "sn": 2, "step": 1}],
    "delays": [{"payload": "a", "receivers": [2], "until": 40}]
  })";
  const Scenario sc = parse_scenario(text);
  EXPECT_EQ(sc.config.c, 5);
  EXPECT_EQ(sc.scheme, SchemeKind::kEd25519);
  ASSERT_TRUE(sc.key_seed);
  EXPECT_EQ((*sc.key_seed)[31], 0x1f);
  EXPECT_EQ(sc.schedule.mode, ScheduleMode::kAsync);
  EXPECT_EQ(sc.byzantine.at(pid(5)).targets, ProcessSet{pid(0)});
  EXPECT_TRUE(sc.config.dedup_emit);

  const Scenario again = parse_scenario(dump_scenario(sc));
  EXPECT_EQ(dump_scenario(again), dump_scenario(sc));
  EXPECT_EQ(serialize_trace(run(sc)), serialize_trace(run(again)));
}

TEST(ParseScenario, RejectsMalformedDocuments) {
  const char* bad[] = {
      "not json",
      R"({"n": 4, "t": 1, "d": 0, "master_seed": 1})",
      R"({"schema": "mbrb-scenario/2", "n": 4, "t": 1, "d": 0, "master_seed": 1})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1, "extra": 1})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": -1})",
      R"({"schema": "mbrb-scenario/1", "n": "4", "t": 1, "d": 0, "master_seed": 1})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1,
          "schedule": {"mode": "lockstep", "speed": 2}})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1,
          "key_seed": "00"})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1,
          "byzantine": [{"id": 3}]})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(parse_scenario(text), SchemaError) << text;
  }
}

TEST(ParseScenario, RejectsInconsistentScenarios) {
  const char* bad[] = {
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1,
          "byzantine": [{"id": 2, "strategy": "silent"}, {"id": 3, "strategy": "silent"}]})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 1, "master_seed": 1,
          "drop_policy": {"kind": "static_set", "victims": [1, 2]}})",
      R"({"schema": "mbrb-scenario/1", "n": 4, "t": 1, "d": 0, "master_seed": 1,
          "byzantine": [{"id": 3, "strategy": "dance"}]})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(parse_scenario(text), ConfigError) << text;
  }
}

TEST(ParseGrid, CountsAndLists) {
  const GridSpec g = parse_grid(R"({"schema": "mbrb-grid/1", "n": [4, 7],
      "byzantine": ["none", "replayer"], "drop": ["per_broadcast_random"],
      "schedule": "async", "seeds": 3})");
  EXPECT_EQ(g.n, (std::vector<int>{4, 7}));
  ASSERT_EQ(g.byzantine.size(), 2u);
  EXPECT_FALSE(g.byzantine[0]);
  EXPECT_EQ(g.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(g.mode, ScheduleMode::kAsync);
  EXPECT_THROW(parse_grid(R"({"schema": "mbrb-grid/1", "nn": [4]})"), SchemaError);
  EXPECT_THROW(parse_grid(R"({"n": [4]})"), SchemaError);
}

TEST(Sweep, EmptyGridGivesEmptyTable) {
  GridSpec g;
  EXPECT_TRUE(sweep(g).empty());
  EXPECT_EQ(format_rows({}).find('\n'), format_rows({}).size() - 1);
}

TEST(Sweep, UnreachableCellIsMarked) {
  GridSpec g;
  g.n = {10};
  g.t = {1};
  g.d = {1, 4};
  const auto rows = sweep(g, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].quorum_unreachable);
  EXPECT_TRUE(rows[1].quorum_unreachable);
  EXPECT_NE(format_table(rows).find("quorum unreachable"), std::string::npos);
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  GridSpec g;
  g.n = {4, 7};
  g.byzantine = {ByzKind::kSilent, ByzKind::kEquivocate};
  g.drop = {DropKind::kPerBroadcastRandom};
  g.seeds = {0, 1, 2};
  EXPECT_EQ(format_rows(sweep(g, 1)), format_rows(sweep(g, 4)));
}

}  // namespace
}  // namespace mbrb
