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

// Parameter-grid experiments and the tightness demonstration. Everything here
// is a deterministic function of its inputs.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbrb/metrics.h"
#include "mbrb/simnet.h"

namespace mbrb {

/// One grid point. byz_count defaults to t; a strategy of nullopt means the
/// run has no Byzantine process at all (c = n).
struct CellSpec {
  int n = 4;
  int t = 1;
  int d = 0;
  std::optional<ByzKind> byzantine = ByzKind::kSilent;
  DropKind drop = DropKind::kStaticSet;
  ScheduleMode mode = ScheduleMode::kLockstep;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
};

/// Byzantine processes take the highest t ids; the correct p0 broadcasts "m0"
/// with sn 1. A static victim set is d correct processes other than p0 picked
/// from the seed.
Scenario make_cell_scenario(const CellSpec& cell);

/// Every (n, t, d) with n in [n_lo, n_hi] and n > 3t + 2d.
std::vector<CellSpec> assumption_grid(int n_lo, int n_hi);

struct RunOutcome {
  Scenario scenario;
  Trace trace;
  std::optional<BoundPrediction> bounds;  // nullopt: quorum unreachable
  PropertyReport report;
  std::optional<std::uint64_t> lambda;
  std::uint64_t mu = 0;         // for the correct sender's slot
  int deliverers = 0;           // correct deliverers of the correct broadcast
  int deliverers_step2 = 0;
  /// Failed inequalities between the prediction and the observation.
  std::vector<std::string> bound_violations;
};

/// Runs the scenario and checks it against the closed-form guarantees.
/// Liveness verdicts are only attached when n > 3t + 2d.
RunOutcome run_and_evaluate(const Scenario& scenario);

/// Aggregate over the seeds of one (n, t, d, strategy, policy) cell.
struct SweepRow {
  int n = 0, t = 0, d = 0, c = 0;
  std::string byzantine;
  std::string drop;
  int runs = 0;
  bool quorum_unreachable = false;
  std::optional<BoundPrediction> bounds;
  int min_ell = 0;
  std::optional<std::uint64_t> max_lambda;
  bool lambda_missing = false;  // some run never reached ell deliverers
  int min_ell2 = 0;
  std::uint64_t max_mu = 0;
  int safety_failures = 0;
  int liveness_failures = 0;
  int bound_violations = 0;
};

struct GridSpec {
  std::vector<int> n;
  std::vector<int> t;  // empty: every t allowed by the assumption
  std::vector<int> d;  // empty: every d allowed by the assumption
  std::vector<std::optional<ByzKind>> byzantine{ByzKind::kSilent};
  std::vector<DropKind> drop{DropKind::kStaticSet};
  ScheduleMode mode = ScheduleMode::kLockstep;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t horizon = 0;
};

/// Cells run on `threads` workers (0: hardware concurrency); rows come back
/// in grid order regardless.
std::vector<SweepRow> sweep(const GridSpec& grid, unsigned threads = 0);

std::string format_table(const std::vector<SweepRow>& rows);
std::string format_rows(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------

struct BoundaryRun {
  Scenario scenario;
  Trace trace;
  PartitionPlan plan;
  PropertyReport safety;
  std::map<Bytes, int> deliveries;  // attacked slot, by value
  int total_deliveries = 0;
  int max_signers = 0;
  int quorum = 0;
  int ell = 0;  // c - d
};

struct BoundaryReport {
  BoundaryRun boundary;  // n = 3t + 2d
  BoundaryRun control;   // n = 3t + 2d + 1
  /// Zero deliveries, signer ceiling below quorum and safety intact.
  bool boundary_holds = false;
  /// At least c - d correct deliveries of a single value, safety intact.
  bool control_delivers = false;
};

/// Throws ConfigError for t + d < 1. Delayed copies are released at
/// horizon / 2; horizon 0 picks 8 (3t + 2d + 1).
BoundaryReport run_boundary(int t, int d, std::uint64_t horizon = 0,
                            std::uint64_t seed = 0);

std::string format_boundary(const BoundaryReport& report);

}  // namespace mbrb
