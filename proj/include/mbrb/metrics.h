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
#include <optional>
#include <string>
#include <vector>

#include "mbrb/simnet.h"

namespace mbrb {

// ---------------------------------------------------------------------------
// Closed-form guarantees

enum class LambdaClass { kTwo, kThree, kMore };

std::string to_string(LambdaClass c);

/// Guarantees for a run with n processes, t tolerated Byzantine, adversary
/// power d and c correct processes. Branch predicates are evaluated in exact
/// integer arithmetic:
///
///   q            = floor((n+t)/2)
///   two          : d * (q+1) < c - q
///   three        : 2 (c-d)^2 > c (n+t)
///   ell2_min     = c - d - floor(d q / (c - d - q)), clamped at 0
struct BoundPrediction {
  int quorum = 0;
  int ell = 0;
  LambdaClass lambda_class = LambdaClass::kMore;
  int ell2_min = 0;
  bool ell2_vacuous = false;  // the unclamped value was <= 0
  std::int64_t mu_max = 0;
};

class QuorumUnreachable : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Throws QuorumUnreachable unless c - d > floor((n+t)/2).
BoundPrediction predict_bounds(int n, int t, int d, int c);

// ---------------------------------------------------------------------------
// Property checkers

enum class Property {
  kValidity,
  kNoDuplication,
  kNoDuplicity,
  kLocalDelivery,
  kGlobalDelivery,
};

inline constexpr Property kAllProperties[] = {
    Property::kValidity, Property::kNoDuplication, Property::kNoDuplicity,
    Property::kLocalDelivery, Property::kGlobalDelivery};

std::string to_string(Property p);

enum class Verdict { kPass, kFail, kInconclusive, kNotApplicable };

std::string to_string(Verdict v);

struct PropertyResult {
  Property property{};
  Verdict verdict = Verdict::kPass;
  std::vector<std::size_t> counterexample;  // indices into trace.events
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyResult> results;

  bool any_failed() const;
  const PropertyResult& at(Property p) const;
  void append(const PropertyReport& other);
};

/// Validity, No-duplication and No-duplicity.
PropertyReport check_safety(const Trace& trace, const Scenario& scenario);

/// Local-delivery and Global-delivery (with ell = c - d). Truncated traces
/// are inconclusive.
PropertyReport check_liveness(const Trace& trace, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Performance measurements

/// Communication steps from the mbrb_broadcast of (sender, sn) until
/// ell = c - d correct processes delivered it. nullopt if never reached or if
/// the slot was never broadcast by a correct process.
std::optional<std::uint64_t> measure_lambda(const Trace& trace,
                                            const Scenario& scenario,
                                            ProcessId sender, std::uint64_t sn);

/// Point-to-point copies sent by correct processes, counted before
/// suppression. Byzantine sends are excluded.
std::uint64_t measure_mu(const Trace& trace);
/// Same, restricted to bundles of one slot.
std::uint64_t measure_mu(const Trace& trace, const SlotKey& slot);

/// Correct processes that delivered the broadcast of (sender, sn) at most
/// `steps` steps after it was invoked.
int deliverers_within(const Trace& trace, ProcessId sender, std::uint64_t sn,
                      std::uint64_t steps);

/// Correct processes that delivered anything for the slot, grouped by value.
std::map<Bytes, int> deliverers_by_message(const Trace& trace,
                                           const SlotKey& slot);

/// At least ell2_min correct deliveries two steps after the broadcast of
/// (sender, sn). Vacuously true when ell2_min is clamped to 0.
bool check_ell2(const Trace& trace, const Scenario& scenario, ProcessId sender,
                std::uint64_t sn);
/// Uses the first initial broadcast of the scenario.
bool check_ell2(const Trace& trace, const Scenario& scenario);

/// Largest number of distinct valid signers any correct process heard of (its
/// own signature included) for a triplet of the slot, rebuilt from Receive
/// events.
int max_signers_seen(const Trace& trace, const SlotKey& slot,
                     const Verifier& verifier);

// ---------------------------------------------------------------------------
// Synthetic counterexamples

struct SyntheticCase {
  Scenario scenario;
  Trace trace;
};

/// A small hand-built trace that violates exactly the given property.
SyntheticCase bundled_counterexample(Property p);

}  // namespace mbrb
