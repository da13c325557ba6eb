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

#include "mbrb/metrics.h"

#include <algorithm>
#include <set>
#include <tuple>

namespace mbrb {
namespace {

std::string describe(const Bytes& m, std::uint64_t sn, ProcessId j) {
  return "(" + to_string(m) + ", " + std::to_string(sn) + ", p" +
         std::to_string(index_of(j)) + ")";
}

/// Step at which a correct process invoked mbrb_broadcast for the slot.
std::optional<std::pair<std::uint64_t, Bytes>> invocation(const Trace& trace,
                                                          ProcessId sender,
                                                          std::uint64_t sn) {
  for (const Event& e : trace.events) {
    if (const auto* inv = std::get_if<InvokeEvent>(&e);
        inv && inv->process == sender && inv->sn == sn &&
        trace.correct.contains(sender)) {
      return std::make_pair(inv->step, inv->m);
    }
  }
  return std::nullopt;
}

/// Delivery steps (first per process) of m for the slot at correct processes.
std::vector<std::uint64_t> delivery_steps(const Trace& trace, const Bytes& m,
                                          ProcessId sender, std::uint64_t sn) {
  std::map<ProcessId, std::uint64_t> first;
  for (const Event& e : trace.events) {
    const auto* d = std::get_if<DeliverEvent>(&e);
    if (d && d->sender == sender && d->sn == sn && d->m == m &&
        trace.correct.contains(d->process)) {
      first.try_emplace(d->process, d->step);
    }
  }
  std::vector<std::uint64_t> steps;
  for (const auto& [p, s] : first) steps.push_back(s);
  std::sort(steps.begin(), steps.end());
  return steps;
}

}  // namespace

std::string to_string(LambdaClass c) {
  switch (c) {
    case LambdaClass::kTwo:
      return "2";
    case LambdaClass::kThree:
      return "3";
    case LambdaClass::kMore:
      return ">3";
  }
  return "?";
}

BoundPrediction predict_bounds(int n, int t, int d, int c) {
  const std::int64_t q = (n + t) / 2;
  const std::int64_t slack = c - d - q;
  if (slack <= 0) {
    throw QuorumUnreachable("quorum unreachable: c - d = " +
                            std::to_string(c - d) +
                            " is not above floor((n+t)/2) = " + std::to_string(q));
  }
  BoundPrediction b;
  b.quorum = static_cast<int>(q + 1);
  b.ell = c - d;
  const std::int64_t cd = c - d;
  if (std::int64_t{d} * (q + 1) < c - q) {
    b.lambda_class = LambdaClass::kTwo;
  } else if (2 * cd * cd > std::int64_t{c} * (n + t)) {
    b.lambda_class = LambdaClass::kThree;
  } else {
    b.lambda_class = LambdaClass::kMore;
  }
  // Both operands are non-negative, so integer division is the floor.
  const std::int64_t raw = cd - (std::int64_t{d} * q) / slack;
  b.ell2_vacuous = raw <= 0;
  b.ell2_min = static_cast<int>(std::max<std::int64_t>(raw, 0));
  b.mu_max = 2 * std::int64_t{n} * n;
  return b;
}

// ---------------------------------------------------------------------------

std::string to_string(Property p) {
  switch (p) {
    case Property::kValidity:
      return "Validity";
    case Property::kNoDuplication:
      return "No-duplication";
    case Property::kNoDuplicity:
      return "No-duplicity";
    case Property::kLocalDelivery:
      return "Local-delivery";
    case Property::kGlobalDelivery:
      return "Global-delivery";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "FAIL";
    case Verdict::kInconclusive:
      return "inconclusive";
    case Verdict::kNotApplicable:
      return "n/a";
  }
  return "?";
}

bool PropertyReport::any_failed() const {
  return std::any_of(results.begin(), results.end(), [](const auto& r) {
    return r.verdict == Verdict::kFail;
  });
}

const PropertyResult& PropertyReport::at(Property p) const {
  for (const auto& r : results) {
    if (r.property == p) return r;
  }
  throw std::out_of_range("property not in report: " + to_string(p));
}

void PropertyReport::append(const PropertyReport& other) {
  results.insert(results.end(), other.results.begin(), other.results.end());
}

PropertyReport check_safety(const Trace& trace, const Scenario& /*scenario*/) {
  PropertyResult validity{Property::kValidity, Verdict::kPass, {}, {}};
  PropertyResult duplication{Property::kNoDuplication, Verdict::kPass, {}, {}};
  PropertyResult duplicity{Property::kNoDuplicity, Verdict::kPass, {}, {}};

  std::set<std::tuple<ProcessId, Bytes, std::uint64_t>> invoked;
  std::map<std::pair<ProcessId, SlotKey>, std::size_t> first_delivery;
  std::map<SlotKey, std::pair<Bytes, std::size_t>> agreed;

  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const Event& e = trace.events[i];
    if (const auto* inv = std::get_if<InvokeEvent>(&e)) {
      invoked.emplace(inv->process, inv->m, inv->sn);
      continue;
    }
    const auto* d = std::get_if<DeliverEvent>(&e);
    if (d == nullptr || !trace.correct.contains(d->process)) continue;
    const SlotKey slot{d->sender, d->sn};

    if (trace.correct.contains(d->sender) &&
        !invoked.contains({d->sender, d->m, d->sn})) {
      validity.verdict = Verdict::kFail;
      validity.counterexample.push_back(i);
      validity.detail = "p" + std::to_string(index_of(d->process)) +
                        " delivered " + describe(d->m, d->sn, d->sender) +
                        " which its correct sender never broadcast";
    }

    auto [it, fresh] = first_delivery.try_emplace({d->process, slot}, i);
    if (!fresh) {
      duplication.verdict = Verdict::kFail;
      duplication.counterexample.insert(duplication.counterexample.end(),
                                        {it->second, i});
      duplication.detail = "p" + std::to_string(index_of(d->process)) +
                           " delivered twice for slot (" +
                           std::to_string(d->sn) + ", p" +
                           std::to_string(index_of(d->sender)) + ")";
    }

    auto [ag, first] = agreed.try_emplace(slot, d->m, i);
    if (!first && ag->second.first != d->m) {
      duplicity.verdict = Verdict::kFail;
      duplicity.counterexample.insert(duplicity.counterexample.end(),
                                      {ag->second.second, i});
      duplicity.detail = "correct processes delivered both " +
                         describe(ag->second.first, d->sn, d->sender) +
                         " and " + describe(d->m, d->sn, d->sender);
    }
  }
  return PropertyReport{{validity, duplication, duplicity}};
}

PropertyReport check_liveness(const Trace& trace, const Scenario& scenario) {
  PropertyResult local{Property::kLocalDelivery, Verdict::kPass, {}, {}};
  PropertyResult global{Property::kGlobalDelivery, Verdict::kPass, {}, {}};
  if (trace.truncated) {
    local.verdict = global.verdict = Verdict::kInconclusive;
    local.detail = global.detail = "trace truncated at the horizon";
    return PropertyReport{{local, global}};
  }

  const int ell = scenario.config.c - scenario.config.d;
  std::map<std::tuple<ProcessId, std::uint64_t, Bytes>, std::vector<std::size_t>>
      delivered;  // (j, sn, m) -> deliver events at distinct correct processes
  std::set<std::tuple<ProcessId, ProcessId, std::uint64_t>> seen;
  std::vector<std::size_t> invokes;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const Event& e = trace.events[i];
    if (const auto* inv = std::get_if<InvokeEvent>(&e)) {
      if (trace.correct.contains(inv->process)) invokes.push_back(i);
    } else if (const auto* d = std::get_if<DeliverEvent>(&e)) {
      if (trace.correct.contains(d->process) &&
          seen.emplace(d->process, d->sender, d->sn).second) {
        delivered[{d->sender, d->sn, d->m}].push_back(i);
      }
    }
  }

  if (invokes.empty()) {
    local.verdict = Verdict::kNotApplicable;
    local.detail = "no correct process broadcast";
  }
  for (std::size_t i : invokes) {
    const auto& inv = std::get<InvokeEvent>(trace.events[i]);
    if (!delivered.contains({inv.process, inv.sn, inv.m})) {
      local.verdict = Verdict::kFail;
      local.counterexample.push_back(i);
      local.detail = "no correct process delivered " +
                     describe(inv.m, inv.sn, inv.process);
    }
  }

  if (delivered.empty()) {
    global.verdict = Verdict::kNotApplicable;
    global.detail = "no correct delivery";
  }
  for (const auto& [key, events] : delivered) {
    if (static_cast<int>(events.size()) < ell) {
      global.verdict = Verdict::kFail;
      global.counterexample.insert(global.counterexample.end(), events.begin(),
                                   events.end());
      const auto& [j, sn, m] = key;
      global.detail = std::to_string(events.size()) +
                      " correct processes delivered " + describe(m, sn, j) +
                      ", fewer than ell = " + std::to_string(ell);
    }
  }
  return PropertyReport{{local, global}};
}

// ---------------------------------------------------------------------------

std::optional<std::uint64_t> measure_lambda(const Trace& trace,
                                            const Scenario& scenario,
                                            ProcessId sender, std::uint64_t sn) {
  const auto inv = invocation(trace, sender, sn);
  if (!inv) return std::nullopt;
  const int ell = std::max(scenario.config.c - scenario.config.d, 1);
  const auto steps = delivery_steps(trace, inv->second, sender, sn);
  if (static_cast<int>(steps.size()) < ell) return std::nullopt;
  return steps[static_cast<std::size_t>(ell - 1)] - inv->first;
}

std::uint64_t measure_mu(const Trace& trace) {
  std::uint64_t total = 0;
  for (const Event& e : trace.events) {
    if (const auto* s = std::get_if<SendEvent>(&e); s && s->from_correct) {
      total += s->intended;
    }
  }
  return total;
}

std::uint64_t measure_mu(const Trace& trace, const SlotKey& slot) {
  std::uint64_t total = 0;
  for (const Event& e : trace.events) {
    if (const auto* s = std::get_if<SendEvent>(&e);
        s && s->from_correct && s->bundle.slot() == slot) {
      total += s->intended;
    }
  }
  return total;
}

int deliverers_within(const Trace& trace, ProcessId sender, std::uint64_t sn,
                      std::uint64_t steps) {
  const auto inv = invocation(trace, sender, sn);
  if (!inv) return 0;
  const auto all = delivery_steps(trace, inv->second, sender, sn);
  return static_cast<int>(std::count_if(all.begin(), all.end(), [&](auto s) {
    return s - inv->first <= steps;
  }));
}

std::map<Bytes, int> deliverers_by_message(const Trace& trace,
                                           const SlotKey& slot) {
  std::map<Bytes, std::set<ProcessId>> who;
  for (const Event& e : trace.events) {
    const auto* d = std::get_if<DeliverEvent>(&e);
    if (d && d->sender == slot.sender && d->sn == slot.sn &&
        trace.correct.contains(d->process)) {
      who[d->m].insert(d->process);
    }
  }
  std::map<Bytes, int> out;
  for (const auto& [m, ps] : who) out[m] = static_cast<int>(ps.size());
  return out;
}

bool check_ell2(const Trace& trace, const Scenario& scenario, ProcessId sender,
                std::uint64_t sn) {
  const auto& cfg = scenario.config;
  const BoundPrediction b = predict_bounds(cfg.n, cfg.t, cfg.d, cfg.c);
  return deliverers_within(trace, sender, sn, 2) >= b.ell2_min;
}

bool check_ell2(const Trace& trace, const Scenario& scenario) {
  if (scenario.broadcasts.empty()) {
    throw PreconditionError("check_ell2 needs a correct broadcast");
  }
  const auto& first = scenario.broadcasts.front();
  return check_ell2(trace, scenario, first.sender, first.sn);
}

int max_signers_seen(const Trace& trace, const SlotKey& slot,
                     const Verifier& verifier) {
  // Valid signers per send, computed once and shared by all its receivers.
  std::map<std::uint64_t, std::set<ProcessId>> valid_by_send;
  auto valid_signers = [&](const SendEvent& s) -> const std::set<ProcessId>& {
    auto [it, fresh] = valid_by_send.try_emplace(s.send_id);
    if (fresh) {
      const auto enc = encode_triplet(s.bundle.m, s.bundle.sn, s.bundle.sender);
      for (const auto& sig : s.bundle.sigs) {
        if (verifier.verify(enc, sig)) it->second.insert(sig.signer);
      }
    }
    return it->second;
  };

  std::map<std::pair<ProcessId, Bytes>, std::set<ProcessId>> heard;
  for (const Event& e : trace.events) {
    const SendEvent* s = nullptr;
    ProcessId who{};
    if (const auto* r = std::get_if<ReceiveEvent>(&e)) {
      s = &trace.send(r->send_id);
      who = r->receiver;
    } else if (const auto* own = std::get_if<SendEvent>(&e); own && own->from_correct) {
      s = own;
      who = own->sender;
    }
    if (s == nullptr || !trace.correct.contains(who) || s->bundle.slot() != slot) {
      continue;
    }
    const auto& signers = valid_signers(*s);
    heard[{who, s->bundle.m}].insert(signers.begin(), signers.end());
  }
  int best = 0;
  for (const auto& [key, signers] : heard) {
    best = std::max(best, static_cast<int>(signers.size()));
  }
  return best;
}

// ---------------------------------------------------------------------------

SyntheticCase bundled_counterexample(Property p) {
  SyntheticCase sc;
  Scenario& s = sc.scenario;
  s.config = Config{4, 1, 0, 4};
  s.schedule.mode = ScheduleMode::kLockstep;
  Trace& tr = sc.trace;
  tr.config = s.config;

  const Bytes a = to_bytes("a");
  auto invoke = [&](std::uint32_t p, const Bytes& m) {
    tr.events.push_back(InvokeEvent{0, pid(p), m, 1});
    s.broadcasts.push_back(InitialBroadcast{pid(p), m, 1, 0});
  };
  auto deliver = [&](std::uint64_t step, std::uint32_t p, const Bytes& m,
                     std::uint32_t j) {
    tr.events.push_back(DeliverEvent{step, pid(p), m, 1, pid(j)});
  };

  switch (p) {
    case Property::kValidity:
      // Everybody delivers something p0 never broadcast.
      for (std::uint32_t q = 0; q < 4; ++q) deliver(2, q, to_bytes("forged"), 0);
      break;
    case Property::kNoDuplication:
      invoke(0, a);
      for (std::uint32_t q = 0; q < 4; ++q) deliver(2, q, a, 0);
      deliver(3, 1, a, 0);
      break;
    case Property::kNoDuplicity:
      // p3 is Byzantine; two correct processes disagree on its slot. With
      // d = 2 a single deliverer per value meets ell = c - d.
      s.config.c = 3;
      s.config.d = 2;
      s.byzantine.emplace(pid(3), ByzStrategy{ByzKind::kEquivocate});
      tr.config = s.config;
      deliver(2, 0, to_bytes("x"), 3);
      deliver(2, 1, to_bytes("y"), 3);
      break;
    case Property::kLocalDelivery:
      invoke(0, a);
      break;
    case Property::kGlobalDelivery:
      invoke(0, a);
      deliver(2, 0, a, 0);
      break;
  }
  tr.correct = s.correct();
  tr.last_step = tr.events.empty() ? 0 : step_of(tr.events.back());
  return sc;
}

}  // namespace mbrb
