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

#include "mbrb/simnet.h"

#include <algorithm>
#include <deque>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mbrb {
namespace {

struct InFlight {
  std::uint64_t send_id = 0;
  ProcessId sender{};
  ProcessId receiver{};
  std::uint64_t ready = 0;  // lockstep: arrival step; async: earliest step
  bool priority = false;
};

class Engine {
 public:
  Engine(const Scenario& scenario, bool lockstep)
      : sc_(scenario),
        lockstep_(lockstep),
        correct_(scenario.correct()),
        adversary_rng_(Rng::derive(scenario.master_seed, "message-adversary")) {
    scenario.validate();
    const auto n = static_cast<std::uint32_t>(sc_.config.n);
    ring_ = keyring_for(sc_);
    for (std::uint32_t i = 0; i < n; ++i) {
      const ProcessId p = pid(i);
      if (auto it = sc_.byzantine.find(p); it != sc_.byzantine.end()) {
        byz_.emplace(p, ByzProcess(p, it->second, ring_.pairs[i],
                                   ring_.verifier, sc_.config.n));
      } else {
        states_.emplace(p, ProcessState(p, sc_.config, ring_.pairs[i],
                                        ring_.verifier));
      }
    }
    trace_.config = sc_.config;
    trace_.correct = correct_;
  }

  bool is_correct(ProcessId p) const { return correct_.contains(p); }
  std::vector<InFlight>& in_flight() { return in_flight_; }
  std::map<ProcessId, ByzProcess>& byzantine() { return byz_; }

  const Bundle& bundle_of(std::uint64_t send_id) const {
    return std::get<SendEvent>(trace_.events[trace_.send_index[send_id]]).bundle;
  }

  void invoke(const InitialBroadcast& ib, std::uint64_t step) {
    trace_.events.push_back(InvokeEvent{step, ib.sender, ib.m, ib.sn});
    Outputs out = mbrb_broadcast(states_.at(ib.sender), ib.m, ib.sn);
    emit(ib.sender, std::move(out), step);
    drain_local(ib.sender, step);
  }

  void receive_correct(ProcessId p, std::uint64_t send_id, std::uint64_t step) {
    local_.push_back(send_id);
    drain_local(p, step);
  }

  void byz_step(ProcessId p, std::span<const Bundle> inbox, std::uint64_t step) {
    for (RawSend& s : byz_.at(p).step(inbox, step)) {
      const std::uint64_t id = next_send_id_++;
      SendEvent ev{step, p, id, false,
                   static_cast<std::uint32_t>(s.receivers.size()),
                   std::vector<ProcessId>(s.receivers.begin(), s.receivers.end()),
                   std::move(s.bundle)};
      schedule_copies(ev);
      record_send(std::move(ev));
    }
  }

  void log_receive(ProcessId p, std::uint64_t send_id, std::uint64_t step) {
    trace_.events.push_back(ReceiveEvent{step, p, send_id});
  }

  Trace finish(bool truncated, std::uint64_t last_step) {
    trace_.truncated = truncated;
    trace_.last_step = last_step;
    trace_.final_states = std::move(states_);
    return std::move(trace_);
  }

 private:
  void drain_local(ProcessId p, std::uint64_t step) {
    while (!local_.empty()) {
      const std::uint64_t id = local_.front();
      local_.pop_front();
      log_receive(p, id, step);
      Outputs out = handle_bundle(states_.at(p), bundle_of(id));
      emit(p, std::move(out), step);
    }
  }

  void emit(ProcessId p, Outputs out, std::uint64_t step) {
    for (Delivery& d : out.delivered) {
      trace_.events.push_back(
          DeliverEvent{step, d.at_process, std::move(d.m), d.sn, d.sender});
    }
    for (Bundle& b : out.outbound) broadcast(p, std::move(b), step);
  }

  void broadcast(ProcessId sender, Bundle b, std::uint64_t step) {
    const ProcessSet victims = select_suppressed(
        sc_.drop, BroadcastEvent{sender, b, step}, correct_, sc_.config.d,
        adversary_rng_);
    const std::uint64_t id = next_send_id_++;
    SendEvent ev{step, sender, id, true,
                 static_cast<std::uint32_t>(sc_.config.n), {}, std::move(b)};
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(sc_.config.n); ++i) {
      if (!victims.contains(pid(i))) ev.receivers.push_back(pid(i));
    }
    schedule_copies(ev);
    record_send(std::move(ev));
    for (ProcessId v : victims) {
      trace_.events.push_back(SuppressEvent{step, sender, id, v});
    }
  }

  void schedule_copies(const SendEvent& ev) {
    const bool prio = sc_.schedule.priority_payload &&
                      *sc_.schedule.priority_payload == ev.bundle.m;
    for (ProcessId r : ev.receivers) {
      if (ev.from_correct && r == ev.sender) {
        local_.push_back(ev.send_id);
        continue;
      }
      std::uint64_t ready = lockstep_ ? ev.step + 1 : 0;
      for (const DelayRule& rule : sc_.delays) {
        if (rule.payload == ev.bundle.m && rule.receivers.contains(r)) {
          ready = std::max(ready, rule.until);
        }
      }
      in_flight_.push_back(InFlight{ev.send_id, ev.sender, r, ready, prio});
    }
  }

  void record_send(SendEvent ev) {
    trace_.send_index.push_back(trace_.events.size());
    trace_.events.push_back(std::move(ev));
  }

  const Scenario& sc_;
  bool lockstep_;
  ProcessSet correct_;
  Rng adversary_rng_;
  KeyRing ring_;
  std::map<ProcessId, ProcessState> states_;
  std::map<ProcessId, ByzProcess> byz_;
  Trace trace_;
  std::vector<InFlight> in_flight_;
  std::deque<std::uint64_t> local_;
  std::uint64_t next_send_id_ = 0;
};

std::vector<InitialBroadcast> by_step(std::vector<InitialBroadcast> v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.step < b.step; });
  return v;
}

nlohmann::ordered_json bundle_json(const Bundle& b) {
  nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
  std::vector<const Signature*> sorted;
  for (const auto& s : b.sigs) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) {
    return x->signer < y->signer;
  });
  for (const Signature* s : sorted) {
    sigs.push_back({index_of(s->signer), to_hex(s->bytes)});
  }
  nlohmann::ordered_json j;
  j["m"] = to_hex(b.m);
  j["sn"] = b.sn;
  j["j"] = index_of(b.sender);
  j["sigs"] = std::move(sigs);
  return j;
}

nlohmann::ordered_json ids_json(const auto& ids) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (ProcessId p : ids) a.push_back(index_of(p));
  return a;
}

}  // namespace

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::kLockstep ? "lockstep" : "async";
}

ScheduleMode schedule_mode_from_string(std::string_view name) {
  if (name == "lockstep") return ScheduleMode::kLockstep;
  if (name == "async" || name == "seeded_async") return ScheduleMode::kAsync;
  throw ConfigError("unknown schedule mode '" + std::string(name) + "'");
}

ProcessSet Scenario::correct() const {
  ProcessSet out;
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(config.n); ++i) {
    if (!byzantine.contains(pid(i))) out.insert(pid(i));
  }
  return out;
}

std::uint64_t Scenario::effective_horizon() const {
  if (horizon > 0) return horizon;
  const auto n = static_cast<std::uint64_t>(config.n);
  return schedule.mode == ScheduleMode::kLockstep ? 4 * n : 50 * n * n;
}

void Scenario::validate() const {
  config.validate();
  const auto n = static_cast<std::uint32_t>(config.n);
  auto in_range = [n](ProcessId p) { return index_of(p) < n; };
  for (const auto& [p, strat] : byzantine) {
    if (!in_range(p)) throw ConfigError("Byzantine process id out of range");
  }
  if (static_cast<int>(byzantine.size()) > config.t) {
    throw ConfigError("more Byzantine processes than t");
  }
  if (config.c != config.n - static_cast<int>(byzantine.size())) {
    throw ConfigError("c must equal the number of correct processes");
  }
  drop.validate(config.d);
  for (ProcessId v : drop.victims) {
    if (!in_range(v)) throw ConfigError("victim id out of range");
  }
  std::set<SlotKey> used;
  for (const auto& b : broadcasts) {
    if (!in_range(b.sender)) throw ConfigError("broadcast sender out of range");
    if (byzantine.contains(b.sender)) {
      throw ConfigError("initial broadcasts are for correct processes; "
                        "Byzantine behaviour comes from strategies");
    }
    if (!used.insert(SlotKey{b.sender, b.sn}).second) {
      throw ConfigError("sequence number reused by the same sender");
    }
  }
  for (const auto& rule : delays) {
    for (ProcessId r : rule.receivers) {
      if (!in_range(r)) throw ConfigError("delay receiver out of range");
    }
  }
}

KeyRing keyring_for(const Scenario& scenario) {
  return KeyRing::generate(
      make_scheme(scenario.scheme),
      scenario.key_seed.value_or(key_seed_from_master(scenario.master_seed)),
      static_cast<std::uint32_t>(scenario.config.n));
}

std::uint64_t step_of(const Event& e) {
  return std::visit([](const auto& ev) { return ev.step; }, e);
}

const SendEvent& Trace::send(std::uint64_t send_id) const {
  return std::get<SendEvent>(events.at(send_index.at(send_id)));
}

Trace run_lockstep(const Scenario& scenario) {
  Engine engine(scenario, /*lockstep=*/true);
  const auto invokes = by_step(scenario.broadcasts);
  const std::uint64_t horizon = scenario.effective_horizon();
  std::size_t next_invoke = 0;
  std::uint64_t step = 0;
  bool truncated = false;

  for (;; ++step) {
    while (next_invoke < invokes.size() && invokes[next_invoke].step <= step) {
      engine.invoke(invokes[next_invoke++], step);
    }

    auto& pool = engine.in_flight();
    auto split = std::stable_partition(
        pool.begin(), pool.end(),
        [step](const InFlight& f) { return f.ready > step; });
    std::vector<InFlight> arrivals(split, pool.end());
    pool.erase(split, pool.end());
    std::sort(arrivals.begin(), arrivals.end(),
              [](const InFlight& a, const InFlight& b) {
                return std::tie(a.receiver, a.sender, a.send_id) <
                       std::tie(b.receiver, b.sender, b.send_id);
              });

    std::map<ProcessId, std::vector<Bundle>> byz_inbox;
    for (const InFlight& f : arrivals) {
      if (engine.is_correct(f.receiver)) {
        engine.receive_correct(f.receiver, f.send_id, step);
      } else {
        engine.log_receive(f.receiver, f.send_id, step);
        byz_inbox[f.receiver].push_back(engine.bundle_of(f.send_id));
      }
    }
    for (auto& [p, byz] : engine.byzantine()) {
      engine.byz_step(p, byz_inbox[p], step);
    }

    const bool pending =
        !engine.in_flight().empty() || next_invoke < invokes.size();
    if (!pending) break;
    if (step >= horizon) {
      truncated = true;
      break;
    }
  }
  return engine.finish(truncated, step);
}

Trace run_async(const Scenario& scenario) {
  Engine engine(scenario, /*lockstep=*/false);
  Rng rng = Rng::derive(scenario.schedule.seed, "async-schedule");
  const auto invokes = by_step(scenario.broadcasts);
  const std::uint64_t horizon = scenario.effective_horizon();
  const bool filtered =
      !scenario.delays.empty() || scenario.schedule.priority_payload.has_value();
  std::size_t next_invoke = 0;
  std::uint64_t step = 0;
  bool truncated = false;

  while (next_invoke < invokes.size() && invokes[next_invoke].step == 0) {
    engine.invoke(invokes[next_invoke++], 0);
  }
  for (auto& [p, byz] : engine.byzantine()) engine.byz_step(p, {}, 0);

  std::vector<std::size_t> eligible, preferred;
  for (;;) {
    while (next_invoke < invokes.size() && invokes[next_invoke].step <= step) {
      engine.invoke(invokes[next_invoke++], step);
    }
    auto& pool = engine.in_flight();
    if (pool.empty()) {
      if (next_invoke < invokes.size()) {
        step = invokes[next_invoke].step;
        continue;
      }
      break;
    }
    if (step >= horizon) {
      truncated = true;
      break;
    }

    std::size_t pick;
    if (!filtered) {
      pick = rng.uniform_below(pool.size());
    } else {
      eligible.clear();
      preferred.clear();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].ready > step) continue;
        eligible.push_back(i);
        if (pool[i].priority) preferred.push_back(i);
      }
      // Held-back copies become eligible once nothing else can move.
      if (eligible.empty()) {
        for (std::size_t i = 0; i < pool.size(); ++i) eligible.push_back(i);
      }
      const auto& from = preferred.empty() ? eligible : preferred;
      pick = from[rng.uniform_below(from.size())];
    }
    const InFlight f = pool[pick];
    pool[pick] = pool.back();
    pool.pop_back();

    ++step;
    if (engine.is_correct(f.receiver)) {
      engine.receive_correct(f.receiver, f.send_id, step);
    } else {
      engine.log_receive(f.receiver, f.send_id, step);
      const Bundle b = engine.bundle_of(f.send_id);
      engine.byz_step(f.receiver, std::span<const Bundle>(&b, 1), step);
    }
  }
  return engine.finish(truncated, step);
}

Trace run(const Scenario& scenario) {
  return scenario.schedule.mode == ScheduleMode::kLockstep
             ? run_lockstep(scenario)
             : run_async(scenario);
}

void write_trace(std::ostream& out, const Trace& trace) {
  using nlohmann::ordered_json;
  ordered_json header;
  header["schema"] = kTraceSchema;
  header["n"] = trace.config.n;
  header["t"] = trace.config.t;
  header["d"] = trace.config.d;
  header["c"] = trace.config.c;
  header["correct"] = ids_json(trace.correct);
  header["truncated"] = trace.truncated;
  header["last_step"] = trace.last_step;
  out << header.dump() << '\n';

  for (const Event& e : trace.events) {
    ordered_json j;
    std::visit(
        [&](const auto& ev) {
          using T = std::decay_t<decltype(ev)>;
          if constexpr (std::is_same_v<T, InvokeEvent>) {
            j["ev"] = "invoke";
            j["step"] = ev.step;
            j["p"] = index_of(ev.process);
            j["m"] = to_hex(ev.m);
            j["sn"] = ev.sn;
          } else if constexpr (std::is_same_v<T, SendEvent>) {
            j["ev"] = "send";
            j["step"] = ev.step;
            j["from"] = index_of(ev.sender);
            j["id"] = ev.send_id;
            j["correct"] = ev.from_correct;
            j["intended"] = ev.intended;
            j["to"] = ids_json(ev.receivers);
            j["bundle"] = bundle_json(ev.bundle);
          } else if constexpr (std::is_same_v<T, SuppressEvent>) {
            j["ev"] = "suppress";
            j["step"] = ev.step;
            j["from"] = index_of(ev.sender);
            j["id"] = ev.send_id;
            j["victim"] = index_of(ev.victim);
          } else if constexpr (std::is_same_v<T, ReceiveEvent>) {
            j["ev"] = "receive";
            j["step"] = ev.step;
            j["p"] = index_of(ev.receiver);
            j["id"] = ev.send_id;
          } else {
            j["ev"] = "deliver";
            j["step"] = ev.step;
            j["p"] = index_of(ev.process);
            j["m"] = to_hex(ev.m);
            j["sn"] = ev.sn;
            j["j"] = index_of(ev.sender);
          }
        },
        e);
    out << j.dump() << '\n';
  }

  for (const auto& [p, state] : trace.final_states) {
    ordered_json j;
    j["ev"] = "final";
    j["p"] = index_of(p);
    ordered_json slots = ordered_json::array();
    for (const auto& [key, slot] : state.store) {
      ordered_json s;
      s["j"] = index_of(key.sender);
      s["sn"] = key.sn;
      s["signed"] = slot.signed_by_me ? ordered_json(to_hex(*slot.signed_by_me))
                                      : ordered_json(nullptr);
      s["delivered"] = slot.delivered ? ordered_json(to_hex(*slot.delivered))
                                      : ordered_json(nullptr);
      ordered_json counts = ordered_json::object();
      for (const auto& [m, sigs] : slot.sigs_by_message) {
        counts[to_hex(m)] = sigs.size();
      }
      s["saved"] = std::move(counts);
      slots.push_back(std::move(s));
    }
    j["slots"] = std::move(slots);
    out << j.dump() << '\n';
  }
}

std::string serialize_trace(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

}  // namespace mbrb
