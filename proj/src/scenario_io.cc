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

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace mbrb {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

void only_keys(const ordered_json& j, const std::string& where,
               std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(where, "unknown field '" + key + "'");
    }
  }
}

template <typename T>
T get(const ordered_json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(where, e.what());
  }
}

std::uint64_t get_u64(const ordered_json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

int get_int(const ordered_json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < -(1 << 20) || v > (1 << 20)) fail(where, "out of range");
  return static_cast<int>(v);
}

Bytes get_text(const ordered_json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return to_bytes(j.get<std::string>());
}

ProcessId get_id(const ordered_json& j, const std::string& where) {
  const std::uint64_t v = get_u64(j, where);
  if (v > 0xffffffffu) fail(where, "process id out of range");
  return pid(static_cast<std::uint32_t>(v));
}

ProcessSet get_ids(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of process ids");
  ProcessSet out;
  for (const auto& e : j) out.insert(get_id(e, where));
  return out;
}

const ordered_json& required(const ordered_json& j, const char* key) {
  if (!j.contains(key)) fail("scenario", std::string("missing field '") + key + "'");
  return j.at(key);
}

ordered_json parse_json(std::string_view text, const char* what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(what, e.what());
  }
}

Schedule parse_schedule(const ordered_json& j) {
  only_keys(j, "schedule", {"mode", "seed", "priority_payload"});
  Schedule s;
  if (j.contains("mode")) {
    s.mode = schedule_mode_from_string(get<std::string>(j["mode"], "schedule.mode"));
  }
  if (j.contains("seed")) s.seed = get_u64(j["seed"], "schedule.seed");
  if (j.contains("priority_payload")) {
    s.priority_payload = get_text(j["priority_payload"], "schedule.priority_payload");
  }
  return s;
}

DropPolicy parse_drop(const ordered_json& j) {
  only_keys(j, "drop_policy", {"kind", "victims", "by_payload", "tau", "suppress_self"});
  DropPolicy p;
  if (j.contains("kind")) p.kind = drop_kind_from_string(get<std::string>(j["kind"], "drop_policy.kind"));
  if (j.contains("victims")) p.victims = get_ids(j["victims"], "drop_policy.victims");
  if (j.contains("by_payload")) {
    const auto& bp = j["by_payload"];
    if (!bp.is_object()) fail("drop_policy.by_payload", "expected an object");
    for (const auto& [m, ids] : bp.items()) {
      p.by_payload[to_bytes(m)] = get_ids(ids, "drop_policy.by_payload");
    }
  }
  if (j.contains("tau")) p.tau = get_u64(j["tau"], "drop_policy.tau");
  if (j.contains("suppress_self")) p.suppress_self = get<bool>(j["suppress_self"], "drop_policy.suppress_self");
  return p;
}

std::pair<ProcessId, ByzStrategy> parse_byzantine(const ordered_json& j) {
  const std::string w = "byzantine";
  only_keys(j, w, {"id", "strategy", "m", "m_alt", "sn", "group_a", "group_b",
                   "coalition", "targets", "leader"});
  if (!j.contains("id") || !j.contains("strategy")) fail(w, "needs id and strategy");
  const ProcessId id = get_id(j["id"], w + ".id");
  ByzStrategy s;
  s.kind = byz_kind_from_string(get<std::string>(j["strategy"], w + ".strategy"));
  s.leader = id;
  if (j.contains("m")) s.m = get_text(j["m"], w + ".m");
  if (j.contains("m_alt")) s.m_alt = get_text(j["m_alt"], w + ".m_alt");
  if (j.contains("sn")) s.sn = get_u64(j["sn"], w + ".sn");
  if (j.contains("group_a")) s.group_a = get_ids(j["group_a"], w + ".group_a");
  if (j.contains("group_b")) s.group_b = get_ids(j["group_b"], w + ".group_b");
  if (j.contains("coalition")) s.coalition = get_ids(j["coalition"], w + ".coalition");
  if (j.contains("targets")) s.targets = get_ids(j["targets"], w + ".targets");
  if (j.contains("leader")) s.leader = get_id(j["leader"], w + ".leader");
  return {id, std::move(s)};
}

InitialBroadcast parse_broadcast(const ordered_json& j) {
  only_keys(j, "broadcasts", {"sender", "m", "sn", "step"});
  if (!j.contains("sender") || !j.contains("m")) fail("broadcasts", "needs sender and m");
  InitialBroadcast b;
  b.sender = get_id(j["sender"], "broadcasts.sender");
  b.m = get_text(j["m"], "broadcasts.m");
  if (j.contains("sn")) b.sn = get_u64(j["sn"], "broadcasts.sn");
  if (j.contains("step")) b.step = get_u64(j["step"], "broadcasts.step");
  return b;
}

DelayRule parse_delay(const ordered_json& j) {
  only_keys(j, "delays", {"payload", "receivers", "until"});
  if (!j.contains("payload") || !j.contains("receivers") || !j.contains("until")) {
    fail("delays", "needs payload, receivers and until");
  }
  return DelayRule{get_text(j["payload"], "delays.payload"),
                   get_ids(j["receivers"], "delays.receivers"),
                   get_u64(j["until"], "delays.until")};
}

const ordered_json& list_field(const ordered_json& j, const char* key) {
  if (!j[key].is_array()) fail(key, "expected a list");
  return j[key];
}

ordered_json ids_json(const ProcessSet& ids) {
  ordered_json a = ordered_json::array();
  for (ProcessId p : ids) a.push_back(index_of(p));
  return a;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const ordered_json j = parse_json(text, "scenario");
  only_keys(j, "scenario",
            {"schema", "n", "t", "d", "master_seed", "scheme", "key_seed",
             "schedule", "horizon", "dedup_emit", "drop_policy", "byzantine",
             "broadcasts", "delays"});
  if (get<std::string>(required(j, "schema"), "schema") != kScenarioSchema) {
    fail("schema", "expected '" + std::string(kScenarioSchema) + "'");
  }

  Scenario sc;
  sc.config.n = get_int(required(j, "n"), "n");
  sc.config.t = get_int(required(j, "t"), "t");
  sc.config.d = get_int(required(j, "d"), "d");
  sc.master_seed = get_u64(required(j, "master_seed"), "master_seed");
  if (j.contains("scheme")) sc.scheme = scheme_from_string(get<std::string>(j["scheme"], "scheme"));
  if (j.contains("key_seed")) {
    Bytes raw;
    try {
      raw = from_hex(get<std::string>(j["key_seed"], "key_seed"));
    } catch (const std::invalid_argument& e) {
      fail("key_seed", e.what());
    }
    if (raw.size() != KeySeed{}.size()) fail("key_seed", "expected 32 octets");
    KeySeed seed;
    std::copy(raw.begin(), raw.end(), seed.begin());
    sc.key_seed = seed;
  }
  if (j.contains("schedule")) sc.schedule = parse_schedule(j["schedule"]);
  if (j.contains("horizon")) sc.horizon = get_u64(j["horizon"], "horizon");
  if (j.contains("dedup_emit")) sc.config.dedup_emit = get<bool>(j["dedup_emit"], "dedup_emit");
  if (j.contains("drop_policy")) sc.drop = parse_drop(j["drop_policy"]);
  if (j.contains("byzantine")) {
    for (const auto& b : list_field(j, "byzantine")) {
      auto [id, strat] = parse_byzantine(b);
      if (!sc.byzantine.emplace(id, std::move(strat)).second) {
        fail("byzantine", "process listed twice");
      }
    }
  }
  if (j.contains("broadcasts")) {
    for (const auto& b : list_field(j, "broadcasts")) sc.broadcasts.push_back(parse_broadcast(b));
  }
  if (j.contains("delays")) {
    for (const auto& d : list_field(j, "delays")) sc.delays.push_back(parse_delay(d));
  }
  sc.config.c = sc.config.n - static_cast<int>(sc.byzantine.size());
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string dump_scenario(const Scenario& sc) {
  ordered_json j;
  j["schema"] = kScenarioSchema;
  j["n"] = sc.config.n;
  j["t"] = sc.config.t;
  j["d"] = sc.config.d;
  j["master_seed"] = sc.master_seed;
  j["scheme"] = to_string(sc.scheme);
  if (sc.key_seed) j["key_seed"] = to_hex(Bytes(sc.key_seed->begin(), sc.key_seed->end()));
  ordered_json sched;
  sched["mode"] = to_string(sc.schedule.mode);
  sched["seed"] = sc.schedule.seed;
  if (sc.schedule.priority_payload) {
    sched["priority_payload"] = to_string(*sc.schedule.priority_payload);
  }
  j["schedule"] = std::move(sched);
  j["horizon"] = sc.horizon;
  j["dedup_emit"] = sc.config.dedup_emit;

  ordered_json drop;
  drop["kind"] = to_string(sc.drop.kind);
  drop["victims"] = ids_json(sc.drop.victims);
  ordered_json bp = ordered_json::object();
  for (const auto& [m, ids] : sc.drop.by_payload) bp[to_string(m)] = ids_json(ids);
  drop["by_payload"] = std::move(bp);
  drop["tau"] = sc.drop.tau;
  drop["suppress_self"] = sc.drop.suppress_self;
  j["drop_policy"] = std::move(drop);

  ordered_json byz = ordered_json::array();
  for (const auto& [id, s] : sc.byzantine) {
    ordered_json b;
    b["id"] = index_of(id);
    b["strategy"] = to_string(s.kind);
    b["m"] = to_string(s.m);
    b["m_alt"] = to_string(s.m_alt);
    b["sn"] = s.sn;
    b["group_a"] = ids_json(s.group_a);
    b["group_b"] = ids_json(s.group_b);
    b["coalition"] = ids_json(s.coalition);
    b["targets"] = ids_json(s.targets);
    b["leader"] = index_of(s.leader);
    byz.push_back(std::move(b));
  }
  j["byzantine"] = std::move(byz);

  ordered_json casts = ordered_json::array();
  for (const auto& b : sc.broadcasts) {
    casts.push_back({{"sender", index_of(b.sender)},
                     {"m", to_string(b.m)},
                     {"sn", b.sn},
                     {"step", b.step}});
  }
  j["broadcasts"] = std::move(casts);

  ordered_json delays = ordered_json::array();
  for (const auto& d : sc.delays) {
    delays.push_back({{"payload", to_string(d.payload)},
                      {"receivers", ids_json(d.receivers)},
                      {"until", d.until}});
  }
  j["delays"] = std::move(delays);
  return j.dump(2) + "\n";
}

GridSpec parse_grid(std::string_view text) {
  const ordered_json j = parse_json(text, "grid");
  only_keys(j, "grid", {"schema", "n", "t", "d", "byzantine", "drop", "schedule",
                        "seeds", "horizon"});
  if (!j.contains("schema") || get<std::string>(j["schema"], "schema") != kGridSchema) {
    fail("schema", "expected '" + std::string(kGridSchema) + "'");
  }
  GridSpec g;
  auto ints = [&](const char* key) {
    std::vector<int> out;
    for (const auto& v : list_field(j, key)) out.push_back(get_int(v, key));
    return out;
  };
  if (j.contains("n")) g.n = ints("n");
  if (j.contains("t")) g.t = ints("t");
  if (j.contains("d")) g.d = ints("d");
  if (j.contains("byzantine")) {
    g.byzantine.clear();
    for (const auto& v : list_field(j, "byzantine")) {
      const auto name = get<std::string>(v, "byzantine");
      if (name == "none") {
        g.byzantine.emplace_back(std::nullopt);
      } else {
        g.byzantine.emplace_back(byz_kind_from_string(name));
      }
    }
  }
  if (j.contains("drop")) {
    g.drop.clear();
    for (const auto& v : list_field(j, "drop")) {
      const DropKind k = drop_kind_from_string(get<std::string>(v, "drop"));
      if (k == DropKind::kTargetedPartition) {
        fail("drop", "targeted_partition needs explicit payload sets; use a scenario file");
      }
      g.drop.push_back(k);
    }
  }
  if (j.contains("schedule")) {
    g.mode = schedule_mode_from_string(get<std::string>(j["schedule"], "schedule"));
  }
  if (j.contains("seeds")) {
    g.seeds.clear();
    if (j["seeds"].is_array()) {
      for (const auto& v : j["seeds"]) g.seeds.push_back(get_u64(v, "seeds"));
    } else {
      const std::uint64_t count = get_u64(j["seeds"], "seeds");
      for (std::uint64_t s = 0; s < count; ++s) g.seeds.push_back(s);
    }
  }
  if (j.contains("horizon")) g.horizon = get_u64(j["horizon"], "horizon");
  return g;
}

GridSpec load_grid(const std::filesystem::path& path) {
  return parse_grid(read_file(path));
}

}  // namespace mbrb
