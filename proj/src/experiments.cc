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

#include "mbrb/experiments.h"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace mbrb {
namespace {

const Bytes kCellPayload = to_bytes("m0");

ProcessSet pick(ProcessSet from, std::size_t k, Rng& rng) {
  std::vector<ProcessId> pool(from.begin(), from.end());
  rng.shuffle(pool);
  pool.resize(std::min(k, pool.size()));
  return ProcessSet(pool.begin(), pool.end());
}

ByzStrategy cell_strategy(ByzKind kind, ProcessId self, const CellSpec& cell,
                          const ProcessSet& coalition, Rng& rng) {
  ByzStrategy s;
  s.kind = kind;
  const auto n = static_cast<std::uint32_t>(cell.n);
  ProcessSet others = process_range(0, n);
  others.erase(self);
  for (ProcessId p : others) {
    (index_of(p) < n / 2 ? s.group_a : s.group_b).insert(p);
  }
  s.targets = pick(others, others.size() / 2, rng);
  s.coalition = coalition;
  s.leader = *coalition.begin();
  return s;
}

std::string byz_name(const std::optional<ByzKind>& k) {
  return k ? to_string(*k) : "none";
}

}  // namespace

Scenario make_cell_scenario(const CellSpec& cell) {
  Scenario sc;
  const int byz = cell.byzantine ? cell.t : 0;
  sc.config = Config{cell.n, cell.t, cell.d, cell.n - byz};
  sc.schedule.mode = cell.mode;
  sc.schedule.seed = cell.seed;
  sc.master_seed = cell.seed;
  sc.horizon = cell.horizon;
  sc.broadcasts.push_back(InitialBroadcast{pid(0), kCellPayload, 1, 0});

  Rng rng = Rng::derive(cell.seed, "grid-cell");
  const auto n = static_cast<std::uint32_t>(cell.n);
  const ProcessSet coalition =
      process_range(n - static_cast<std::uint32_t>(byz),
                    static_cast<std::uint32_t>(byz));
  for (ProcessId p : coalition) {
    sc.byzantine.emplace(p, cell_strategy(*cell.byzantine, p, cell, coalition, rng));
  }

  sc.drop.kind = cell.drop;
  if (cell.drop == DropKind::kStaticSet ||
      cell.drop == DropKind::kQuiescentAfterTau) {
    ProcessSet pool = sc.correct();
    pool.erase(pid(0));
    sc.drop.victims = pick(pool, static_cast<std::size_t>(std::max(cell.d, 0)), rng);
    sc.drop.tau = 2;
  }
  return sc;
}

std::vector<CellSpec> assumption_grid(int n_lo, int n_hi) {
  std::vector<CellSpec> out;
  for (int n = n_lo; n <= n_hi; ++n) {
    for (int t = 0; 3 * t < n; ++t) {
      for (int d = 0; 3 * t + 2 * d < n; ++d) {
        CellSpec c;
        c.n = n;
        c.t = t;
        c.d = d;
        out.push_back(c);
      }
    }
  }
  return out;
}

RunOutcome run_and_evaluate(const Scenario& scenario) {
  RunOutcome r{scenario, run(scenario)};
  const Config& cfg = scenario.config;
  try {
    r.bounds = predict_bounds(cfg.n, cfg.t, cfg.d, cfg.c);
  } catch (const QuorumUnreachable&) {
    r.bounds.reset();
  }
  r.report = check_safety(r.trace, scenario);
  if (cfg.assumption_ok()) r.report.append(check_liveness(r.trace, scenario));
  if (scenario.broadcasts.empty()) return r;

  const InitialBroadcast& b = scenario.broadcasts.front();
  const SlotKey slot{b.sender, b.sn};
  r.lambda = measure_lambda(r.trace, scenario, b.sender, b.sn);
  r.mu = measure_mu(r.trace, slot);
  const auto by_value = deliverers_by_message(r.trace, slot);
  if (auto it = by_value.find(b.m); it != by_value.end()) r.deliverers = it->second;
  r.deliverers_step2 = deliverers_within(r.trace, b.sender, b.sn, 2);

  if (!r.bounds || !cfg.assumption_ok() || r.trace.truncated) return r;
  const BoundPrediction& p = *r.bounds;
  auto violated = [&](std::string what) { r.bound_violations.push_back(std::move(what)); };
  if (r.deliverers < p.ell) {
    violated("ell: " + std::to_string(r.deliverers) + " < " + std::to_string(p.ell));
  }
  if (static_cast<std::int64_t>(r.mu) > p.mu_max) {
    violated("mu: " + std::to_string(r.mu) + " > " + std::to_string(p.mu_max));
  }
  if (scenario.schedule.mode != ScheduleMode::kLockstep) return r;
  const std::uint64_t cap = p.lambda_class == LambdaClass::kTwo     ? 2
                            : p.lambda_class == LambdaClass::kThree ? 3
                                                                    : 0;
  if (cap != 0 && (!r.lambda || *r.lambda > cap)) {
    violated("lambda: " + (r.lambda ? std::to_string(*r.lambda) : "never") +
             " > " + std::to_string(cap));
  }
  if (r.deliverers_step2 < p.ell2_min) {
    violated("ell2: " + std::to_string(r.deliverers_step2) + " < " +
             std::to_string(p.ell2_min));
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> sweep(const GridSpec& grid, unsigned threads) {
  std::vector<CellSpec> cells;
  for (int n : grid.n) {
    std::vector<std::pair<int, int>> td;
    const bool auto_t = grid.t.empty(), auto_d = grid.d.empty();
    std::vector<int> ts = grid.t, ds = grid.d;
    if (auto_t) for (int t = 0; 3 * t < n; ++t) ts.push_back(t);
    if (auto_d) for (int d = 0; 2 * d < n; ++d) ds.push_back(d);
    for (int t : ts) {
      for (int d : ds) {
        if (t < 0 || d < 0 || t >= n) continue;
        if ((auto_t || auto_d) && 3 * t + 2 * d >= n) continue;
        td.emplace_back(t, d);
      }
    }
    for (auto [t, d] : td) {
      for (const auto& byz : grid.byzantine) {
        for (DropKind drop : grid.drop) {
          CellSpec c;
          c.n = n;
          c.t = t;
          c.d = d;
          c.byzantine = byz;
          c.drop = drop;
          c.mode = grid.mode;
          c.horizon = grid.horizon;
          cells.push_back(c);
        }
      }
    }
  }

  const std::size_t per_cell = grid.seeds.size();
  const std::size_t total = cells.size() * per_cell;
  struct Summary {
    std::optional<BoundPrediction> bounds;
    std::optional<std::uint64_t> lambda;
    std::uint64_t mu = 0;
    int ell = 0, ell2 = 0, c = 0;
    bool safety_failed = false, liveness_failed = false;
    int violations = 0;
  };
  std::vector<Summary> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < total;) {
      CellSpec cell = cells[i / per_cell];
      cell.seed = grid.seeds[i % per_cell];
      const RunOutcome r = run_and_evaluate(make_cell_scenario(cell));
      Summary& s = results[i];
      s.bounds = r.bounds;
      s.lambda = r.lambda;
      s.mu = r.mu;
      s.ell = r.deliverers;
      s.ell2 = r.deliverers_step2;
      s.c = r.scenario.config.c;
      for (const auto& pr : r.report.results) {
        if (pr.verdict != Verdict::kFail) continue;
        const bool live = pr.property == Property::kLocalDelivery ||
                          pr.property == Property::kGlobalDelivery;
        (live ? s.liveness_failed : s.safety_failed) = true;
      }
      s.violations = static_cast<int>(r.bound_violations.size());
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  std::vector<std::jthread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();

  std::vector<SweepRow> rows;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const CellSpec& cell = cells[ci];
    SweepRow row;
    row.n = cell.n;
    row.t = cell.t;
    row.d = cell.d;
    row.byzantine = byz_name(cell.byzantine);
    row.drop = to_string(cell.drop);
    row.runs = static_cast<int>(per_cell);
    row.min_ell = std::numeric_limits<int>::max();
    row.min_ell2 = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < per_cell; ++k) {
      const Summary& s = results[ci * per_cell + k];
      row.c = s.c;
      row.bounds = s.bounds;
      row.quorum_unreachable = !s.bounds.has_value();
      row.min_ell = std::min(row.min_ell, s.ell);
      row.min_ell2 = std::min(row.min_ell2, s.ell2);
      row.max_mu = std::max(row.max_mu, s.mu);
      if (s.lambda) {
        row.max_lambda = std::max(row.max_lambda.value_or(0), *s.lambda);
      } else {
        row.lambda_missing = true;
      }
      row.safety_failures += s.safety_failed;
      row.liveness_failures += s.liveness_failed;
      row.bound_violations += s.violations;
    }
    if (per_cell == 0) row.min_ell = row.min_ell2 = 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<std::string> row_fields(const SweepRow& r) {
  auto lam = [&]() -> std::string {
    if (r.lambda_missing) return "never";
    return r.max_lambda ? std::to_string(*r.max_lambda) : "-";
  };
  std::vector<std::string> f = {
      std::to_string(r.n), std::to_string(r.t), std::to_string(r.d),
      std::to_string(r.c), r.byzantine,         r.drop,
      std::to_string(r.runs)};
  if (r.quorum_unreachable) {
    f.insert(f.end(), {"quorum unreachable", "-", "-", "-", "-", "-", "-", "-",
                       "-", std::to_string(r.safety_failures), "-", "-"});
    return f;
  }
  const BoundPrediction& b = *r.bounds;
  f.insert(f.end(),
           {std::to_string(b.quorum), std::to_string(b.ell),
            std::to_string(r.min_ell), to_string(b.lambda_class), lam(),
            std::to_string(b.ell2_min) + (b.ell2_vacuous ? "*" : ""),
            std::to_string(r.min_ell2), std::to_string(b.mu_max),
            std::to_string(r.max_mu), std::to_string(r.safety_failures),
            std::to_string(r.liveness_failures),
            std::to_string(r.bound_violations)});
  return f;
}

const std::vector<std::string> kColumns = {
    "n",      "t",       "d",     "c",        "byzantine", "drop",
    "runs",   "quorum",  "ell",   "ell_obs",  "lambda",    "lambda_obs",
    "ell2",   "ell2_obs", "mu",   "mu_obs",   "safety_fail", "live_fail",
    "bound_viol"};

}  // namespace

std::string format_rows(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    os << (i ? "\t" : "") << kColumns[i];
  }
  os << '\n';
  for (const auto& r : rows) {
    const auto f = row_fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "\t" : "") << f[i];
    os << '\n';
  }
  return os.str();
}

std::string format_table(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> cells{kColumns};
  for (const auto& r : rows) cells.push_back(row_fields(r));
  std::vector<std::size_t> width(kColumns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
      // A quorum-unreachable marker spills over the following columns.
      if (line[i].size() < 12 || i != 7) width[i] = std::max(width[i], line[i].size());
    }
  }
  std::ostringstream os;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << line[i];
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

BoundaryRun boundary_run(int t, int d, std::uint64_t horizon, std::uint64_t seed,
                         bool one_extra) {
  BoundaryRun br;
  br.plan = build_partition_attack(t, d, to_bytes("m"), to_bytes("m'"),
                                    horizon / 2, one_extra);
  Scenario& sc = br.scenario;
  const int n = br.plan.n;
  sc.config = Config{n, t, d, n - static_cast<int>(br.plan.byzantine.size())};
  sc.byzantine = br.plan.byzantine;
  sc.drop = br.plan.drop;
  sc.delays = br.plan.delays;
  sc.schedule.mode = ScheduleMode::kLockstep;
  sc.schedule.seed = seed;
  sc.master_seed = seed;
  sc.horizon = horizon;
  if (br.plan.correct_sender) {
    sc.broadcasts.push_back(
        InitialBroadcast{*br.plan.correct_sender, br.plan.schedule.m, 1, 0});
  }

  br.trace = run(sc);
  br.safety = check_safety(br.trace, sc);
  const SlotKey slot{br.plan.attacked_sender, br.plan.schedule.sn};
  br.deliveries = deliverers_by_message(br.trace, slot);
  for (const auto& [m, k] : br.deliveries) br.total_deliveries += k;
  br.max_signers = max_signers_seen(br.trace, slot, *keyring_for(sc).verifier);
  br.quorum = quorum_threshold(n, t);
  br.ell = sc.config.c - d;
  return br;
}

}  // namespace

BoundaryReport run_boundary(int t, int d, std::uint64_t horizon,
                            std::uint64_t seed) {
  if (t < 0 || d < 0 || t + d < 1) {
    throw ConfigError("boundary needs t >= 0, d >= 0 and t + d >= 1");
  }
  if (horizon == 0) horizon = 8 * static_cast<std::uint64_t>(3 * t + 2 * d + 1);
  BoundaryReport rep;
  rep.boundary = boundary_run(t, d, horizon, seed, false);
  rep.control = boundary_run(t, d, horizon, seed, true);

  const BoundaryRun& b = rep.boundary;
  rep.boundary_holds = b.total_deliveries == 0 && b.max_signers <= 2 * t + d &&
                       2 * t + d < b.quorum && !b.safety.any_failed();
  const BoundaryRun& c = rep.control;
  rep.control_delivers = c.deliveries.size() == 1 &&
                         c.deliveries.begin()->second >= c.ell &&
                         !c.safety.any_failed() && !c.trace.truncated;
  return rep;
}

std::string format_boundary(const BoundaryReport& rep) {
  std::ostringstream os;
  auto describe = [&](const char* label, const BoundaryRun& r) {
    const Config& cfg = r.scenario.config;
    os << label << ": n=" << cfg.n << " t=" << cfg.t << " d=" << cfg.d
       << " c=" << cfg.c << " quorum=" << r.quorum << " ell=" << r.ell << '\n';
    os << "  attacked slot: p" << index_of(r.plan.attacked_sender) << " sn "
       << r.plan.schedule.sn << ", delayed copies released at step "
       << r.plan.schedule.tau << '\n';
    os << "  most valid signers seen for one value: " << r.max_signers << '\n';
    os << "  correct deliveries: " << r.total_deliveries;
    for (const auto& [m, k] : r.deliveries) os << "  [" << to_string(m) << "]=" << k;
    os << '\n';
    os << "  safety: " << (r.safety.any_failed() ? "VIOLATED" : "intact")
       << (r.trace.truncated ? " (truncated)" : "") << ", last step "
       << r.trace.last_step << '\n';
  };
  describe("boundary", rep.boundary);
  describe("control", rep.control);
  os << "boundary run stuck below quorum: " << (rep.boundary_holds ? "yes" : "NO")
     << '\n';
  os << "control run delivers to ell processes: "
     << (rep.control_delivers ? "yes" : "NO") << '\n';
  return os.str();
}

}  // namespace mbrb
