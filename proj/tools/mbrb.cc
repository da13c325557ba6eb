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

// mbrb: run scenario files, parameter sweeps and the tightness boundary.
//
// Exit codes: 0 all applicable checks passed, 1 a property or bound was
// violated, 2 malformed input or (with --strict) an assumption violation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mbrb/experiments.h"
#include "mbrb/metrics.h"
#include "mbrb/scenario_io.h"

namespace {

using namespace mbrb;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kBadInput = 2;

struct Common {
  bool strict = false;
  bool allow_boundary = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::string out;
  std::string format = "table";
  unsigned threads = 0;
};

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + name + " in " + dir);
}

bool is_liveness(Property p) {
  return p == Property::kLocalDelivery || p == Property::kGlobalDelivery;
}

int cmd_run(const std::string& path, const Common& opt) {
  Scenario sc = load_scenario(path);
  if (opt.seed) {
    sc.master_seed = *opt.seed;
    sc.schedule.seed = *opt.seed;
  }
  if (opt.horizon) sc.horizon = *opt.horizon;

  const Config& cfg = sc.config;
  const bool outside = !cfg.assumption_ok();
  if (outside) {
    const std::string msg = "n = " + std::to_string(cfg.n) +
                            " is not above 3t + 2d = " +
                            std::to_string(3 * cfg.t + 2 * cfg.d);
    if (opt.strict) {
      std::cerr << "error: " << msg << '\n';
      return kBadInput;
    }
    if (!opt.allow_boundary) {
      std::cerr << "warning: " << msg << "; liveness is expected to fail\n";
    }
  }
  if (!cfg.quorum_reachable()) {
    if (opt.strict) {
      std::cerr << "error: quorum unreachable (c - d <= floor((n+t)/2))\n";
      return kBadInput;
    }
    std::cerr << "warning: quorum unreachable (c - d <= floor((n+t)/2))\n";
  }

  const Trace trace = run(sc);
  PropertyReport report = check_safety(trace, sc);
  report.append(check_liveness(trace, sc));

  std::ostringstream os;
  os << "scenario: n=" << cfg.n << " t=" << cfg.t << " d=" << cfg.d
     << " c=" << cfg.c << " schedule=" << to_string(sc.schedule.mode)
     << " master_seed=" << sc.master_seed << '\n';
  std::optional<BoundPrediction> bounds;
  try {
    bounds = predict_bounds(cfg.n, cfg.t, cfg.d, cfg.c);
    os << "predicted: quorum=" << bounds->quorum << " ell=" << bounds->ell
       << " lambda=" << to_string(bounds->lambda_class)
       << " ell2_min=" << bounds->ell2_min
       << (bounds->ell2_vacuous ? " (vacuous)" : "")
       << " mu_max=" << bounds->mu_max << '\n';
  } catch (const QuorumUnreachable&) {
    os << "predicted: quorum unreachable\n";
  }
  os << "trace: " << trace.events.size() << " events, last step "
     << trace.last_step << (trace.truncated ? ", truncated at horizon" : "")
     << '\n';

  bool failed = false;
  for (const auto& r : report.results) {
    const bool expected = outside && is_liveness(r.property);
    os << "  " << to_string(r.property) << ": " << to_string(r.verdict);
    if (expected) os << " (expected-fail: n <= 3t + 2d)";
    if (!r.detail.empty() && r.verdict != Verdict::kPass) os << " - " << r.detail;
    os << '\n';
    if (r.verdict == Verdict::kFail && !expected) failed = true;
  }

  const bool lockstep = sc.schedule.mode == ScheduleMode::kLockstep;
  for (const auto& b : sc.broadcasts) {
    const SlotKey slot{b.sender, b.sn};
    const auto by_value = deliverers_by_message(trace, slot);
    const auto it = by_value.find(b.m);
    const int delivered = it == by_value.end() ? 0 : it->second;
    const auto lambda = measure_lambda(trace, sc, b.sender, b.sn);
    const std::uint64_t mu = measure_mu(trace, slot);
    os << "broadcast p" << index_of(b.sender) << " sn " << b.sn << " \""
       << to_string(b.m) << "\": delivered by " << delivered << "/" << cfg.c
       << " correct";
    if (lockstep) {
      os << ", lambda=" << (lambda ? std::to_string(*lambda) : "never")
         << ", by step 2: " << deliverers_within(trace, b.sender, b.sn, 2);
    }
    os << ", mu=" << mu << '\n';
    if (!bounds || outside || trace.truncated) continue;
    if (static_cast<std::int64_t>(mu) > bounds->mu_max) {
      os << "  bound violated: mu\n";
      failed = true;
    }
    if (!lockstep) continue;
    const std::uint64_t cap = bounds->lambda_class == LambdaClass::kTwo     ? 2
                              : bounds->lambda_class == LambdaClass::kThree ? 3
                                                                            : 0;
    if (cap != 0 && (!lambda || *lambda > cap)) {
      os << "  bound violated: lambda\n";
      failed = true;
    }
  }
  if (sc.broadcasts.size() == 1) {
    os << "total mu=" << measure_mu(trace) << '\n';
  }

  std::cout << os.str();
  if (!opt.out.empty()) {
    write_file(opt.out, "trace.jsonl", serialize_trace(trace));
    write_file(opt.out, "report.txt", os.str());
  }
  return failed ? kViolation : kOk;
}

int cmd_sweep(const std::string& path, const Common& opt) {
  GridSpec grid;
  if (path.empty()) {
    grid.n = {4, 7, 10};
  } else {
    grid = load_grid(path);
  }
  if (opt.seed) {
    for (auto& s : grid.seeds) s += *opt.seed;
  }
  if (opt.horizon) grid.horizon = *opt.horizon;
  if (opt.format != "table" && opt.format != "rows") {
    throw ConfigError("--format must be table or rows");
  }

  const auto rows = sweep(grid, opt.threads);
  const std::string text =
      opt.format == "rows" ? format_rows(rows) : format_table(rows);
  std::cout << text;
  if (!opt.out.empty()) write_file(opt.out, "sweep.txt", text);

  bool failed = false;
  for (const auto& r : rows) {
    const bool inside = r.n > 3 * r.t + 2 * r.d;
    if (r.safety_failures > 0) failed = true;
    if (inside && (r.liveness_failures > 0 || r.bound_violations > 0)) failed = true;
    if (!inside && opt.strict) {
      std::cerr << "error: cell n=" << r.n << " t=" << r.t << " d=" << r.d
                << " is outside n > 3t + 2d\n";
      return kBadInput;
    }
  }
  return failed ? kViolation : kOk;
}

int cmd_boundary(int t, int d, const Common& opt) {
  const BoundaryReport rep =
      run_boundary(t, d, opt.horizon.value_or(0), opt.seed.value_or(0));
  const std::string text = format_boundary(rep);
  std::cout << text;
  if (!opt.out.empty()) {
    write_file(opt.out, "boundary.trace.jsonl", serialize_trace(rep.boundary.trace));
    write_file(opt.out, "control.trace.jsonl", serialize_trace(rep.control.trace));
    write_file(opt.out, "report.txt", text);
  }
  return rep.boundary_holds && rep.control_delivers ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-based Byzantine reliable broadcast under a message adversary"};
  app.require_subcommand(1);

  Common opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--strict", opt.strict, "Treat assumption violations as errors");
    sub->add_flag("--allow-boundary", opt.allow_boundary,
                  "Run n <= 3t + 2d without warning");
    sub->add_option("--seed", opt.seed, "Override the seed");
    sub->add_option("--horizon", opt.horizon, "Override the horizon");
    sub->add_option("--out", opt.out, "Directory for trace and report files");
    sub->add_option("--format", opt.format, "table or rows")
        ->check(CLI::IsMember({"table", "rows"}));
  };

  std::string scenario_path;
  auto* run_cmd = app.add_subcommand("run", "Execute one scenario file");
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required();
  add_common(run_cmd);

  std::string grid_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  sweep_cmd->add_option("grid", grid_path, "Grid JSON (default n in {4,7,10})");
  sweep_cmd->add_option("--threads", opt.threads, "Worker threads (0: all cores)");
  add_common(sweep_cmd);

  int bt = 0, bd = 0;
  auto* boundary_cmd =
      app.add_subcommand("boundary", "Partition attack at n = 3t + 2d and n + 1");
  boundary_cmd->add_option("--t", bt, "Byzantine processes")->required();
  boundary_cmd->add_option("--d", bd, "Message adversary power")->required();
  add_common(boundary_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(scenario_path, opt);
    if (*sweep_cmd) return cmd_sweep(grid_path, opt);
    return cmd_boundary(bt, bd, opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
}
