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

// Drives the mbrb binary end to end and checks exit codes and outputs.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result mbrb(const std::string& args) {
  const std::string cmd = std::string(MBRB_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, k);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) {
  return std::string(MBRB_SOURCE_DIR) + "/scenarios/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("mbrb_cli_test_" + tag);
  fs::remove_all(p);
  return p;
}

TEST(Cli, HonestScenarioPassesWithLambdaTwo) {
  const Result r = mbrb("run " + scenario("honest_n4.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("lambda=2"), std::string::npos) << r.out;
}

TEST(Cli, OutsideAssumptionWarnsAndRuns) {
  const Result r = mbrb("run " + scenario("outside_assumption.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("warning"), std::string::npos);
  EXPECT_NE(r.out.find("expected-fail"), std::string::npos);

  const Result quiet = mbrb("run --allow-boundary " + scenario("outside_assumption.json"));
  EXPECT_EQ(quiet.out.find("not above 3t + 2d"), std::string::npos);

  EXPECT_EQ(mbrb("run --strict " + scenario("outside_assumption.json")).code, 2);
}

TEST(Cli, MalformedInputExitsTwo) {
  const fs::path dir = temp_dir("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"schema\": \"mbrb-scenario/1\", \"n\": 4}";
  EXPECT_EQ(mbrb("run " + (dir / "bad.json").string()).code, 2);
  EXPECT_EQ(mbrb("run " + (dir / "missing.json").string()).code, 2);
  EXPECT_EQ(mbrb("bogus").code, 2);
  EXPECT_EQ(mbrb("boundary --t 0 --d 0").code, 2);
}

TEST(Cli, RunIsReproducible) {
  const fs::path a = temp_dir("a"), b = temp_dir("b");
  ASSERT_EQ(mbrb("run --out " + a.string() + " " + scenario("equivocator_async.json")).code, 0);
  ASSERT_EQ(mbrb("run --out " + b.string() + " " + scenario("equivocator_async.json")).code, 0);
  EXPECT_FALSE(slurp(a / "trace.jsonl").empty());
  EXPECT_EQ(slurp(a / "trace.jsonl"), slurp(b / "trace.jsonl"));
  EXPECT_EQ(slurp(a / "report.txt"), slurp(b / "report.txt"));

  const fs::path c = temp_dir("c");
  mbrb("run --seed 99 --out " + c.string() + " " + scenario("equivocator_async.json"));
  EXPECT_NE(slurp(a / "trace.jsonl"), slurp(c / "trace.jsonl"));
}

TEST(Cli, SweepFormats) {
  const Result empty = mbrb("sweep " + scenario("grid_empty.json"));
  EXPECT_EQ(empty.code, 0);
  EXPECT_EQ(std::count(empty.out.begin(), empty.out.end(), '\n'), 1);

  const Result un = mbrb("sweep --format rows " + scenario("grid_unreachable.json"));
  EXPECT_EQ(un.code, 0) << un.out;
  EXPECT_NE(un.out.find("quorum unreachable"), std::string::npos);
  EXPECT_NE(un.out.find('\t'), std::string::npos);

  const Result grid = mbrb("sweep " + scenario("grid_small.json"));
  EXPECT_EQ(grid.code, 0) << grid.out;
}

TEST(Cli, BoundaryReport) {
  const fs::path dir = temp_dir("boundary");
  const Result r = mbrb("boundary --t 1 --d 1 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("stuck below quorum: yes"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "boundary.trace.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "control.trace.jsonl"));
}

}  // namespace
