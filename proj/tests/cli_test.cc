// Copyright 2026 The vfm Authors
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

#include "cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vfm::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = Main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::path(testing::TempDir()) / name).string();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CliTest, GenIsDeterministicAndWritesSidecar) {
  const std::string a = TempPath("gen_a.csv"), b = TempPath("gen_b.csv");
  for (const auto& path : {a, b}) {
    const Outcome o = Invoke({"gen", "--n", "50", "--d", "3", "--seed", "4",
                              "--out", path});
    ASSERT_EQ(o.code, kOk) << o.err;
  }
  EXPECT_EQ(Slurp(a), Slurp(b));
  EXPECT_EQ(Slurp(a).substr(0, 15), "f0,f1,f2,label\n");
  const auto meta = nlohmann::json::parse(Slurp(a + ".meta.json"));
  EXPECT_EQ(meta["true_weights"].size(), 3u);
}

TEST(CliTest, GenRejectsZeroSparsity) {
  EXPECT_EQ(Invoke({"gen", "--s", "0", "--out", TempPath("z.csv")}).code,
            kConfigError);
}

TEST(CliTest, RunPrintsTableAndMetadata) {
  const std::string meta = TempPath("run.meta.json");
  const Outcome o =
      Invoke({"run", "--n", "300", "--d", "4", "--replicates", "2",
              "--epsilon", "1,inf", "--methods", "fm,nonprivate", "--meta",
              meta});
  ASSERT_EQ(o.code, kOk) << o.err;
  std::istringstream lines(o.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "dataset,method,epsilon,K,metric,mean,std,seconds");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 3);
  const auto j = nlohmann::json::parse(Slurp(meta));
  EXPECT_EQ(j["rows"].size(), 3u);
}

TEST(CliTest, RunOnCsv) {
  const std::string csv = TempPath("run_in.csv");
  ASSERT_EQ(Invoke({"gen", "--n", "100", "--d", "3", "--out", csv}).code, kOk);
  const std::string out = TempPath("run_out.csv");
  const Outcome o = Invoke({"run", "--data", csv, "--replicates", "2",
                            "--methods", "nonprivate", "--out", out});
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_NE(Slurp(out).find("run_in,nonprivate,inf,2,mse"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(out + ".meta.json"));
}

TEST(CliTest, ConfigErrorsExitOne) {
  EXPECT_EQ(Invoke({"run", "--data", "/nonexistent.csv"}).code, kConfigError);
  EXPECT_EQ(Invoke({"run", "--bogus"}).code, kConfigError);
  EXPECT_EQ(Invoke({"run", "--epsilon", "-1"}).code, kConfigError);
  EXPECT_EQ(Invoke({"run", "--d", "3", "--K", "4"}).code, kConfigError);
  EXPECT_EQ(Invoke({"run", "--mode", "bottom-up"}).code, kConfigError);
}

TEST(CliTest, SolverFailureExitsThree) {
  const Outcome o = Invoke({"run", "--n", "40", "--d", "10", "--epsilon",
                            "0.1", "--rho", "0", "--replicates", "1",
                            "--methods", "fm"});
  EXPECT_EQ(o.code, kSolverFailure) << o.err;
}

TEST(CliTest, BottomUpRun) {
  const Outcome o = Invoke({"run", "--n", "200", "--d", "4", "--mode",
                            "bottom-up", "--party-eps", "1=1,2=1",
                            "--pair-eps", "1-2=1", "--replicates", "1",
                            "--methods", "fm"});
  EXPECT_EQ(o.code, kOk) << o.err;
}

TEST(CliTest, SweepCoversAxes) {
  const Outcome o = Invoke({"sweep", "--n", "200", "--d", "10", "--K-list",
                            "1,2", "--s-list", "0.5,1", "--replicates", "1",
                            "--methods", "nonprivate", "--meta",
                            TempPath("sweep.meta.json")});
  ASSERT_EQ(o.code, kOk) << o.err;
  EXPECT_NE(o.out.find("synthetic-s0.5"), std::string::npos);
}

TEST(CliTest, AuditPassesAndCatchesFaults) {
  EXPECT_EQ(Invoke({"audit", "--pairs", "50"}).code, kOk);
  const Outcome injected =
      Invoke({"audit", "--pairs", "50", "--inject-out-of-range"});
  EXPECT_EQ(injected.code, kProtocolFailure);
  EXPECT_NE(injected.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(Invoke({"audit", "--pairs", "20", "--fault-skip-noise", "5"}).code,
            kProtocolFailure);
  EXPECT_EQ(Invoke({"audit", "--d", "9"}).code, kConfigError);
}

}  // namespace
}  // namespace vfm::cli
