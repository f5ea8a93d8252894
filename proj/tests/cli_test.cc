// Copyright 2026 The SAFD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "safd/config.h"

namespace safd {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("safd_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured to files in the test directory.
  int Run(const std::string& args) {
    const std::string cmd = std::string("\"") + SAFD_CLI + "\" " + args + " > \"" +
                            (dir_ / "stdout.txt").string() + "\" 2> \"" +
                            (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string Out() const { return Slurp(dir_ / "stdout.txt"); }
  std::string Err() const { return Slurp(dir_ / "stderr.txt"); }
  std::string Dir(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

TEST_F(CliTest, SynthGenCountZeroWritesEmptyManifest) {
  ASSERT_EQ(Run("synth-gen --count 0 --out-dir " + Dir("d")), 0) << Err();
  ASSERT_TRUE(fs::exists(dir_ / "d" / "manifest.jsonl"));
  EXPECT_EQ(fs::file_size(dir_ / "d" / "manifest.jsonl"), 0u);
  EXPECT_TRUE(fs::is_empty(dir_ / "d" / "images"));
}

TEST_F(CliTest, SynthGenIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(Run("synth-gen --count 6 --seed 4 --out-dir " + Dir("a")), 0) << Err();
  ASSERT_EQ(Run("synth-gen --count 6 --seed 4 --out-dir " + Dir("b")), 0) << Err();
  ASSERT_EQ(Run("synth-gen --count 6 --seed 5 --out-dir " + Dir("c")), 0) << Err();
  EXPECT_EQ(Slurp(dir_ / "a" / "manifest.jsonl"), Slurp(dir_ / "b" / "manifest.jsonl"));
  EXPECT_NE(Slurp(dir_ / "a" / "manifest.jsonl"), Slurp(dir_ / "c" / "manifest.jsonl"));
  for (const auto& e : fs::directory_iterator(dir_ / "a" / "images")) {
    EXPECT_EQ(Slurp(e.path()), Slurp(dir_ / "b" / "images" / e.path().filename()));
  }
}

TEST_F(CliTest, PrintConfigRoundTrips) {
  ASSERT_EQ(Run("--print-config"), 0) << Err();
  EXPECT_EQ(ConfigToIni(ParseConfigIni(Out())), ConfigToIni(RunConfig{}));
}

TEST_F(CliTest, ConfigErrorsAreReportedWithKind) {
  std::ofstream(dir_ / "bad.ini") << "[synth]\ncount = -3\n";
  EXPECT_NE(Run("synth-gen --config " + Dir("bad.ini") + " --out-dir " + Dir("d")), 0);
  EXPECT_NE(Err().find("error[config]"), std::string::npos) << Err();
  EXPECT_NE(Run("synth-gen --config " + Dir("missing.ini")), 0);
  EXPECT_NE(Err().find("error[io]"), std::string::npos) << Err();
}

TEST_F(CliTest, MissingModelIsAnIoError) {
  ASSERT_EQ(Run("synth-gen --count 1 --out-dir " + Dir("d")), 0) << Err();
  EXPECT_NE(Run("propose --spn-model " + Dir("none.model") + " --manifest " +
                Dir("d/manifest.jsonl") + " --out-dir " + Dir("p")),
            0);
  EXPECT_NE(Err().find("error[io]"), std::string::npos) << Err();
}

TEST_F(CliTest, CostReportForLayerFile) {
  std::ofstream(dir_ / "conv1.layers") << "conv conv1 3 64 7 2 3\n";
  ASSERT_EQ(Run("cost-report --layers " + Dir("conv1.layers") + " --out-dir " + Dir("c")), 0)
      << Err();
  const std::string csv = Slurp(dir_ / "c" / "cost_report.csv");
  EXPECT_NE(csv.find("layer,conv1,112,112,118.013952"), std::string::npos) << csv;
}

TEST_F(CliTest, GradCheckPasses) {
  ASSERT_EQ(Run("grad-check"), 0) << Err();
  EXPECT_NE(Out().find("max_relative_error,"), std::string::npos);
}

}  // namespace
}  // namespace safd
