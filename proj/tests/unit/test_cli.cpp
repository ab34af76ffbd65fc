// Copyright 2026 The LSI Authors
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


#include "app/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "app/evaluate.hpp"

namespace lsi::app {
namespace {

namespace fs = std::filesystem;

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Cli r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "lsi_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const Json cfg = {{"data", {{"n_train", 512}, {"n_heldout", 256}, {"labels", true}}},
                      {"encoder", {{"hidden", {16}}}},
                      {"decoder", {{"hidden", {16}}}},
                      {"drift", {{"hidden", {16}}, {"time_embed_dim", 4}}},
                      {"steps", 40},
                      {"batch_size", 32},
                      {"bank_size", 64},
                      {"checkpoint_path", (dir_ / "m.ckpt").string()}};
    std::ofstream(dir_ / "cfg.json") << cfg.dump();
    const Cli r = run({"train", "--config", (dir_ / "cfg.json").string(), "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static fs::path dir_;
  static std::string p(const char* name) { return (dir_ / name).string(); }
};

fs::path CliTest::dir_;

TEST_F(CliTest, TrainWritesCheckpointAndManifest) {
  EXPECT_TRUE(fs::exists(dir_ / "m.ckpt"));
  const Json manifest = Json::parse(slurp(dir_ / "m.ckpt.manifest.json"));
  EXPECT_TRUE(manifest.contains("config"));
}

TEST_F(CliTest, ZeroSamplesGiveHeaderOnlyCsv) {
  const Cli r = run({"sample", "--ckpt", p("m.ckpt"), "--n", "0", "--out", p("empty.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "empty.csv"), "x0,x1,x2,x3,x4,x5,x6,x7\n");
}

TEST_F(CliTest, FixedSeedSamplesAreByteIdentical) {
  for (const char* name : {"a.csv", "b.csv"}) {
    const Cli r = run({"sample", "--ckpt", p("m.ckpt"), "--n", "50", "--steps", "20", "--seed", "3", "--gamma",
                       "0.5", "--label", "2", "--lambda", "1", "--out", p(name), "--plot", p("a.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const std::string a = slurp(dir_ / "a.csv");
  EXPECT_EQ(a, slurp(dir_ / "b.csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 51);
  const std::string svg = slurp(dir_ / "a.svg");
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.find("<svg") != std::string::npos, true);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST_F(CliTest, EvalAndInvert) {
  ASSERT_EQ(run({"data", "--config", p("cfg.json"), "--out", p("held.csv")}).code, 0);
  const Cli e = run({"eval", "--ckpt", p("m.ckpt"), "--data", p("held.csv"), "--steps", "20"});
  ASSERT_EQ(e.code, 0) << e.err;
  const Json rep = Json::parse(e.out);
  EXPECT_TRUE(rep.contains("energy_distance"));
  EXPECT_TRUE(rep.contains("psnr_db"));
  EXPECT_EQ(rep["mode_occupancy"].size(), 8u);
  const Cli i = run({"invert", "--ckpt", p("m.ckpt"), "--in", p("held.csv"), "--out", p("z0.csv"), "--steps", "50"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_TRUE(Json::parse(i.out).contains("relative_error"));
  EXPECT_TRUE(fs::exists(dir_ / "z0.csv"));
}

TEST_F(CliTest, IncompatibleScoreSource) {
  const Cli r = run({"sample", "--ckpt", p("m.ckpt"), "--n", "4", "--out", p("x.csv"), "--score-source",
                     "from_eps_head"});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(CliErrors, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"sample", "--n", "3"}).code, kExitUsage);
  const Cli v = run({"verify", "--suite", "everything"});
  EXPECT_EQ(v.code, kExitUsage);
  EXPECT_NE(v.err.find("everything"), std::string::npos);
}

TEST(CliErrors, MissingCheckpointIsIoError) {
  const Cli r = run({"sample", "--ckpt", "/nonexistent/x.ckpt", "--n", "3", "--out", "/tmp/never.csv"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("x.ckpt"), std::string::npos);
}

TEST(CliErrors, BadConfigNamesKey) {
  const fs::path cfg = fs::temp_directory_path() / "lsi_bad_cfg.json";
  std::ofstream(cfg) << R"({"loss": {"bta": 1}})";
  const Cli r = run({"train", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("loss.bta"), std::string::npos);
  std::ofstream(cfg) << R"({"steps": 0})";
  EXPECT_EQ(run({"train", "--config", cfg.string()}).code, kExitUsage);
  fs::remove(cfg);
}

TEST(CliVerify, SchedulesSuitePasses) {
  const Cli r = run({"verify", "--suite", "schedules"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const Json rep = Json::parse(r.out);
  EXPECT_EQ(rep["suite"], "schedules");
  EXPECT_TRUE(rep["passed"].get<bool>());
}

TEST(CliVerify, HelpExitsCleanly) { EXPECT_EQ(run({"--help"}).code, kExitOk); }

}  // namespace
}  // namespace lsi::app

TEST(Presets, InversionRefinesGridTowardsOne) {
  lsi::app::TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lsi::app::sampler_for(cfg, 300).step_grid_exponent, 1.0);
  const lsi::SamplerConfig inv = lsi::app::inversion_config(cfg, 500);
  EXPECT_DOUBLE_EQ(inv.step_grid_exponent, 2.0);
  EXPECT_EQ(inv.n_steps, 500);
  EXPECT_DOUBLE_EQ(inv.t_clip, cfg.loss.t_clip);
  EXPECT_DOUBLE_EQ(lsi::app::inversion_config(cfg, 500, 1.0).step_grid_exponent, 1.0);
}
