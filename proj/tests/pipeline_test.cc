// Copyright 2026 The spikesep Authors.
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


#include "spikesep/pipeline.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_signals.h"

namespace spikesep {
namespace {

namespace fs = std::filesystem;

// Fresh directory per test, removed afterwards.
class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("spikesep_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path WriteInput(const AudioSignal& s, const std::string& name = "in.wav") {
    const auto path = dir_ / name;
    WriteWav(s, path);
    return path;
  }

  // Short runs: 8000 steps is the least that gets both layers spiking.
  PipelineConfig FastConfig() const {
    PipelineConfig c;
    c.net.steps_per_frame = 8000;
    c.out_dir = dir_ / "out";
    return c;
  }

  fs::path dir_;
};

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ConfigTest, ParsesKeysCommentsAndBlankLines) {
  const auto c = ParseConfig(
      "# comment\n"
      "\n"
      "map = csm\n"
      "window_ms=4\n"
      "  seed = 42  \n"
      "num_sources = 2\n"
      "dump_maps = true\n"
      "parallel = false\n"
      "steps_per_frame = 100\n"
      "dt = 0.01\n"
      "rho = 0\n");
  EXPECT_EQ(c.net.kind, MapKind::kCsm);
  EXPECT_EQ(c.frame.window_ms, 4);
  EXPECT_EQ(c.net.seed, 42u);
  ASSERT_TRUE(c.num_sources_hint.has_value());
  EXPECT_EQ(*c.num_sources_hint, 2);
  EXPECT_TRUE(c.dumps.maps);
  EXPECT_FALSE(c.dumps.spikes);
  EXPECT_EQ(c.policy, ExecPolicy::kSerial);
  EXPECT_EQ(c.net.steps_per_frame, 100);
  EXPECT_EQ(c.net.dt, 0.01);
  EXPECT_EQ(c.net.rho, 0.0);
}

TEST(ConfigTest, KeepsBaseForUnsetKeys) {
  PipelineConfig base;
  base.net.seed = 7;
  const auto c = ParseConfig("map = cam\n", base);
  EXPECT_EQ(c.net.seed, 7u);
}

TEST(ConfigTest, ErrorsNameTheKey) {
  try {
    ParseConfig("colour = blue\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos) << e.what();
  }
  try {
    ParseConfig("seed = twelve\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ParseConfig("map = spectrogram\n"), ConfigError);
  EXPECT_THROW(ParseConfig("dt = 0.1x\n"), ConfigError);
  EXPECT_THROW(ParseConfig("just words\n"), ConfigError);
}

TEST(ConfigTest, ValidateNamesTheField) {
  PipelineConfig c;
  c.frame.window_ms = 10;
  try {
    c.Validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("window_ms"), std::string::npos) << e.what();
  }
  c = PipelineConfig{};
  c.num_sources_hint = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = PipelineConfig{};
  c.net.dt = -1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST_F(PipelineTest, LoadConfigFileReportsPath) {
  EXPECT_THROW(LoadConfigFile(dir_ / "missing.cfg"), IoError);
  std::ofstream(dir_ / "bad.cfg") << "seed = 1\nnope = 2\n";
  try {
    LoadConfigFile(dir_ / "bad.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.cfg"), std::string::npos) << msg;
    EXPECT_NE(msg.find("nope"), std::string::npos) << msg;
  }
}

TEST_F(PipelineTest, SilenceGivesNoSources) {
  AudioSignal silence;
  silence.sample_rate = kWorkingRate;
  silence.samples.assign(4000, 0.0);
  const auto result = RunSeparation(WriteInput(silence), FastConfig());
  EXPECT_TRUE(result.sources.empty());
  EXPECT_EQ(result.num_frames, 15);
  const auto report = nlohmann::json::parse(ReadText(result.report));
  EXPECT_EQ(report["num_sources"], 0);
  EXPECT_EQ(report["note"], "no sources detected");
  EXPECT_EQ(report["num_frames"], 15);
}

TEST_F(PipelineTest, ReportDescribesEverySource) {
  const auto tone = testing::AmTone(1000.0, 100.0, 0.3, 800);
  auto config = FastConfig();
  config.num_sources_hint = 1;
  const auto result = RunSeparation(WriteInput(tone), config);
  ASSERT_EQ(result.sources.size(), 1u);
  EXPECT_TRUE(fs::exists(result.sources[0].wav));
  const auto out = ReadWav(result.sources[0].wav);
  EXPECT_EQ(out.sample_rate, kWorkingRate);
  EXPECT_EQ(out.size(), tone.size());
  const auto report = nlohmann::json::parse(ReadText(result.report));
  EXPECT_EQ(report["num_sources"], 1);
  EXPECT_EQ(report["sources"].size(), 1u);
  EXPECT_EQ(report["sources"][0]["active_cells"], result.sources[0].active_cells);
  EXPECT_EQ(report["parameters"]["steps_per_frame"], 8000);
  EXPECT_EQ(report["parameters"]["map"], "cam");
}

TEST_F(PipelineTest, ResampledInputComesOutAtWorkingRate) {
  const auto tone = testing::Sine(700.0, 0.3, 3200, 16000);
  auto config = FastConfig();
  config.net.steps_per_frame = 200;
  const auto result = RunSeparation(WriteInput(tone), config);
  const auto report = nlohmann::json::parse(ReadText(result.report));
  EXPECT_EQ(report["input_sample_rate"], 16000);
  EXPECT_EQ(report["num_samples"], 1600);
}

TEST_F(PipelineTest, DiagnosticsWithoutFlagsWritesNothing) {
  const auto input = WriteInput(testing::Sine(700.0, 0.3, 800));
  const auto result = RunDiagnostics(input, FastConfig());
  EXPECT_FALSE(result.warnings.empty());
  EXPECT_TRUE(result.dumps.empty());
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(PipelineTest, DumpMapsWritesImageAndTablePerFrame) {
  const auto input = WriteInput(testing::Sine(700.0, 0.3, 1024));
  auto config = FastConfig();
  config.dumps.maps = true;
  const auto result = RunDiagnostics(input, config);
  EXPECT_EQ(result.num_frames, 4);
  ASSERT_EQ(result.dumps.size(), 8u);
  for (const auto& p : result.dumps) EXPECT_TRUE(fs::exists(p)) << p;
  EXPECT_TRUE(fs::exists(config.out_dir / "cam_frame_0003.pgm"));
  const std::string csv = ReadText(config.out_dir / "cam_frame_0000.csv");
  EXPECT_EQ(csv.rfind("channel,bin,value\n", 0), 0u);
  // Header plus one row per cell.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + kNumChannels * kNumMapBins);
  const std::string pgm = ReadText(config.out_dir / "cam_frame_0000.pgm");
  EXPECT_EQ(pgm.rfind("P5\n", 0), 0u);
}

TEST_F(PipelineTest, DumpSpikesWritesARaster) {
  const auto input = WriteInput(testing::AmTone(1000.0, 100.0, 0.3, 600));
  auto config = FastConfig();
  config.dumps.spikes = true;
  const auto result = RunDiagnostics(input, config);
  ASSERT_EQ(result.num_frames, 2);
  const std::string raster = ReadText(config.out_dir / "spikes_frame_0000.csv");
  EXPECT_EQ(raster.rfind("layer,channel,bin,spike_time\n", 0), 0u);
  EXPECT_GT(std::count(raster.begin(), raster.end(), '\n'), 1);
  EXPECT_NE(raster.find("\n2,"), std::string::npos);
  EXPECT_NE(raster.find("\n1,"), std::string::npos);
  const std::string groups = ReadText(config.out_dir / "groups.csv");
  EXPECT_EQ(std::count(groups.begin(), groups.end(), '\n'), 1 + 2 * kNumChannels);
}

TEST_F(PipelineTest, MissingInputIsAnIoError) {
  EXPECT_THROW(RunSeparation(dir_ / "absent.wav", FastConfig()), IoError);
}

TEST_F(PipelineTest, SameSeedSameBytes) {
  const auto input = WriteInput(testing::AmTone(2500.0, 170.0, 0.3, 800));
  auto a = FastConfig();
  a.out_dir = dir_ / "a";
  auto b = a;
  b.out_dir = dir_ / "b";
  b.policy = ExecPolicy::kSerial;
  const auto ra = RunSeparation(input, a);
  const auto rb = RunSeparation(input, b);
  ASSERT_FALSE(ra.sources.empty());
  ASSERT_EQ(ra.sources.size(), rb.sources.size());
  for (std::size_t k = 0; k < ra.sources.size(); ++k) {
    EXPECT_EQ(ReadText(ra.sources[k].wav), ReadText(rb.sources[k].wav));
  }
}

#ifdef SPIKESEP_CLI_PATH
int RunCli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + SPIKESEP_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(PipelineTest, CliExitCodes) {
  const auto input = WriteInput(testing::Sine(700.0, 0.3, 800));
  const std::string out = " --out-dir \"" + (dir_ / "cli").string() + "\"";
  EXPECT_EQ(RunCli("\"" + input.string() + "\" --window 10" + out), 2);
  EXPECT_EQ(RunCli("\"" + input.string() + "\" --map bogus" + out), 2);
  EXPECT_EQ(RunCli("\"" + (dir_ / "absent.wav").string() + "\"" + out), 3);
  std::ofstream(dir_ / "junk.wav") << "not a wav file at all";
  EXPECT_EQ(RunCli("\"" + (dir_ / "junk.wav").string() + "\"" + out), 3);
  std::ofstream(dir_ / "bad.cfg") << "frobnicate = 1\n";
  EXPECT_EQ(RunCli("\"" + input.string() + "\" --config \"" +
                   (dir_ / "bad.cfg").string() + "\"" + out),
            2);
  std::ofstream(dir_ / "fast.cfg") << "steps_per_frame = 100\n";
  EXPECT_EQ(RunCli("\"" + input.string() + "\" --config \"" +
                   (dir_ / "fast.cfg").string() + "\"" + out),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "cli" / "report.json"));
  std::ofstream(dir_ / "diverge.cfg") << "steps_per_frame = 200\ndt = 0.5\n";
  EXPECT_EQ(RunCli("\"" + input.string() + "\" --config \"" +
                   (dir_ / "diverge.cfg").string() + "\"" + out),
            4);
}
#endif

}  // namespace
}  // namespace spikesep
