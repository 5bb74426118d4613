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


// Command-line front end.
//
//   spikesep mixture.wav --out-dir out            separate into out/source_*.wav
//   spikesep mixture.wav --diagnostics --dump-maps --out-dir maps
//
// Exit status: 0 success, 2 configuration error, 3 I/O or format error,
// 4 simulation divergence, 1 anything else.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "spikesep/pipeline.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;

int Run(int argc, char** argv) {
  CLI::App app{"Monophonic source separation with a two-layer oscillator network"};
  std::string input;
  std::string config_path;
  std::string map_kind;
  int window_ms = 0;
  long long seed = -1;
  int num_sources = 0;
  std::string out_dir;
  bool dump_maps = false;
  bool dump_spikes = false;
  bool dump_masks = false;
  bool diagnostics = false;
  bool serial = false;

  app.add_option("input", input, "Input WAV file")->required();
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--map", map_kind, "Map driving the network")
      ->check(CLI::IsMember({"cam", "csm"}));
  app.add_option("--window", window_ms, "Frame length in ms (4 or 32)");
  app.add_option("--seed", seed, "Noise seed");
  app.add_option("--num-sources", num_sources,
                 "Reduce the result to at most this many sources");
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_flag("--dump-maps", dump_maps, "Write every map frame as PGM and CSV");
  app.add_flag("--dump-spikes", dump_spikes,
               "Write spike rasters per frame and the phase groups");
  app.add_flag("--dump-masks", dump_masks, "Write every source mask as PGM and CSV");
  app.add_flag("--diagnostics", diagnostics,
               "Build maps and run the network, write dumps only");
  app.add_flag("--serial", serial, "Disable the OpenMP kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  spikesep::PipelineConfig config;
  if (!config_path.empty()) config = spikesep::LoadConfigFile(config_path, config);
  // Flags override the file.
  if (!map_kind.empty()) spikesep::ApplyConfigValue(config, "map", map_kind);
  if (window_ms != 0) config.frame.window_ms = window_ms;
  if (seed >= 0) config.net.seed = static_cast<std::uint64_t>(seed);
  if (app.count("--num-sources") > 0) config.num_sources_hint = num_sources;
  if (!out_dir.empty()) config.out_dir = out_dir;
  config.dumps.maps |= dump_maps;
  config.dumps.spikes |= dump_spikes;
  config.dumps.masks |= dump_masks;
  if (serial) config.policy = spikesep::ExecPolicy::kSerial;
  config.Validate();

  if (diagnostics) {
    const auto result = spikesep::RunDiagnostics(input, config);
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("%d frames, %zu files written to %s\n", result.num_frames,
                result.dumps.size(), config.out_dir.string().c_str());
    return 0;
  }
  const auto result = spikesep::RunSeparation(input, config);
  std::printf("%d frames, %zu sources, %.1f s\n", result.num_frames,
              result.sources.size(), result.runtime_seconds);
  for (const auto& s : result.sources) {
    std::printf("  %s (%d active cells%s)\n", s.wav.string().c_str(), s.active_cells,
                s.clipped_samples > 0 ? ", clipped" : "");
  }
  std::printf("  %s\n", result.report.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const spikesep::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const spikesep::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const spikesep::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitIo;
  } catch (const spikesep::DivergenceError& e) {
    std::fprintf(stderr, "simulation diverged: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
