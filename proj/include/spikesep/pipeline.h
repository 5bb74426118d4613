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


#ifndef SPIKESEP_PIPELINE_H_
#define SPIKESEP_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikesep/audio.h"
#include "spikesep/maps.h"
#include "spikesep/network.h"
#include "spikesep/oscillator.h"
#include "spikesep/separation.h"

namespace spikesep {

struct DumpFlags {
  bool maps = false;
  bool spikes = false;
  bool masks = false;

  bool any() const { return maps || spikes || masks; }
};

struct PipelineConfig {
  FrameSpec frame;
  // Network constants, dt, steps, seed and the map kind (net.kind).
  NetParams net;
  // When set, the masks are reduced to at most this many sources.
  std::optional<int> num_sources_hint;
  DumpFlags dumps;
  std::filesystem::path out_dir = "spikesep_out";
  ExecPolicy policy = ExecPolicy::kParallel;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// Sets one field from its textual form. Keys are the names accepted in
// config files (see README); throws ConfigError naming the key on an unknown
// key or a malformed value.
void ApplyConfigValue(PipelineConfig& config, std::string_view key,
                      std::string_view value);

// Parses "key = value" lines onto `base`. Blank lines and lines starting with
// '#' are ignored.
PipelineConfig ParseConfig(std::string_view text, PipelineConfig base = {});
PipelineConfig LoadConfigFile(const std::filesystem::path& path,
                              PipelineConfig base = {});

// Everything the separation produces, before anything is written.
struct Separation {
  AudioSignal mixture;  // at the working rate
  std::vector<MapFrame> maps;
  std::vector<FrameResult> frames;
  std::vector<PhaseGrouping> groupings;
  std::vector<SourceMask> masks;
  std::vector<AudioSignal> estimates;  // one per mask, same order
};

// In-memory pipeline: resample, analyze, build maps, simulate every frame,
// link groups into masks and resynthesize. `record_layer1` keeps first-layer
// spikes in `frames` (memory heavy).
Separation Separate(const AudioSignal& input, const PipelineConfig& config,
                    bool record_layer1 = false);

struct SourceOutput {
  int source_id = 0;
  std::filesystem::path wav;
  int active_cells = 0;
  std::size_t clipped_samples = 0;
};

struct RunResult {
  int num_frames = 0;
  std::vector<SourceOutput> sources;
  std::filesystem::path report;
  std::vector<std::filesystem::path> dumps;
  double runtime_seconds = 0.0;
};

// Reads `input`, separates it and writes source_<k>.wav per source,
// report.json and the requested dumps into config.out_dir.
RunResult RunSeparation(const std::filesystem::path& input,
                        const PipelineConfig& config);

struct DiagnosticsResult {
  int num_frames = 0;
  std::vector<std::filesystem::path> dumps;
  std::vector<std::string> warnings;
};

// Maps and network only, no resynthesis; writes just the requested dumps.
// Without any dump flag nothing is written and a warning is returned.
DiagnosticsResult RunDiagnostics(const std::filesystem::path& input,
                                 const PipelineConfig& config);

}  // namespace spikesep

#endif  // SPIKESEP_PIPELINE_H_
