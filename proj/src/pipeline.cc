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

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "spikesep/dump.h"
#include "spikesep/filterbank.h"

namespace spikesep {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " +
                    std::string(key) + " (expected " + std::string(expected) + ")");
}

double ParseDouble(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value, "a number");
  }
  return v;
}

long long ParseInt(std::string_view key, std::string_view value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value, "an integer");
  }
  return v;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  BadValue(key, value, "true or false");
}

using Setter = std::function<void(PipelineConfig&, std::string_view, std::string_view)>;

Setter DoubleField(double NetParams::*field) {
  return [field](PipelineConfig& c, std::string_view k, std::string_view v) {
    c.net.*field = ParseDouble(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const auto* setters = new std::map<std::string, Setter, std::less<>>{
      {"map",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         if (v == "cam") {
           c.net.kind = MapKind::kCam;
         } else if (v == "csm") {
           c.net.kind = MapKind::kCsm;
         } else {
           BadValue(k, v, "cam or csm");
         }
       }},
      {"window_ms",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.frame.window_ms = static_cast<int>(ParseInt(k, v));
       }},
      {"seed",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         const long long s = ParseInt(k, v);
         if (s < 0) BadValue(k, v, "a non-negative integer");
         c.net.seed = static_cast<std::uint64_t>(s);
       }},
      {"num_sources",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.num_sources_hint = static_cast<int>(ParseInt(k, v));
       }},
      {"dump_maps",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.dumps.maps = ParseBool(k, v);
       }},
      {"dump_spikes",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.dumps.spikes = ParseBool(k, v);
       }},
      {"dump_masks",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.dumps.masks = ParseBool(k, v);
       }},
      {"out_dir",
       [](PipelineConfig& c, std::string_view, std::string_view v) {
         c.out_dir = std::string(v);
       }},
      {"parallel",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.policy = ParseBool(k, v) ? ExecPolicy::kParallel : ExecPolicy::kSerial;
       }},
      {"noise",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.net.noise = ParseBool(k, v);
       }},
      {"normalize_layer2",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         c.net.normalize_layer2 = ParseBool(k, v);
       }},
      {"steps_per_frame",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         const long long n = ParseInt(k, v);
         if (n <= 0 || n > 100000000) BadValue(k, v, "a positive step count");
         c.net.steps_per_frame = static_cast<int>(n);
       }},
      {"epsilon", DoubleField(&NetParams::epsilon)},
      {"gamma", DoubleField(&NetParams::gamma)},
      {"beta", DoubleField(&NetParams::beta)},
      {"rho", DoubleField(&NetParams::rho)},
      {"lambda", DoubleField(&NetParams::lambda)},
      {"controller_alpha", DoubleField(&NetParams::controller_alpha)},
      {"xi", DoubleField(&NetParams::xi)},
      {"eta", DoubleField(&NetParams::eta)},
      {"theta", DoubleField(&NetParams::theta)},
      {"zeta", DoubleField(&NetParams::zeta)},
      {"mu", DoubleField(&NetParams::mu)},
      {"layer_weight_alpha", DoubleField(&NetParams::layer_weight_alpha)},
      {"dt", DoubleField(&NetParams::dt)},
      {"averaging_window", DoubleField(&NetParams::averaging_window)},
  };
  return *setters;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

std::string FrameFileName(std::string_view prefix, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_frame_%04d.csv", frame);
  return std::string(prefix) + buf;
}

std::vector<MapFrame> BuildFrames(const AudioSignal& mixture,
                                  const PipelineConfig& config) {
  static const Filterbank bank;
  const ChannelSignals analyzed = bank.Analyze(mixture, config.policy);
  return BuildMaps(analyzed, config.net.kind, config.frame, config.policy);
}

std::vector<FrameResult> SimulateAll(const std::vector<MapFrame>& maps,
                                     const PipelineConfig& config, bool record_layer1) {
  std::vector<FrameResult> frames;
  frames.reserve(maps.size());
  const SimulationOptions options{config.policy, record_layer1};
  for (const MapFrame& frame : maps) {
    frames.push_back(SimulateFrame(frame, config.net, options));
  }
  return frames;
}

void WriteDumps(const Separation& s, const PipelineConfig& config,
                std::vector<std::filesystem::path>& written) {
  if (config.dumps.maps) {
    for (const MapFrame& frame : s.maps) {
      for (auto& p : WriteMapFrame(config.out_dir, frame)) written.push_back(p);
    }
  }
  if (config.dumps.spikes) {
    for (std::size_t f = 0; f < s.frames.size(); ++f) {
      const auto path = config.out_dir / FrameFileName("spikes", static_cast<int>(f));
      WriteSpikeRaster(path, s.frames[f].spikes);
      written.push_back(path);
    }
    const auto groups = config.out_dir / "groups.csv";
    WriteGroupings(groups, s.groupings);
    written.push_back(groups);
  }
  if (config.dumps.masks) {
    for (const SourceMask& mask : s.masks) {
      for (auto& p : WriteMask(config.out_dir, mask)) written.push_back(p);
    }
  }
}

nlohmann::ordered_json ParametersJson(const PipelineConfig& config) {
  const NetParams& n = config.net;
  nlohmann::ordered_json j;
  j["map"] = std::string(MapKindName(n.kind));
  j["window_ms"] = config.frame.window_ms;
  j["seed"] = n.seed;
  j["epsilon"] = n.epsilon;
  j["gamma"] = n.gamma;
  j["beta"] = n.beta;
  j["rho"] = n.rho;
  j["lambda"] = n.lambda;
  j["controller_alpha"] = n.controller_alpha;
  j["xi"] = n.xi;
  j["eta"] = n.eta;
  j["theta"] = n.theta;
  j["zeta"] = n.zeta;
  j["mu"] = n.mu;
  j["layer_weight_alpha"] = n.layer_weight_alpha;
  j["dt"] = n.dt;
  j["steps_per_frame"] = n.steps_per_frame;
  j["averaging_window"] = n.averaging_window;
  j["noise"] = n.noise;
  j["normalize_layer2"] = n.normalize_layer2;
  if (config.num_sources_hint) j["num_sources"] = *config.num_sources_hint;
  return j;
}

}  // namespace

void PipelineConfig::Validate() const {
  frame.Validate();
  net.Validate();
  if (num_sources_hint && *num_sources_hint < 1) {
    throw ConfigError("num_sources must be at least 1");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

void ApplyConfigValue(PipelineConfig& config, std::string_view key,
                      std::string_view value) {
  const auto& setters = Setters();
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
  it->second(config, key, value);
}

PipelineConfig ParseConfig(std::string_view text, PipelineConfig base) {
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_number) +
                        ": expected key = value");
    }
    ApplyConfigValue(base, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return base;
}

PipelineConfig LoadConfigFile(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfig(buffer.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Separation Separate(const AudioSignal& input, const PipelineConfig& config,
                    bool record_layer1) {
  config.Validate();
  static const Filterbank bank;
  Separation s;
  s.mixture = ResampleTo8k(input);
  const ChannelSignals analyzed = bank.Analyze(s.mixture, config.policy);
  s.maps = BuildMaps(analyzed, config.net.kind, config.frame, config.policy);
  s.frames = SimulateAll(s.maps, config, record_layer1);
  for (const FrameResult& r : s.frames) s.groupings.push_back(r.grouping);
  s.masks = GroupsToMasks(s.groupings);
  if (config.num_sources_hint) {
    s.masks = LimitSources(std::move(s.masks), *config.num_sources_hint);
  }
  const int frame_len = config.frame.window_samples();
  for (const SourceMask& mask : s.masks) {
    const AudioSignal raw =
        ApplyMaskAndSynthesize(analyzed, mask, frame_len, bank, config.policy);
    s.estimates.push_back(NormalizeEnergy(raw, s.mixture, frame_len));
  }
  return s;
}

RunResult RunSeparation(const std::filesystem::path& input,
                        const PipelineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.Validate();
  const AudioSignal audio = ReadWav(input);
  EnsureDirectory(config.out_dir);
  const Separation s = Separate(audio, config, config.dumps.spikes);

  RunResult result;
  result.num_frames = static_cast<int>(s.maps.size());
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < s.masks.size(); ++k) {
    SourceOutput out;
    out.source_id = s.masks[k].source_id;
    out.wav = config.out_dir / ("source_" + std::to_string(k) + ".wav");
    out.active_cells = s.masks[k].CountOn();
    out.clipped_samples = WriteWav(s.estimates[k], out.wav).clipped_samples;
    nlohmann::ordered_json channels_per_frame = nlohmann::ordered_json::array();
    for (int f = 0; f < s.masks[k].num_frames(); ++f) {
      int on = 0;
      for (int c = 0; c < kNumChannels; ++c) on += s.masks[k].on(c, f);
      channels_per_frame.push_back(on);
    }
    sources.push_back({{"source_id", out.source_id},
                       {"wav", out.wav.filename().string()},
                       {"active_cells", out.active_cells},
                       {"channels_per_frame", channels_per_frame},
                       {"clipped_samples", out.clipped_samples}});
    result.sources.push_back(std::move(out));
  }
  WriteDumps(s, config, result.dumps);

  nlohmann::ordered_json groups_per_frame = nlohmann::ordered_json::array();
  for (const PhaseGrouping& g : s.groupings) groups_per_frame.push_back(g.num_groups);

  result.runtime_seconds = Seconds(start);
  nlohmann::ordered_json report;
  report["input"] = input.filename().string();
  report["input_sample_rate"] = audio.sample_rate;
  report["num_samples"] = s.mixture.size();
  report["num_frames"] = result.num_frames;
  report["groups_per_frame"] = groups_per_frame;
  report["num_sources"] = result.sources.size();
  if (result.sources.empty()) report["note"] = "no sources detected";
  report["sources"] = sources;
  report["parameters"] = ParametersJson(config);
  report["runtime_seconds"] = result.runtime_seconds;

  result.report = config.out_dir / "report.json";
  std::ofstream out(result.report);
  if (!out) throw IoError("cannot write " + result.report.string());
  out << report.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + result.report.string());
  return result;
}

DiagnosticsResult RunDiagnostics(const std::filesystem::path& input,
                                 const PipelineConfig& config) {
  config.Validate();
  DiagnosticsResult result;
  const AudioSignal mixture = ResampleTo8k(ReadWav(input));
  if (!config.dumps.any()) {
    result.warnings.push_back(
        "no dump requested (use --dump-maps, --dump-spikes or --dump-masks); "
        "nothing written");
    return result;
  }
  EnsureDirectory(config.out_dir);
  Separation s;
  s.mixture = mixture;
  s.maps = BuildFrames(mixture, config);
  result.num_frames = static_cast<int>(s.maps.size());
  if (config.dumps.spikes || config.dumps.masks) {
    s.frames = SimulateAll(s.maps, config, config.dumps.spikes);
    for (const FrameResult& r : s.frames) s.groupings.push_back(r.grouping);
    if (config.dumps.masks) {
      s.masks = GroupsToMasks(s.groupings);
      if (config.num_sources_hint) {
        s.masks = LimitSources(std::move(s.masks), *config.num_sources_hint);
      }
    }
  }
  WriteDumps(s, config, result.dumps);
  return result;
}

}  // namespace spikesep
