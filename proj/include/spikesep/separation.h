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

#ifndef SPIKESEP_SEPARATION_H_
#define SPIKESEP_SEPARATION_H_

#include <vector>

#include "spikesep/audio.h"
#include "spikesep/filterbank.h"
#include "spikesep/maps.h"
#include "spikesep/network.h"

namespace spikesep {

// Binary gain per (channel, frame) for one source.
struct SourceMask {
  int source_id = 0;
  Grid values;  // kNumChannels x frames, entries 0 or 1

  int num_frames() const { return values.cols; }
  bool on(int channel, int frame) const { return values.at(channel, frame) != 0.0; }
  int CountOn() const;
};

// Links phase groups of consecutive frames into sources. Each frame's
// groups are matched greedily, largest Jaccard overlap first, against the
// channel set each existing source had the last time it was seen; an
// unmatched group starts a new source. Silent channels belong to no mask.
std::vector<SourceMask> GroupsToMasks(const std::vector<PhaseGrouping>& groupings);

// Keeps the `max_sources` largest masks (by number of on cells). Cells of
// the dropped masks go to the kept mask owning the nearest channel in the
// same frame; if no kept mask is on in that frame they are dropped.
std::vector<SourceMask> LimitSources(std::vector<SourceMask> masks, int max_sources);

inline constexpr int kCrossfadeSamples = 16;  // 2 ms at 8 kHz

// Per-sample gain of channel `channel`: the frame values held over each
// frame (the last frame's value is held over any tail), with a
// raised-cosine ramp of `crossfade` samples centred on every frame
// boundary. Complementary masks give gains that sum to exactly one.
std::vector<double> ExpandMask(const SourceMask& mask, int channel,
                               std::size_t length, int frame_len,
                               int crossfade = kCrossfadeSamples);

ChannelSignals ApplyMask(const ChannelSignals& channels, const SourceMask& mask,
                         int frame_len, int crossfade = kCrossfadeSamples);

AudioSignal ApplyMaskAndSynthesize(const ChannelSignals& channels,
                                   const SourceMask& mask, int frame_len,
                                   const Filterbank& bank,
                                   ExecPolicy policy = ExecPolicy::kParallel);

// Scales every frame of `signal` (including a trailing partial frame) so its
// RMS matches the same frame of `reference`. Frames whose RMS is below 1e-8
// are left alone.
AudioSignal NormalizeEnergy(const AudioSignal& signal, const AudioSignal& reference,
                            int frame_len);

inline constexpr double kSnrCapDb = 100.0;

// 10 log10(|t|^2 / |t - e|^2) - 10 log10(|t|^2 / |t - m|^2), each term and
// the result capped at kSnrCapDb. Throws ConfigError for a zero-energy
// target or mismatched lengths.
double SnrImprovement(const AudioSignal& estimate, const AudioSignal& target,
                      const AudioSignal& mixture);

// 10 log10(|t|^2 / |t - e|^2), capped at kSnrCapDb.
double SnrDb(const AudioSignal& estimate, const AudioSignal& target);

}  // namespace spikesep

#endif  // SPIKESEP_SEPARATION_H_
