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


#ifndef SPIKESEP_DUMP_H_
#define SPIKESEP_DUMP_H_

#include <filesystem>
#include <string>
#include <vector>

#include "spikesep/maps.h"
#include "spikesep/network.h"
#include "spikesep/separation.h"

namespace spikesep {

// File stem of a map frame dump, e.g. "cam_frame_0007".
std::string MapFrameStem(const MapFrame& frame);

// Writes <stem>.pgm (8-bit graymap, one row per channel with the highest
// channel on top, one column per bin) and <stem>.csv (channel,bin,value)
// into `dir`. Returns the two paths.
std::vector<std::filesystem::path> WriteMapFrame(const std::filesystem::path& dir,
                                                 const MapFrame& frame);

// Spike raster of one frame as CSV with header "layer,channel,bin,spike_time".
// Second-layer rows have bin -1.
void WriteSpikeRaster(const std::filesystem::path& path, const SpikeRecord& spikes);

// CSV "frame,channel,group" for every frame and channel; silent channels
// carry group -1.
void WriteGroupings(const std::filesystem::path& path,
                    const std::vector<PhaseGrouping>& groupings);

// Writes mask_source_<id>.pgm (channels x frames) and mask_source_<id>.csv
// (channel,frame,value) into `dir`. Returns the two paths.
std::vector<std::filesystem::path> WriteMask(const std::filesystem::path& dir,
                                             const SourceMask& mask);

// 8-bit binary PGM; values are clamped to [0, 1] and scaled to 0..255.
// Row 0 of `grid` is written as the bottom image row.
void WritePgm(const std::filesystem::path& path, const Grid& grid);

}  // namespace spikesep

#endif  // SPIKESEP_DUMP_H_
