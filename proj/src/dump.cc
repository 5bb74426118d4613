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


#include "spikesep/dump.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace spikesep {
namespace {

std::ofstream OpenForWrite(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void CheckWritten(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write failed: " + path.string());
}

// Shortest text that reads back to the same double.
std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string MapFrameStem(const MapFrame& frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_frame_%04d", frame.frame_index);
  return std::string(MapKindName(frame.kind)) + buf;
}

void WritePgm(const std::filesystem::path& path, const Grid& grid) {
  std::ofstream out = OpenForWrite(path, /*binary=*/true);
  out << "P5\n" << grid.cols << " " << grid.rows << "\n255\n";
  std::vector<unsigned char> line(static_cast<std::size_t>(grid.cols));
  for (int r = grid.rows - 1; r >= 0; --r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double v = std::clamp(grid.at(r, c), 0.0, 1.0);
      line[c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(line.data()),
              static_cast<std::streamsize>(line.size()));
  }
  CheckWritten(out, path);
}

std::vector<std::filesystem::path> WriteMapFrame(const std::filesystem::path& dir,
                                                 const MapFrame& frame) {
  const std::string stem = MapFrameStem(frame);
  const auto pgm = dir / (stem + ".pgm");
  const auto csv = dir / (stem + ".csv");
  WritePgm(pgm, frame.values);
  std::ofstream out = OpenForWrite(csv);
  out << "channel,bin,value\n";
  for (int c = 0; c < frame.values.rows; ++c) {
    for (int b = 0; b < frame.values.cols; ++b) {
      out << c << "," << b << "," << FormatDouble(frame.values.at(c, b)) << "\n";
    }
  }
  CheckWritten(out, csv);
  return {pgm, csv};
}

void WriteSpikeRaster(const std::filesystem::path& path, const SpikeRecord& spikes) {
  std::ofstream out = OpenForWrite(path);
  out << "layer,channel,bin,spike_time\n";
  for (std::size_t n = 0; n < spikes.layer1.size(); ++n) {
    const int channel = static_cast<int>(n) / kNumMapBins;
    const int bin = static_cast<int>(n) % kNumMapBins;
    for (double t : spikes.layer1[n]) {
      out << "1," << channel << "," << bin << "," << FormatDouble(t) << "\n";
    }
  }
  for (std::size_t c = 0; c < spikes.layer2.size(); ++c) {
    for (double t : spikes.layer2[c]) {
      out << "2," << c << ",-1," << FormatDouble(t) << "\n";
    }
  }
  CheckWritten(out, path);
}

void WriteGroupings(const std::filesystem::path& path,
                    const std::vector<PhaseGrouping>& groupings) {
  std::ofstream out = OpenForWrite(path);
  out << "frame,channel,group\n";
  for (std::size_t f = 0; f < groupings.size(); ++f) {
    const auto& labels = groupings[f].labels;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      out << f << "," << c << "," << labels[c] << "\n";
    }
  }
  CheckWritten(out, path);
}

std::vector<std::filesystem::path> WriteMask(const std::filesystem::path& dir,
                                             const SourceMask& mask) {
  const std::string stem = "mask_source_" + std::to_string(mask.source_id);
  const auto pgm = dir / (stem + ".pgm");
  const auto csv = dir / (stem + ".csv");
  WritePgm(pgm, mask.values);
  std::ofstream out = OpenForWrite(csv);
  out << "channel,frame,value\n";
  for (int c = 0; c < mask.values.rows; ++c) {
    for (int f = 0; f < mask.values.cols; ++f) {
      out << c << "," << f << "," << (mask.on(c, f) ? 1 : 0) << "\n";
    }
  }
  CheckWritten(out, csv);
  return {pgm, csv};
}

}  // namespace spikesep
