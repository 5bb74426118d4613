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

#ifndef SPIKESEP_MAPS_H_
#define SPIKESEP_MAPS_H_

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "spikesep/audio.h"
#include "spikesep/common.h"
#include "spikesep/filterbank.h"

namespace spikesep {

// Zero-padded DFT length; the lower half gives the spectral bins.
inline constexpr int kFftSize = 512;
inline constexpr int kSpectrumBins = kFftSize / 2;
// 1-based channel number from which CAM uses the AM envelope; lower channels
// pass their raw filter output.
inline constexpr int kFirstEnvelopeChannel = 30;
inline constexpr double kEnvelopeCutoffHz = 400.0;
inline constexpr double kLogFloor = 1e-6;

enum class MapKind { kCam, kCsm };

std::string_view MapKindName(MapKind kind);

struct FrameSpec {
  // 4 or 32.
  int window_ms = 32;

  int window_samples() const { return window_ms * kWorkingRate / 1000; }
  void Validate() const;
};

// Row-major grid over (channel, bin).
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
};

// One CAM or CSM frame: kNumChannels x kNumMapBins values in [0, 1].
struct MapFrame {
  MapKind kind = MapKind::kCam;
  int frame_index = 0;
  Grid values{kNumChannels, kNumMapBins};

  double p(int channel, int bin) const { return values.at(channel, bin); }
};

// Spectra of one analysis window for every channel. `spectrum` uses the
// Hamming window; `derivative_spectrum` uses its time derivative and is the
// auxiliary transform needed for frequency reassignment.
struct SpectralFrame {
  int frame_index = 0;
  int num_channels = 0;
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> derivative_spectrum;

  std::complex<double> at(int channel, int bin) const {
    return spectrum[static_cast<std::size_t>(channel) * kSpectrumBins + bin];
  }
};

// Symmetric Hamming window and its analytic derivative (per sample).
std::vector<double> HammingWindow(int length);
std::vector<double> HammingDerivative(int length);

// AM demodulation for 1-based `channel_number` >= kFirstEnvelopeChannel:
// half-wave rectification then a 4th-order Butterworth low-pass at 400 Hz.
// Lower channels are returned unchanged.
std::vector<double> Envelope(std::span<const double> channel,
                             int channel_number);

// Number of complete non-overlapping windows; the remainder is dropped.
int NumFrames(std::size_t signal_length, const FrameSpec& spec);

// Spectra of window `frame` for every channel.
SpectralFrame ComputeSpectralFrame(const std::vector<std::vector<double>>& channels,
                                   const FrameSpec& spec, int frame);

// All frames. Channels must have equal length; a signal shorter than one
// window yields no frames.
std::vector<SpectralFrame> FrameSpectra(
    const std::vector<std::vector<double>>& channels, const FrameSpec& spec);

// Frequency-only reassignment: the energy of each bin moves to the bin
// nearest its instantaneous-frequency estimate. Returns a num_channels x
// kSpectrumBins magnitude grid whose per-frame energy equals the input's.
Grid Reassign(const SpectralFrame& frame);

// Global range of log(kLogFloor + v) over a set of grids.
struct LogRange {
  double min = 0.0;
  double max = 0.0;
  void Include(const Grid& magnitudes);
};

// log(kLogFloor + v), then affine map of the utterance-wide range onto
// [0, 1]. A constant utterance maps to all zeros.
std::vector<Grid> LogAndNormalize(const std::vector<Grid>& magnitudes);
Grid LogAndNormalize(const Grid& magnitudes, const LogRange& range);

// Max-pools the bin axis of a kSpectrumBins-wide grid down to kNumMapBins.
Grid DownsampleBins(const Grid& grid);

// Index range [begin, end) of input bins pooled into output bin `k`.
std::pair<int, int> PoolingShare(int k, int in_bins, int out_bins);

// Full map construction from already-analyzed filterbank outputs.
std::vector<MapFrame> BuildMaps(const ChannelSignals& analyzed, MapKind kind,
                                const FrameSpec& spec,
                                ExecPolicy policy = ExecPolicy::kParallel);

std::vector<MapFrame> BuildCam(const AudioSignal& signal, const FrameSpec& spec,
                               ExecPolicy policy = ExecPolicy::kParallel);
std::vector<MapFrame> BuildCsm(const AudioSignal& signal, const FrameSpec& spec,
                               ExecPolicy policy = ExecPolicy::kParallel);

}  // namespace spikesep

#endif  // SPIKESEP_MAPS_H_
