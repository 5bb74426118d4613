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

#include "spikesep/maps.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "spikesep/fft.h"

namespace spikesep {
namespace {

const RealFft& SharedFft() {
  static const RealFft fft(kFftSize);
  return fft;
}

// RBJ low-pass biquad; two of them with the Butterworth Q pair make a
// 4th-order Butterworth.
struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  static Biquad LowPass(double fc, double fs, double q) {
    const double w0 = 2.0 * kPi * fc / fs;
    const double c = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    return Biquad{(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
                  -2.0 * c / a0, (1.0 - alpha) / a0};
  }

  double Step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

}  // namespace

std::string_view MapKindName(MapKind kind) {
  return kind == MapKind::kCam ? "cam" : "csm";
}

void FrameSpec::Validate() const {
  if (window_ms != 4 && window_ms != 32) {
    throw ConfigError("window_ms must be 4 or 32, got " +
                      std::to_string(window_ms));
  }
}

std::vector<double> HammingWindow(int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (length - 1));
  }
  return w;
}

std::vector<double> HammingDerivative(int length) {
  std::vector<double> w(length);
  const double k = 2.0 * kPi / (length - 1);
  for (int n = 0; n < length; ++n) w[n] = 0.46 * k * std::sin(k * n);
  return w;
}

std::vector<double> Envelope(std::span<const double> channel,
                             int channel_number) {
  if (channel_number < 1 || channel_number > kNumChannels) {
    throw ConfigError("channel number " + std::to_string(channel_number) +
                      " outside [1, " + std::to_string(kNumChannels) + "]");
  }
  std::vector<double> out(channel.begin(), channel.end());
  if (channel_number < kFirstEnvelopeChannel) return out;

  Biquad s1 = Biquad::LowPass(kEnvelopeCutoffHz, kWorkingRate, 0.54119610);
  Biquad s2 = Biquad::LowPass(kEnvelopeCutoffHz, kWorkingRate, 1.30656296);
  for (double& v : out) v = s2.Step(s1.Step(std::max(v, 0.0)));
  return out;
}

int NumFrames(std::size_t signal_length, const FrameSpec& spec) {
  return static_cast<int>(signal_length / spec.window_samples());
}

SpectralFrame ComputeSpectralFrame(const std::vector<std::vector<double>>& channels,
                                   const FrameSpec& spec, int frame) {
  const int w = spec.window_samples();
  static thread_local std::vector<double> window, dwindow;
  if (static_cast<int>(window.size()) != w) {
    window = HammingWindow(w);
    dwindow = HammingDerivative(w);
  }
  const int nch = static_cast<int>(channels.size());
  SpectralFrame out;
  out.frame_index = frame;
  out.num_channels = nch;
  out.spectrum.resize(static_cast<std::size_t>(nch) * kSpectrumBins);
  out.derivative_spectrum.resize(out.spectrum.size());

  std::vector<double> buf(kFftSize, 0.0);
  std::vector<std::complex<double>> spec_buf(kFftSize / 2 + 1);
  const std::size_t start = static_cast<std::size_t>(frame) * w;
  for (int c = 0; c < nch; ++c) {
    const double* seg = channels[c].data() + start;
    for (int pass = 0; pass < 2; ++pass) {
      const auto& win = pass == 0 ? window : dwindow;
      for (int n = 0; n < w; ++n) buf[n] = seg[n] * win[n];
      SharedFft().Forward(buf, spec_buf);
      auto& dst = pass == 0 ? out.spectrum : out.derivative_spectrum;
      std::copy_n(spec_buf.begin(), kSpectrumBins,
                  dst.begin() + static_cast<std::ptrdiff_t>(c) * kSpectrumBins);
    }
  }
  return out;
}

std::vector<SpectralFrame> FrameSpectra(
    const std::vector<std::vector<double>>& channels, const FrameSpec& spec) {
  spec.Validate();
  if (channels.empty()) return {};
  const std::size_t len = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != len) throw ConfigError("FrameSpectra: ragged channels");
  }
  const int frames = NumFrames(len, spec);
  std::vector<SpectralFrame> out;
  out.reserve(frames);
  for (int f = 0; f < frames; ++f) {
    out.push_back(ComputeSpectralFrame(channels, spec, f));
  }
  return out;
}

Grid Reassign(const SpectralFrame& frame) {
  Grid out(frame.num_channels, kSpectrumBins);
  double frame_max = 0.0;
  for (const auto& x : frame.spectrum) frame_max = std::max(frame_max, std::norm(x));
  // Energies below 1e-12 of the frame maximum (in magnitude) stay put.
  const double floor = frame_max * 1e-24;
  const double bins_per_radian = kFftSize / (2.0 * kPi);

  for (int c = 0; c < frame.num_channels; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * kSpectrumBins;
    for (int k = 0; k < kSpectrumBins; ++k) {
      const std::complex<double> x = frame.spectrum[base + k];
      const double energy = std::norm(x);
      if (energy == 0.0) continue;
      int target = k;
      if (energy > floor) {
        const std::complex<double> dx = frame.derivative_spectrum[base + k];
        const double shift = -(dx * std::conj(x)).imag() / energy;
        target = static_cast<int>(std::lround(k + shift * bins_per_radian));
        target = std::clamp(target, 0, kSpectrumBins - 1);
      }
      out.at(c, target) += energy;
    }
    for (int k = 0; k < kSpectrumBins; ++k) out.at(c, k) = std::sqrt(out.at(c, k));
  }
  return out;
}

void LogRange::Include(const Grid& magnitudes) {
  for (double v : magnitudes.values) {
    const double l = std::log(kLogFloor + v);
    min = std::min(min, l);
    max = std::max(max, l);
  }
}

namespace {
LogRange EmptyRange() {
  return {std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
}
}  // namespace

Grid LogAndNormalize(const Grid& magnitudes, const LogRange& range) {
  Grid out(magnitudes.rows, magnitudes.cols);
  const double span = range.max - range.min;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double l = std::log(kLogFloor + magnitudes.values[i]);
    out.values[i] = std::clamp((l - range.min) / span, 0.0, 1.0);
  }
  return out;
}

std::vector<Grid> LogAndNormalize(const std::vector<Grid>& magnitudes) {
  LogRange range = EmptyRange();
  for (const auto& g : magnitudes) range.Include(g);
  std::vector<Grid> out;
  out.reserve(magnitudes.size());
  for (const auto& g : magnitudes) out.push_back(LogAndNormalize(g, range));
  return out;
}

std::pair<int, int> PoolingShare(int k, int in_bins, int out_bins) {
  return {k * in_bins / out_bins, (k + 1) * in_bins / out_bins};
}

Grid DownsampleBins(const Grid& grid) {
  if (grid.cols != kSpectrumBins) {
    throw ConfigError("DownsampleBins: expected " +
                      std::to_string(kSpectrumBins) + " bins");
  }
  Grid out(grid.rows, kNumMapBins);
  for (int r = 0; r < grid.rows; ++r) {
    for (int k = 0; k < kNumMapBins; ++k) {
      const auto [b, e] = PoolingShare(k, kSpectrumBins, kNumMapBins);
      double m = grid.at(r, b);
      for (int i = b + 1; i < e; ++i) m = std::max(m, grid.at(r, i));
      out.at(r, k) = m;
    }
  }
  return out;
}

std::vector<MapFrame> BuildMaps(const ChannelSignals& analyzed, MapKind kind,
                                const FrameSpec& spec, ExecPolicy policy) {
  spec.Validate();
  if (analyzed.sample_rate != kWorkingRate) {
    throw ConfigError("BuildMaps: expected 8000 Hz channel signals");
  }
  if (static_cast<int>(analyzed.num_channels()) != kNumChannels) {
    throw ConfigError("BuildMaps: expected 256 channels");
  }

  const std::vector<std::vector<double>>* source = &analyzed.channels;
  std::vector<std::vector<double>> envelopes;
  if (kind == MapKind::kCam) {
    envelopes.resize(kNumChannels);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel)
    for (int c = 0; c < kNumChannels; ++c) {
      envelopes[c] = Envelope(analyzed.channels[c], c + 1);
    }
    source = &envelopes;
  }

  const int frames = NumFrames(analyzed.length(), spec);
  std::vector<Grid> pooled(frames);
  std::vector<LogRange> ranges(frames, EmptyRange());
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::kParallel)
  for (int f = 0; f < frames; ++f) {
    const Grid reassigned = Reassign(ComputeSpectralFrame(*source, spec, f));
    ranges[f].Include(reassigned);
    pooled[f] = DownsampleBins(reassigned);
  }

  // log and the affine rescale are monotone, so pooling first and
  // normalizing afterwards gives the same values as the other order as long
  // as the range comes from the unpooled grids.
  LogRange range = EmptyRange();
  for (const auto& r : ranges) {
    range.min = std::min(range.min, r.min);
    range.max = std::max(range.max, r.max);
  }
  std::vector<MapFrame> out(frames);
  for (int f = 0; f < frames; ++f) {
    out[f].kind = kind;
    out[f].frame_index = f;
    out[f].values = LogAndNormalize(pooled[f], range);
  }
  return out;
}

std::vector<MapFrame> BuildCam(const AudioSignal& signal, const FrameSpec& spec,
                               ExecPolicy policy) {
  static const Filterbank bank;
  return BuildMaps(bank.Analyze(signal, policy), MapKind::kCam, spec, policy);
}

std::vector<MapFrame> BuildCsm(const AudioSignal& signal, const FrameSpec& spec,
                               ExecPolicy policy) {
  static const Filterbank bank;
  return BuildMaps(bank.Analyze(signal, policy), MapKind::kCsm, spec, policy);
}

}  // namespace spikesep
