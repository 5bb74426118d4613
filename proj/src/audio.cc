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

#include "spikesep/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "spikesep/common.h"

namespace spikesep {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// Anti-alias design: -6 dB at 3.8 kHz, passband to 3.6 kHz, stopband from
// 4.0 kHz. A 65 dB Kaiser design needs ~10 ms of support for a 400 Hz
// transition band; we use 11 ms.
constexpr double kCutoffHz = 3800.0;
constexpr double kKernelHalfWidthSec = 0.0055;
constexpr double kKaiserBeta = 6.2;  // 0.1102 * (65 - 8.7)

std::uint32_t ReadLe(const unsigned char* p, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void PutLe(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) {
    out.push_back(static_cast<char>(v & 0xFF));
    v >>= 8;
  }
}

double DecodeSample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      std::uint32_t u = ReadLe(p, 4);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = static_cast<std::uint64_t>(ReadLe(p, 4)) |
                      (static_cast<std::uint64_t>(ReadLe(p + 4, 4)) << 32);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  if (bits == 8) return (static_cast<int>(p[0]) - 128) / 128.0;
  const int bytes = bits / 8;
  std::uint32_t u = ReadLe(p, bytes);
  // Sign-extend.
  const std::uint32_t sign = 1u << (bits - 1);
  std::int64_t v = static_cast<std::int64_t>(u);
  if (u & sign) v -= static_cast<std::int64_t>(1) << bits;
  return static_cast<double>(v) / static_cast<double>(sign);
}

double KernelAt(double tau_sec, double scale) {
  const double u = tau_sec / kKernelHalfWidthSec;
  if (std::abs(u) >= 1.0) return 0.0;
  const double arg = 2.0 * kCutoffHz * tau_sec;
  const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
  const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) /
                        std::cyl_bessel_i(0.0, kKaiserBeta);
  return scale * sinc * window;
}

}  // namespace

AudioSignal ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  int channels = 0;
  int rate = 0;
  int bits = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::size_t len = ReadLe(chunk + 4, 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(len, data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError(path.string() + ": short fmt chunk");
      format = static_cast<std::uint16_t>(ReadLe(chunk + 8, 2));
      channels = static_cast<int>(ReadLe(chunk + 10, 2));
      rate = static_cast<int>(ReadLe(chunk + 12, 4));
      bits = static_cast<int>(ReadLe(chunk + 22, 2));
      if (format == kFormatExtensible && avail >= 26) {
        format = static_cast<std::uint16_t>(ReadLe(chunk + 32, 2));
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data.data() + body;
      pcm_bytes = avail;
    }
    pos = body + len + (len & 1);
  }

  if (format == 0 || pcm == nullptr) {
    throw FormatError(path.string() + ": missing fmt or data chunk");
  }
  const bool int_ok = format == kFormatPcm &&
                      (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!int_ok && !float_ok) {
    throw FormatError(path.string() + ": unsupported encoding (format " +
                      std::to_string(format) + ", " + std::to_string(bits) +
                      " bits)");
  }
  if (channels <= 0 || rate <= 0) {
    throw FormatError(path.string() + ": bad channel count or sample rate");
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = pcm_bytes / frame_bytes;
  if (frames == 0) throw FormatError(path.string() + ": zero-length audio");

  AudioSignal out;
  out.sample_rate = rate;
  out.samples.resize(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += DecodeSample(pcm + n * frame_bytes + c * (bits / 8), format, bits);
    }
    out.samples[n] = acc / channels;
  }
  return out;
}

WavWriteReport WriteWav(const AudioSignal& signal,
                        const std::filesystem::path& path) {
  if (signal.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  WavWriteReport report;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(signal.size() * 2);

  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  PutLe(buf, 36 + data_bytes, 4);
  buf += "WAVEfmt ";
  PutLe(buf, 16, 4);
  PutLe(buf, kFormatPcm, 2);
  PutLe(buf, 1, 2);
  PutLe(buf, static_cast<std::uint32_t>(signal.sample_rate), 4);
  PutLe(buf, static_cast<std::uint32_t>(signal.sample_rate) * 2, 4);
  PutLe(buf, 2, 2);
  PutLe(buf, 16, 2);
  buf += "data";
  PutLe(buf, data_bytes, 4);
  for (double s : signal.samples) {
    if (!std::isfinite(s)) throw ConfigError("cannot write non-finite sample");
    if (s > 1.0 || s < -1.0) {
      ++report.clipped_samples;
      s = std::clamp(s, -1.0, 1.0);
    }
    const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    PutLe(buf, static_cast<std::uint32_t>(static_cast<std::int16_t>(q)) & 0xFFFF, 2);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
  return report;
}

AudioSignal ResampleTo8k(const AudioSignal& signal) {
  if (signal.sample_rate < kWorkingRate) {
    throw ConfigError("input rate " + std::to_string(signal.sample_rate) +
                      " Hz is below 8000 Hz; upsampling is not supported");
  }
  if (signal.sample_rate == kWorkingRate) return signal;

  const double in_rate = signal.sample_rate;
  const std::size_t n_in = signal.size();
  const std::size_t n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * kWorkingRate / in_rate));
  const double scale = 2.0 * kCutoffHz / in_rate;
  const long half_taps = static_cast<long>(std::ceil(kKernelHalfWidthSec * in_rate));

  AudioSignal out;
  out.sample_rate = kWorkingRate;
  out.samples.assign(n_out, 0.0);
  for (std::size_t n = 0; n < n_out; ++n) {
    // Output sample n sits at input position n * in_rate / 8000.
    const double center = static_cast<double>(n) * in_rate / kWorkingRate;
    const long k0 = static_cast<long>(std::floor(center));
    double acc = 0.0;
    for (long k = k0 - half_taps; k <= k0 + half_taps + 1; ++k) {
      if (k < 0 || k >= static_cast<long>(n_in)) continue;
      acc += signal.samples[k] * KernelAt((center - k) / in_rate, scale);
    }
    out.samples[n] = acc;
  }
  return out;
}

}  // namespace spikesep
