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

#ifndef SPIKESEP_AUDIO_H_
#define SPIKESEP_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace spikesep {

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
};

// Reads a PCM (8/16/24/32-bit integer) or IEEE float WAV file. Multi-channel
// input is averaged to mono. Integer samples are scaled by 1/2^(bits-1).
// Throws IoError when the file cannot be opened and FormatError for
// unsupported encodings or empty audio.
AudioSignal ReadWav(const std::filesystem::path& path);

struct WavWriteReport {
  // Samples outside [-1, 1] that were clipped before quantization.
  std::size_t clipped_samples = 0;
};

// Writes 16-bit mono PCM.
WavWriteReport WriteWav(const AudioSignal& signal,
                        const std::filesystem::path& path);

// Band-limits with a linear-phase Kaiser-windowed sinc (cutoff 3.8 kHz,
// >= 60 dB stopband) and resamples to kWorkingRate. Arbitrary input rates
// >= kWorkingRate are accepted; 8 kHz input is returned unchanged.
AudioSignal ResampleTo8k(const AudioSignal& signal);

}  // namespace spikesep

#endif  // SPIKESEP_AUDIO_H_
