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

#ifndef SPIKESEP_FILTERBANK_H_
#define SPIKESEP_FILTERBANK_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "spikesep/audio.h"
#include "spikesep/common.h"

namespace spikesep {

struct FilterbankSpec {
  int num_channels = kNumChannels;
  double f_low = 100.0;
  double f_high = 3600.0;
  int filter_order = 4;
  int sample_rate = kWorkingRate;
};

// One time series per cochlear channel, all of equal length.
struct ChannelSignals {
  std::vector<std::vector<double>> channels;
  int sample_rate = kWorkingRate;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

// Traunmueller-style Bark warping:
// 13 atan(0.00076 f) + 3.5 atan((f / 7500)^2).
double HzToBark(double hz);
double BarkToHz(double bark);

// Glasberg & Moore equivalent rectangular bandwidth.
double ErbHz(double hz);

// Centers uniformly spaced in Bark between spec.f_low and spec.f_high,
// both endpoints included.
std::vector<double> BarkCenterFrequencies(const FilterbankSpec& spec);

// Bank of gammatone bandpass filters plus the matching forward-reverse
// synthesis path.
//
// Each channel is a cascade of `filter_order` identical complex one-pole
// sections tuned to the channel's center frequency; the channel output is
// the real part of the cascade output. Bandwidth is 1.019 ERB.
//
// Synthesize() runs every channel backwards through the same filter, which
// gives each channel a zero-phase |H|^2 response, and weighs channels by a
// per-channel equalization gain so that the summed response of the whole
// bank is flat across the passband.
class Filterbank {
 public:
  explicit Filterbank(const FilterbankSpec& spec = {});

  const FilterbankSpec& spec() const { return spec_; }
  int num_channels() const { return spec_.num_channels; }
  const std::vector<double>& center_frequencies() const { return centers_; }
  const std::vector<double>& bandwidths() const { return bandwidths_; }
  const std::vector<double>& synthesis_gains() const { return gains_; }

  // Causal filtering of one channel; out may alias in.
  void FilterChannel(int channel, std::span<const double> in,
                     std::span<double> out) const;

  // Response of channel `channel` (real-output filter) at `hz`.
  std::complex<double> FrequencyResponse(int channel, double hz) const;

  // Summed synthesis response sum_i gain_i |H_i(hz)|^2 of the whole bank.
  double BankPowerResponse(double hz) const;

  ChannelSignals Analyze(const AudioSignal& signal,
                         ExecPolicy policy = ExecPolicy::kParallel) const;

  AudioSignal Synthesize(const ChannelSignals& masked,
                         ExecPolicy policy = ExecPolicy::kParallel) const;

 private:
  void DesignEqualization();

  FilterbankSpec spec_;
  std::vector<double> centers_;
  std::vector<double> bandwidths_;
  std::vector<std::complex<double>> poles_;
  std::vector<double> stage_gain_;
  std::vector<double> gains_;
};

}  // namespace spikesep

#endif  // SPIKESEP_FILTERBANK_H_
