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

#include "spikesep/filterbank.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace spikesep {
namespace {

constexpr int kEqualizationIterations = 40;

double BarkSlope(double hz) {
  const double a = 0.00076 * hz;
  const double r = hz / 7500.0;
  return 13.0 * 0.00076 / (1.0 + a * a) +
         3.5 * (2.0 * hz / (7500.0 * 7500.0)) / (1.0 + r * r * r * r);
}

}  // namespace

double HzToBark(double hz) {
  const double r = hz / 7500.0;
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan(r * r);
}

double BarkToHz(double bark) {
  // Newton on a strictly increasing function; converges in a handful of
  // steps over the audio range.
  double hz = 1000.0;
  for (int it = 0; it < 100; ++it) {
    const double step = (HzToBark(hz) - bark) / BarkSlope(hz);
    hz = std::max(hz - step, 0.5 * hz);
    if (std::abs(step) < 1e-12 * std::max(1.0, hz)) break;
  }
  return hz;
}

double ErbHz(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

std::vector<double> BarkCenterFrequencies(const FilterbankSpec& spec) {
  if (spec.num_channels < 2 || !(spec.f_low > 0.0) ||
      !(spec.f_high > spec.f_low) || spec.f_high >= spec.sample_rate / 2.0) {
    throw ConfigError("invalid filterbank spec");
  }
  const double b0 = HzToBark(spec.f_low);
  const double b1 = HzToBark(spec.f_high);
  std::vector<double> centers(spec.num_channels);
  for (int i = 0; i < spec.num_channels; ++i) {
    const double b = b0 + (b1 - b0) * i / (spec.num_channels - 1);
    centers[i] = BarkToHz(b);
  }
  centers.front() = spec.f_low;
  centers.back() = spec.f_high;
  return centers;
}

Filterbank::Filterbank(const FilterbankSpec& spec)
    : spec_(spec), centers_(BarkCenterFrequencies(spec)) {
  if (spec.filter_order < 1) throw ConfigError("filter_order must be >= 1");
  const int n = spec_.num_channels;
  const double fs = spec_.sample_rate;
  bandwidths_.resize(n);
  poles_.resize(n);
  stage_gain_.resize(n);
  for (int i = 0; i < n; ++i) {
    bandwidths_[i] = 1.019 * ErbHz(centers_[i]);
    const double r = std::exp(-2.0 * kPi * bandwidths_[i] / fs);
    poles_[i] = std::polar(r, 2.0 * kPi * centers_[i] / fs);
    // Complex cascade peaks at 2 so that the real part peaks near 1.
    stage_gain_[i] = (1.0 - r) * std::pow(2.0, 1.0 / spec_.filter_order);
    // Near 0 and Nyquist the mirrored half of the real filter adds to the
    // peak; trim the stage gain so the center gain is exactly one.
    const double peak = std::abs(FrequencyResponse(i, centers_[i]));
    stage_gain_[i] *= std::pow(1.0 / peak, 1.0 / spec_.filter_order);
  }
  DesignEqualization();
}

void Filterbank::FilterChannel(int channel, std::span<const double> in,
                               std::span<double> out) const {
  const std::complex<double> a = poles_[channel];
  const double g = stage_gain_[channel];
  const int order = spec_.filter_order;
  std::vector<std::complex<double>> state(order, 0.0);
  for (std::size_t n = 0; n < in.size(); ++n) {
    std::complex<double> u = in[n];
    for (int k = 0; k < order; ++k) {
      state[k] = g * u + a * state[k];
      u = state[k];
    }
    out[n] = u.real();
  }
}

std::complex<double> Filterbank::FrequencyResponse(int channel,
                                                   double hz) const {
  const double w = 2.0 * kPi * hz / spec_.sample_rate;
  const std::complex<double> a = poles_[channel];
  const double g = stage_gain_[channel];
  const auto section = [&](double omega) {
    return std::pow(g / (1.0 - a * std::polar(1.0, -omega)),
                    spec_.filter_order);
  };
  // Re{y} = (y + conj(y)) / 2, so H_real(w) = (Hc(w) + conj(Hc(-w))) / 2.
  return 0.5 * (section(w) + std::conj(section(-w)));
}

double Filterbank::BankPowerResponse(double hz) const {
  double acc = 0.0;
  for (int i = 0; i < spec_.num_channels; ++i) {
    acc += gains_[i] * std::norm(FrequencyResponse(i, hz));
  }
  return acc;
}

void Filterbank::DesignEqualization() {
  // Expected output power for unit white noise through analysis + synthesis
  // is sum_i gain_i |H_i|^2. Rescale each gain by the summed response at
  // its own center until the sum is flat there.
  const int n = spec_.num_channels;
  std::vector<std::vector<double>> power(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < n; ++c) {
      power[c][i] = std::norm(FrequencyResponse(i, centers_[c]));
    }
  }
  gains_.assign(n, 1.0);
  for (int it = 0; it < kEqualizationIterations; ++it) {
    std::vector<double> total(n, 0.0);
    for (int c = 0; c < n; ++c) {
      for (int i = 0; i < n; ++i) total[c] += gains_[i] * power[c][i];
    }
    for (int c = 0; c < n; ++c) gains_[c] /= total[c];
  }
}

ChannelSignals Filterbank::Analyze(const AudioSignal& signal,
                                   ExecPolicy policy) const {
  if (signal.sample_rate != spec_.sample_rate) {
    throw ConfigError("Analyze: expected " + std::to_string(spec_.sample_rate) +
                      " Hz input, got " + std::to_string(signal.sample_rate));
  }
  const int n = spec_.num_channels;
  ChannelSignals out;
  out.sample_rate = signal.sample_rate;
  out.channels.assign(n, std::vector<double>(signal.size()));
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel)
  for (int i = 0; i < n; ++i) {
    FilterChannel(i, signal.samples, out.channels[i]);
  }
  return out;
}

AudioSignal Filterbank::Synthesize(const ChannelSignals& masked,
                                   ExecPolicy policy) const {
  const int n = spec_.num_channels;
  if (static_cast<int>(masked.num_channels()) != n) {
    throw ConfigError("Synthesize: expected " + std::to_string(n) +
                      " channels, got " +
                      std::to_string(masked.num_channels()));
  }
  const std::size_t len = masked.length();
  for (const auto& ch : masked.channels) {
    if (ch.size() != len) throw ConfigError("Synthesize: ragged channels");
  }

  // Per-channel backward pass into its own buffer, then a fixed-order sum so
  // the result does not depend on the thread count.
  std::vector<std::vector<double>> passes(n);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel)
  for (int i = 0; i < n; ++i) {
    const auto& ch = masked.channels[i];
    if (std::all_of(ch.begin(), ch.end(), [](double v) { return v == 0.0; })) {
      continue;
    }
    std::vector<double> rev(ch.rbegin(), ch.rend());
    FilterChannel(i, rev, rev);
    for (double& v : rev) v *= gains_[i];
    passes[i] = std::move(rev);
  }

  AudioSignal out;
  out.sample_rate = masked.sample_rate;
  out.samples.assign(len, 0.0);
  const long long total = static_cast<long long>(len);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel)
  for (long long t = 0; t < total; ++t) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!passes[i].empty()) acc += passes[i][t];
    }
    // Undo the time reversal.
    out.samples[len - 1 - t] = acc;
  }
  return out;
}

}  // namespace spikesep
