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

#include "spikesep/oscillator.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikesep {
namespace {

std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double ToUnitOpen(std::uint64_t bits) {
  // (0, 1]: never zero so the log below is finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

constexpr double kZigguratR = 3.442619855899;

// 128-layer normal ziggurat tables.
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;
    const double vn = 9.91256303526217e-3;
    double dn = kZigguratR;
    double tn = dn;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

const ZigguratTables& Ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace

void NetParams::Validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (steps_per_frame <= 0) throw ConfigError("steps_per_frame must be positive");
  if (!(averaging_window > 0.0)) {
    throw ConfigError("averaging_window must be positive");
  }
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const double all[] = {epsilon, gamma,      rho, lambda, controller_alpha,
                        xi,      eta,        theta, zeta, mu,
                        layer_weight_alpha, dt, averaging_window};
  for (double v : all) {
    if (!std::isfinite(v)) throw ConfigError("network parameters must be finite");
  }
}

Derivatives OscillatorDerivatives(const OscillatorState& s, double p, double S,
                                  double noise, const NetParams& params) {
  Derivatives d;
  d.dx = 3.0 * s.x - s.x * s.x * s.x + 2.0 - s.y + noise + p + S;
  d.dy = params.epsilon * (params.gamma * ActivationGain(s.x, params.beta) - s.y);
  return d;
}

Layer1Weights ComputeLayer1Weights(const MapFrame& frame, const NetParams& params) {
  Layer1Weights w;
  w.local.assign(static_cast<std::size_t>(kNumChannels) * kNumMapBins, {0, 0, 0, 0});
  for (int j = 0; j < kNumChannels; ++j) {
    for (int i = 0; i < kNumMapBins; ++i) {
      const double p = frame.p(j, i);
      const bool has[4] = {i > 0, i + 1 < kNumMapBins, j > 0, j + 1 < kNumChannels};
      const int nb_bin[4] = {i - 1, i + 1, i, i};
      const int nb_ch[4] = {j, j, j - 1, j + 1};
      const int card = has[0] + has[1] + has[2] + has[3];
      auto& slot = w.local[NeuronIndex(i, j)];
      for (int s = 0; s < 4; ++s) {
        if (!has[s]) continue;
        const double q = frame.p(nb_ch[s], nb_bin[s]);
        slot[s] = (1.0 / card) * 0.25 / std::exp(params.lambda * std::abs(p - q));
      }
    }
  }

  w.long_range.assign(
      static_cast<std::size_t>(kLongRangeTargets) * kNumMapBins * kLongRangeSources, 0.0);
  for (int j = 0; j < kLongRangeTargets; ++j) {
    for (int i = 0; i < kNumMapBins; ++i) {
      const double p = frame.p(j, i);
      for (int k = 0; k < kLongRangeSources; ++k) {
        const double q = frame.p(kLongRangeFirstSource + k, i);
        w.long_range[(static_cast<std::size_t>(j) * kNumMapBins + i) * kLongRangeSources + k] =
            (1.0 / kLongRangeSources) * 0.25 / std::exp(params.lambda * std::abs(p - q));
      }
    }
  }
  return w;
}

double LongRangeCoupling(std::span<const double> x, const Layer1Weights& weights,
                         int bin, int channel) {
  if (channel >= kLongRangeTargets) return 0.0;
  double acc = 0.0;
  for (int k = kLongRangeFirstSource; k < kNumChannels; ++k) {
    acc += weights.LongRange(bin, channel, k) * Heaviside(x[NeuronIndex(bin, k)]);
  }
  return acc;
}

double Layer1Coupling(std::span<const double> x, const Layer1Weights& weights,
                      double G, double L, const NetParams& params, int bin,
                      int channel) {
  const auto& w = weights.local[NeuronIndex(bin, channel)];
  double acc = 0.0;
  if (bin > 0) acc += w[kBinBelow] * Heaviside(x[NeuronIndex(bin - 1, channel)]);
  if (bin + 1 < kNumMapBins) acc += w[kBinAbove] * Heaviside(x[NeuronIndex(bin + 1, channel)]);
  if (channel > 0) acc += w[kChannelBelow] * Heaviside(x[NeuronIndex(bin, channel - 1)]);
  if (channel + 1 < kNumChannels) {
    acc += w[kChannelAbove] * Heaviside(x[NeuronIndex(bin, channel + 1)]);
  }
  return acc - params.eta * G + params.kappa() * L;
}

ControllerState ControllerStep(const ControllerState& ctrl,
                               double activity_fraction,
                               const NetParams& params, double dt) {
  const double sigma = activity_fraction > params.zeta ? 1.0 : 0.0;
  ControllerState out;
  out.z = ctrl.z + dt * (sigma - params.xi * ctrl.z);
  out.G = params.controller_alpha * Heaviside(out.z - params.theta);
  return out;
}

double InterLayerWeight(int bin, const NetParams& params) {
  return params.kind == MapKind::kCam ? params.layer_weight_alpha / (bin + 1)
                                      : params.layer_weight_alpha;
}

double ColumnProduct(std::span<const double> column, const NetParams& params) {
  double prod = 1.0;
  for (int i = 0; i < static_cast<int>(column.size()); ++i) {
    const double v = std::max(column[i], 0.0);
    if (v == 0.0) continue;  // Xi{0} = 1
    prod *= InterLayerWeight(i, params) * Xi(v);
  }
  return std::clamp(prod, 0.0, kMaxLayer2Product);
}

std::vector<double> ComputeLayer2Weights(std::span<const double> drives,
                                         const NetParams& params) {
  const std::size_t n = drives.size();
  std::vector<double> w(n * n, 0.0);
  const double scale =
      params.normalize_layer2 && n > 1 ? 0.2 / static_cast<double>(n - 1) : 0.2;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double v = scale / std::exp(params.mu * std::abs(drives[j] - drives[k]));
      w[j * n + k] = v;
      w[k * n + j] = v;
    }
  }
  return w;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream)
    : key_(SplitMix64(seed ^ SplitMix64(stream + 0x632BE59BD9B4E019ull))) {}

double NoiseStream::Uniform(std::uint64_t counter) const {
  return static_cast<double>(SplitMix64(key_ ^ SplitMix64(counter)) >> 11) * 0x1.0p-53;
}

double NoiseStream::Gaussian(std::uint64_t counter) const {
  const ZigguratTables& zt = Ziggurat();
  const std::uint64_t base = SplitMix64(key_ ^ SplitMix64(counter));
  std::uint64_t bits = base;
  std::uint64_t extra = 0;
  // Further uniforms for the rare slow path come from the same counter.
  auto next_bits = [&] { return SplitMix64(base + (++extra) * 0x9E3779B97F4A7C15ull); };
  auto next_uniform = [&] { return ToUnitOpen(next_bits()); };

  for (;;) {
    const auto hz = static_cast<std::int32_t>(bits >> 32);
    const int iz = static_cast<int>(bits & 127);
    if (static_cast<std::uint32_t>(std::abs(static_cast<std::int64_t>(hz))) < zt.kn[iz]) {
      return hz * zt.wn[iz];
    }
    if (iz == 0) {
      // Tail beyond r.
      double x, y;
      do {
        x = -std::log(next_uniform()) / kZigguratR;
        y = -std::log(next_uniform());
      } while (y + y < x * x);
      return hz > 0 ? kZigguratR + x : -kZigguratR - x;
    }
    const double x = hz * zt.wn[iz];
    if (zt.fn[iz] + next_uniform() * (zt.fn[iz - 1] - zt.fn[iz]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
    bits = next_bits();
  }
}

}  // namespace spikesep
