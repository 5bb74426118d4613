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

#ifndef SPIKESEP_OSCILLATOR_H_
#define SPIKESEP_OSCILLATOR_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spikesep/common.h"
#include "spikesep/maps.h"

namespace spikesep {

// Constants of the relaxation-oscillator network. Defaults are the
// published values; the integration settings (dt, steps_per_frame,
// averaging_window) are ours.
struct NetParams {
  double epsilon = 0.02;
  double gamma = 4.0;
  double beta = 0.1;
  // Amplitude of the Gaussian noise term.
  double rho = 0.02;
  // Input-difference decay of the first-layer weights.
  double lambda = 1.0;
  // Global controller gain (G = controller_alpha * H(z - theta)).
  double controller_alpha = -0.1;
  double xi = 0.4;
  double eta = 0.05;
  double theta = 0.9;
  // Activity fraction above which the controller integrator is driven.
  double zeta = 0.2;
  // Input-difference decay of the second-layer weights.
  double mu = 2.0;
  // Constant of the first-to-second layer weights (alpha / i for CAM).
  double layer_weight_alpha = 1.0;
  // Divide the second-layer weights by the number of partners (n - 1), the
  // same normalization the first layer applies to its neighbourhood.
  bool normalize_layer2 = true;
  MapKind kind = MapKind::kCam;

  double dt = 0.05;
  int steps_per_frame = 20000;
  // Trailing window of the second-layer input average, in time units.
  double averaging_window = 190.0;
  std::uint64_t seed = 1;
  bool noise = true;

  double kappa() const { return kind == MapKind::kCam ? 1.0 : 0.0; }
  void Validate() const;
};

struct OscillatorState {
  double x = 0.0;
  double y = 0.0;
};

struct Derivatives {
  double dx = 0.0;
  double dy = 0.0;
};

// 1 + tanh(x / beta), written as a logistic so that it costs one exp.
// Every integrator goes through this function, which keeps them bitwise
// comparable.
inline double ActivationGain(double x, double beta) {
  return 2.0 / (1.0 + std::exp(-2.0 * x / beta));
}

// dx/dt = 3x - x^3 + 2 - y + noise + p + S
// dy/dt = epsilon (gamma (1 + tanh(x / beta)) - y)
// `noise` is the already-scaled noise sample standing in for rho.
Derivatives OscillatorDerivatives(const OscillatorState& s, double p, double S,
                                  double noise, const NetParams& params);

inline double Heaviside(double v) { return v > 0.0 ? 1.0 : 0.0; }

// Neighbour slots of a first-layer neuron.
enum Neighbour { kBinBelow = 0, kBinAbove = 1, kChannelBelow = 2, kChannelAbove = 3 };

// First-layer neuron (bin, channel) lives at channel * kNumMapBins + bin.
inline int NeuronIndex(int bin, int channel) { return channel * kNumMapBins + bin; }

// Long-range connections run from the top channels into the low ones within
// the same bin (0-based channel ranges below).
inline constexpr int kLongRangeTargets = kFirstEnvelopeChannel - 1;  // 0..28
inline constexpr int kLongRangeFirstSource = 224;                    // 224..255
inline constexpr int kLongRangeSources = kNumChannels - kLongRangeFirstSource;

// Dynamic first-layer weights of one frame.
struct Layer1Weights {
  // Per neuron, one weight per Neighbour slot; 0 where the neighbour does
  // not exist.
  std::vector<std::array<double, 4>> local;
  // Long-range weights, indexed [(target_channel * kNumMapBins + bin) *
  // kLongRangeSources + (source_channel - kLongRangeFirstSource)].
  std::vector<double> long_range;

  double LongRange(int bin, int target_channel, int source_channel) const {
    return long_range[(static_cast<std::size_t>(target_channel) * kNumMapBins + bin) *
                          kLongRangeSources +
                      (source_channel - kLongRangeFirstSource)];
  }
};

// w = (1 / Card N(i,j)) * 0.25 / exp(lambda |p(i,j) - p(k,m)|) over the
// 4-neighbourhood, and the same rule with Card = kLongRangeSources for the
// long-range edges.
Layer1Weights ComputeLayer1Weights(const MapFrame& frame, const NetParams& params);

// L(i,j) = sum_{k in top channels} w(i,j,i,k) H(x(i,k)) for low channels,
// 0 otherwise. `x` is the first-layer potential array.
double LongRangeCoupling(std::span<const double> x, const Layer1Weights& weights,
                         int bin, int channel);

// S(i,j) = sum_neighbours w H(x_nb) - eta G + kappa L.
double Layer1Coupling(std::span<const double> x, const Layer1Weights& weights,
                      double G, double L, const NetParams& params, int bin,
                      int channel);

struct ControllerState {
  double z = 0.0;
  double G = 0.0;
};

// sigma = [activity_fraction > zeta]; z += dt (sigma - xi z);
// G = controller_alpha H(z - theta).
ControllerState ControllerStep(const ControllerState& ctrl,
                               double activity_fraction,
                               const NetParams& params, double dt);

// Xi{v} = 1 for v == 0, v otherwise.
inline double Xi(double v) { return v == 0.0 ? 1.0 : v; }

// Weight of first-layer bin `bin` (0-based) into the second layer:
// alpha / (bin + 1) for CAM, alpha for CSM.
double InterLayerWeight(int bin, const NetParams& params);

inline constexpr double kMaxLayer2Product = 10.0;

// prod_i w_ll(i) Xi{v_i} over the column, where v = max(x, 0) and the
// weight only multiplies bins with a non-zero output. Clamped to
// [0, kMaxLayer2Product]. `column` holds x for bins 0..kNumMapBins-1.
double ColumnProduct(std::span<const double> column, const NetParams& params);

// w'(j,k) = 0.2 / exp(mu |drive_j - drive_k|), symmetric, zero diagonal,
// divided by drives.size() - 1 when params.normalize_layer2 is set.
// Returned row-major, drives.size() squared.
std::vector<double> ComputeLayer2Weights(std::span<const double> drives,
                                         const NetParams& params);

// Counter-based random numbers: every value depends only on (seed, stream,
// counter), never on evaluation order or thread.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream);

  // Standard normal (Marsaglia-Tsang ziggurat).
  double Gaussian(std::uint64_t counter) const;
  // Uniform on [0, 1).
  double Uniform(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

inline double GaussianNoise(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t counter) {
  return NoiseStream(seed, stream).Gaussian(counter);
}

}  // namespace spikesep

#endif  // SPIKESEP_OSCILLATOR_H_
