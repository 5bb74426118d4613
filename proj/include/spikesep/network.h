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

#ifndef SPIKESEP_NETWORK_H_
#define SPIKESEP_NETWORK_H_

#include <cstdint>
#include <span>
#include <vector>

#include "spikesep/common.h"
#include "spikesep/maps.h"
#include "spikesep/oscillator.h"

namespace spikesep {

// Any |x| beyond this aborts the frame.
inline constexpr double kDivergenceLimit = 10.0;

// One synchronous Euler step over a set of independent oscillators: all
// derivatives are taken on the pre-step snapshot, then committed. Noise for
// oscillator n is rho * GaussianNoise(seed, stream, step * size + n) unless
// params.noise is off. Throws DivergenceError if any |x| exceeds the limit.
void EulerStep(std::span<OscillatorState> states, std::span<const double> inputs,
               std::span<const double> couplings, const NetParams& params,
               std::uint64_t stream, std::uint64_t step);

// Rising zero crossings of x, with the crossing time interpolated inside
// the step.
struct SpikeDetector {
  static bool Crossed(double before, double after) {
    return before <= 0.0 && after > 0.0;
  }
  static double Time(double t_before, double dt, double before, double after) {
    return t_before + dt * (-before) / (after - before);
  }
};

// Isolated, noise-free oscillator with constant input p, started at
// (x, y) = (0, 0). Returns the spike times up to `duration`.
std::vector<double> SingleOscillatorSpikes(double p, double duration,
                                           const NetParams& params);

// Median inter-spike interval of the noise-free single oscillator at input
// p, measured after the first cycle.
double ReferencePeriod(double p, const NetParams& params);

// A small, fully specified oscillator assembly: n oscillators with
// constant inputs, an n x n coupling matrix (row j holds the weights onto
// oscillator j) and an optional global controller, integrated with the same
// Euler scheme as the network. Used to probe synchronization on its own.
struct Assembly {
  std::vector<double> inputs;
  std::vector<double> weights;  // row-major n x n
  std::vector<OscillatorState> initial;
  bool controller = true;
};

// Spike times per oscillator after `steps` steps. Noise uses stream 0 of
// params.seed when params.noise is on.
std::vector<std::vector<double>> SimulateAssembly(const Assembly& assembly,
                                                  const NetParams& params, long steps);

struct SpikeRecord {
  // Spike times of the 256 second-layer neurons.
  std::vector<std::vector<double>> layer2;
  // First-layer spike times (kNumChannels * kNumMapBins, NeuronIndex order);
  // empty unless requested.
  std::vector<std::vector<double>> layer1;
};

struct PhaseGrouping {
  static constexpr int kSilent = -1;
  // Channel -> group id in [0, num_groups), or kSilent.
  std::vector<int> labels;
  int num_groups = 0;
};

// Groups channels by the phase of their spikes near the end of a run:
// T is the median inter-spike interval over all channels, channels without
// a spike in the last 2T are silent, and the rest are chained by their
// latest spike time with a break wherever consecutive times differ by
// 0.1 T or more. Group ids are dense and ordered by latest spike time.
PhaseGrouping GroupByPhase(const std::vector<std::vector<double>>& spikes,
                           double end_time, double fallback_period);

struct FrameResult {
  SpikeRecord spikes;
  PhaseGrouping grouping;
  // Second-layer drive theta(j) at the end of the frame.
  std::vector<double> layer2_drive;
  // Median second-layer ISI used for grouping.
  double period = 0.0;
};

struct SimulationOptions {
  ExecPolicy policy = ExecPolicy::kParallel;
  bool record_layer1 = false;
};

// Two-layer network on one map frame: a kNumMapBins x kNumChannels grid of
// locally coupled oscillators with a global controller, feeding a fully
// connected layer of kNumChannels oscillators with its own controller.
// Both layers are integrated with synchronous Euler steps.
FrameResult SimulateFrame(const MapFrame& frame, const NetParams& params,
                          const SimulationOptions& options = {});

// Straightforward serial implementation assembled from the per-equation
// functions in oscillator.h. Slow; kept as the reference SimulateFrame is
// tested against.
FrameResult SimulateFrameReference(const MapFrame& frame, const NetParams& params,
                                   bool record_layer1 = false);

}  // namespace spikesep

#endif  // SPIKESEP_NETWORK_H_
