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

#include "spikesep/network.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spikesep {
namespace {

constexpr int kLayer1Size = kNumChannels * kNumMapBins;
constexpr std::uint64_t kInitStream = 0xA5A5A5A5ull;

std::uint64_t StreamId(int frame_index, int layer) {
  return (static_cast<std::uint64_t>(frame_index) << 2) | static_cast<std::uint64_t>(layer);
}

// Uniform [0, 0.1) initial states from the noise hash, so initialization
// is also independent of thread count.
void InitStates(std::vector<double>& x, std::vector<double>& y,
                const NetParams& params, int frame_index, int layer) {
  const NoiseStream rng(params.seed, kInitStream + StreamId(frame_index, layer));
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] = 0.1 * rng.Uniform(2 * n);
    y[n] = 0.1 * rng.Uniform(2 * n + 1);
  }
}

void CheckDivergence(bool diverged, int layer, double t) {
  if (diverged) {
    throw DivergenceError("layer " + std::to_string(layer) +
                          " oscillator exceeded |x| > 10 at t = " +
                          std::to_string(t) + "; reduce dt");
  }
}

// Windowed average of the second-layer input. Products are summed over
// blocks of `block_steps` steps; the drive is the mean over the most recent
// `window_blocks` complete blocks and changes only at block boundaries.
class DriveAverager {
 public:
  DriveAverager(const NetParams& params)
      : block_steps_(std::max(1, static_cast<int>(std::lround(1.0 / params.dt)))),
        window_blocks_(std::max(
            1, static_cast<int>(std::lround(params.averaging_window /
                                            (block_steps_ * params.dt))))),
        ring_(static_cast<std::size_t>(window_blocks_) * kNumChannels, 0.0),
        current_(kNumChannels, 0.0),
        drive_(kNumChannels, 0.0) {}

  void Add(int channel, double product) { current_[channel] += product; }

  // Call after every step; returns true when the drive changed.
  bool EndStep() {
    if (++step_in_block_ < block_steps_) return false;
    step_in_block_ = 0;
    std::copy(current_.begin(), current_.end(),
              ring_.begin() + static_cast<std::ptrdiff_t>(head_) * kNumChannels);
    std::fill(current_.begin(), current_.end(), 0.0);
    head_ = (head_ + 1) % window_blocks_;
    filled_ = std::min(filled_ + 1, window_blocks_);
    const double denom = static_cast<double>(filled_) * block_steps_;
    for (int j = 0; j < kNumChannels; ++j) {
      double acc = 0.0;
      for (int b = 0; b < filled_; ++b) {
        acc += ring_[static_cast<std::size_t>(b) * kNumChannels + j];
      }
      drive_[j] = acc / denom;
    }
    return true;
  }

  const std::vector<double>& drive() const { return drive_; }

 private:
  int block_steps_;
  int window_blocks_;
  std::vector<double> ring_;
  std::vector<double> current_;
  std::vector<double> drive_;
  int head_ = 0;
  int filled_ = 0;
  int step_in_block_ = 0;
};

bool FrameIsSilent(const MapFrame& frame) {
  return std::all_of(frame.values.values.begin(), frame.values.values.end(),
                     [](double v) { return v == 0.0; });
}

FrameResult SilentResult(bool record_layer1) {
  FrameResult r;
  r.spikes.layer2.assign(kNumChannels, {});
  if (record_layer1) r.spikes.layer1.assign(kLayer1Size, {});
  r.grouping.labels.assign(kNumChannels, PhaseGrouping::kSilent);
  r.layer2_drive.assign(kNumChannels, 0.0);
  return r;
}

// Column gate: the second layer only receives a product while at least one
// first-layer neuron of the column is above zero.
bool ColumnActive(std::span<const double> column) {
  return std::any_of(column.begin(), column.end(), [](double v) { return v > 0.0; });
}

void Finish(FrameResult& result, const NetParams& params) {
  const double end_time = params.steps_per_frame * params.dt;
  result.grouping = GroupByPhase(result.spikes.layer2, end_time,
                                 ReferencePeriod(0.2, params));
  std::vector<double> isis;
  for (const auto& s : result.spikes.layer2) {
    for (std::size_t k = 1; k < s.size(); ++k) isis.push_back(s[k] - s[k - 1]);
  }
  if (!isis.empty()) {
    std::nth_element(isis.begin(), isis.begin() + isis.size() / 2, isis.end());
    result.period = isis[isis.size() / 2];
  }
}

}  // namespace

void EulerStep(std::span<OscillatorState> states, std::span<const double> inputs,
               std::span<const double> couplings, const NetParams& params,
               std::uint64_t stream, std::uint64_t step) {
  const std::size_t n = states.size();
  if (inputs.size() != n || couplings.size() != n) {
    throw ConfigError("EulerStep: inconsistent sizes");
  }
  const NoiseStream rng(params.seed, stream);
  std::vector<Derivatives> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = params.noise ? params.rho * rng.Gaussian(step * n + i) : 0.0;
    d[i] = OscillatorDerivatives(states[i], inputs[i], couplings[i], noise, params);
  }
  bool diverged = false;
  for (std::size_t i = 0; i < n; ++i) {
    states[i].x += params.dt * d[i].dx;
    states[i].y += params.dt * d[i].dy;
    diverged |= !(std::abs(states[i].x) <= kDivergenceLimit);
  }
  CheckDivergence(diverged, 0, (step + 1) * params.dt);
}

std::vector<double> SingleOscillatorSpikes(double p, double duration,
                                           const NetParams& params) {
  NetParams quiet = params;
  quiet.noise = false;
  OscillatorState s;
  std::vector<double> spikes;
  const long steps = static_cast<long>(std::ceil(duration / quiet.dt));
  for (long k = 0; k < steps; ++k) {
    const double before = s.x;
    const Derivatives d = OscillatorDerivatives(s, p, 0.0, 0.0, quiet);
    s.x += quiet.dt * d.dx;
    s.y += quiet.dt * d.dy;
    if (SpikeDetector::Crossed(before, s.x)) {
      spikes.push_back(SpikeDetector::Time(k * quiet.dt, quiet.dt, before, s.x));
    }
  }
  return spikes;
}

double ReferencePeriod(double p, const NetParams& params) {
  const auto spikes = SingleOscillatorSpikes(p, 2000.0, params);
  if (spikes.size() < 3) return 0.0;
  std::vector<double> isis;
  for (std::size_t k = 2; k < spikes.size(); ++k) isis.push_back(spikes[k] - spikes[k - 1]);
  std::nth_element(isis.begin(), isis.begin() + isis.size() / 2, isis.end());
  return isis[isis.size() / 2];
}

std::vector<std::vector<double>> SimulateAssembly(const Assembly& assembly,
                                                  const NetParams& params, long steps) {
  params.Validate();
  const std::size_t n = assembly.inputs.size();
  if (assembly.weights.size() != n * n || assembly.initial.size() != n) {
    throw ConfigError("SimulateAssembly: inconsistent sizes");
  }
  std::vector<OscillatorState> states = assembly.initial;
  std::vector<double> couplings(n);
  std::vector<std::vector<double>> spikes(n);
  ControllerState ctrl;
  for (long step = 0; step < steps; ++step) {
    double active = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += assembly.weights[j * n + k] * Heaviside(states[k].x);
      }
      couplings[j] = acc - params.eta * ctrl.G;
      active += Heaviside(states[j].x);
    }
    std::vector<OscillatorState> before = states;
    EulerStep(states, assembly.inputs, couplings, params, 0,
              static_cast<std::uint64_t>(step));
    if (assembly.controller) {
      ctrl = ControllerStep(ctrl, active / static_cast<double>(n), params, params.dt);
    }
    const double t = static_cast<double>(step) * params.dt;
    for (std::size_t j = 0; j < n; ++j) {
      if (SpikeDetector::Crossed(before[j].x, states[j].x)) {
        spikes[j].push_back(SpikeDetector::Time(t, params.dt, before[j].x, states[j].x));
      }
    }
  }
  return spikes;
}

PhaseGrouping GroupByPhase(const std::vector<std::vector<double>>& spikes,
                           double end_time, double fallback_period) {
  PhaseGrouping g;
  g.labels.assign(spikes.size(), PhaseGrouping::kSilent);

  std::vector<double> isis;
  for (const auto& s : spikes) {
    for (std::size_t k = 1; k < s.size(); ++k) isis.push_back(s[k] - s[k - 1]);
  }
  double period = fallback_period;
  if (!isis.empty()) {
    std::nth_element(isis.begin(), isis.begin() + isis.size() / 2, isis.end());
    period = isis[isis.size() / 2];
  }
  if (!(period > 0.0)) return g;

  std::vector<std::pair<double, int>> latest;
  for (std::size_t c = 0; c < spikes.size(); ++c) {
    if (spikes[c].empty()) continue;
    const double t = spikes[c].back();
    if (t < end_time - 2.0 * period) continue;
    latest.emplace_back(t, static_cast<int>(c));
  }
  std::sort(latest.begin(), latest.end());
  for (std::size_t k = 0; k < latest.size(); ++k) {
    if (k == 0 || latest[k].first - latest[k - 1].first >= 0.1 * period) {
      ++g.num_groups;
    }
    g.labels[latest[k].second] = g.num_groups - 1;
  }
  return g;
}

FrameResult SimulateFrame(const MapFrame& frame, const NetParams& params,
                          const SimulationOptions& options) {
  params.Validate();
  if (FrameIsSilent(frame)) return SilentResult(options.record_layer1);

  const bool parallel = options.policy == ExecPolicy::kParallel;
  const double dt = params.dt;
  const double kappa = params.kappa();
  const double eta = params.eta;
  const Layer1Weights weights = ComputeLayer1Weights(frame, params);

  std::vector<double> x1(kLayer1Size), y1(kLayer1Size);
  std::vector<double> x1n(kLayer1Size), y1n(kLayer1Size);
  std::vector<double> p1(kLayer1Size);
  for (int j = 0; j < kNumChannels; ++j) {
    for (int i = 0; i < kNumMapBins; ++i) p1[NeuronIndex(i, j)] = frame.p(j, i);
  }
  std::vector<double> x2(kNumChannels), y2(kNumChannels);
  std::vector<double> x2n(kNumChannels), y2n(kNumChannels);
  InitStates(x1, y1, params, frame.frame_index, 1);
  InitStates(x2, y2, params, frame.frame_index, 2);
  ControllerState ctrl1, ctrl2;

  DriveAverager averager(params);
  std::vector<double> w2 = ComputeLayer2Weights(averager.drive(), params);
  std::vector<double> products(kNumChannels);
  // Per bin, the long-range source channels currently above zero.
  std::vector<int> firing(kNumMapBins * kLongRangeSources);
  std::vector<int> num_firing(kNumMapBins, 0);
  std::vector<int> active2;
  active2.reserve(kNumChannels);

  FrameResult result;
  result.spikes.layer2.assign(kNumChannels, {});
  if (options.record_layer1) result.spikes.layer1.assign(kLayer1Size, {});

  const NoiseStream noise1(params.seed, StreamId(frame.frame_index, 1));
  const NoiseStream noise2(params.seed, StreamId(frame.frame_index, 2));
  const double rho = params.noise ? params.rho : 0.0;

  for (int step = 0; step < params.steps_per_frame; ++step) {
    const double t = step * dt;
    const double g1 = ctrl1.G;
    const double g2 = ctrl2.G;
    const std::uint64_t counter1 = static_cast<std::uint64_t>(step) * kLayer1Size;
    long active1 = 0;
    bool diverged1 = false;
    if (kappa != 0.0) {
      for (int i = 0; i < kNumMapBins; ++i) {
        int count = 0;
        for (int k = 0; k < kLongRangeSources; ++k) {
          if (x1[NeuronIndex(i, kLongRangeFirstSource + k)] > 0.0) {
            firing[i * kLongRangeSources + count++] = k;
          }
        }
        num_firing[i] = count;
      }
    }

#pragma omp parallel for schedule(static) reduction(+ : active1) \
    reduction(|| : diverged1) if (parallel)
    for (int j = 0; j < kNumChannels; ++j) {
      const double* col = x1.data() + j * kNumMapBins;
      const double* below = j > 0 ? col - kNumMapBins : nullptr;
      const double* above = j + 1 < kNumChannels ? col + kNumMapBins : nullptr;
      for (int i = 0; i < kNumMapBins; ++i) {
        const int n = j * kNumMapBins + i;
        const auto& w = weights.local[n];
        double acc = 0.0;
        if (i > 0) acc += w[kBinBelow] * (col[i - 1] > 0.0 ? 1.0 : 0.0);
        if (i + 1 < kNumMapBins) acc += w[kBinAbove] * (col[i + 1] > 0.0 ? 1.0 : 0.0);
        if (below) acc += w[kChannelBelow] * (below[i] > 0.0 ? 1.0 : 0.0);
        if (above) acc += w[kChannelAbove] * (above[i] > 0.0 ? 1.0 : 0.0);
        double L = 0.0;
        if (j < kLongRangeTargets) {
          const double* lw = weights.long_range.data() +
                             static_cast<std::size_t>(n) * kLongRangeSources;
          // Skipped sources would only add +0.0, so the sum is unchanged.
          const int* src = firing.data() + i * kLongRangeSources;
          for (int k = 0; k < num_firing[i]; ++k) L += lw[src[k]];
        }
        const double S = acc - eta * g1 + kappa * L;
        const double noise =
            params.noise ? rho * noise1.Gaussian(counter1 + n) : 0.0;
        const double x = col[i];
        const double y = y1[n];
        const double dx = 3.0 * x - x * x * x + 2.0 - y + noise + p1[n] + S;
        const double dy =
            params.epsilon * (params.gamma * ActivationGain(x, params.beta) - y);
        const double xn = x + dt * dx;
        x1n[n] = xn;
        y1n[n] = y + dt * dy;
        active1 += x > 0.0;
        diverged1 = diverged1 || !(std::abs(xn) <= kDivergenceLimit);
      }
    }
    CheckDivergence(diverged1, 1, t + dt);

    // Second layer, on the same snapshot.
    for (int j = 0; j < kNumChannels; ++j) {
      std::span<const double> column(x1.data() + j * kNumMapBins, kNumMapBins);
      products[j] = ColumnActive(column) ? ColumnProduct(column, params) : 0.0;
    }
    active2.clear();
    for (int k = 0; k < kNumChannels; ++k) {
      if (x2[k] > 0.0) active2.push_back(k);
    }
    const std::vector<double>& drive = averager.drive();
    bool diverged2 = false;
    for (int j = 0; j < kNumChannels; ++j) {
      const double* wrow = w2.data() + static_cast<std::size_t>(j) * kNumChannels;
      double acc = 0.0;
      for (int k : active2) acc += wrow[k];
      const double S = acc - eta * g2;
      const double noise =
          params.noise
              ? rho * noise2.Gaussian(static_cast<std::uint64_t>(step) * kNumChannels + j)
              : 0.0;
      const double x = x2[j];
      const double y = y2[j];
      const double dx = 3.0 * x - x * x * x + 2.0 - y + noise + drive[j] + S;
      const double dy =
          params.epsilon * (params.gamma * ActivationGain(x, params.beta) - y);
      x2n[j] = x + dt * dx;
      y2n[j] = y + dt * dy;
      diverged2 = diverged2 || !(std::abs(x2n[j]) <= kDivergenceLimit);
    }
    CheckDivergence(diverged2, 2, t + dt);

    ctrl1 = ControllerStep(ctrl1, static_cast<double>(active1) / kLayer1Size, params, dt);
    ctrl2 = ControllerStep(ctrl2, static_cast<double>(active2.size()) / kNumChannels,
                           params, dt);

    for (int j = 0; j < kNumChannels; ++j) {
      if (SpikeDetector::Crossed(x2[j], x2n[j])) {
        result.spikes.layer2[j].push_back(SpikeDetector::Time(t, dt, x2[j], x2n[j]));
      }
    }
    if (options.record_layer1) {
      for (int n = 0; n < kLayer1Size; ++n) {
        if (SpikeDetector::Crossed(x1[n], x1n[n])) {
          result.spikes.layer1[n].push_back(SpikeDetector::Time(t, dt, x1[n], x1n[n]));
        }
      }
    }
    x1.swap(x1n);
    y1.swap(y1n);
    x2.swap(x2n);
    y2.swap(y2n);

    for (int j = 0; j < kNumChannels; ++j) averager.Add(j, products[j]);
    if (averager.EndStep()) w2 = ComputeLayer2Weights(averager.drive(), params);
  }

  result.layer2_drive = averager.drive();
  Finish(result, params);
  return result;
}

FrameResult SimulateFrameReference(const MapFrame& frame, const NetParams& params,
                                   bool record_layer1) {
  params.Validate();
  if (FrameIsSilent(frame)) return SilentResult(record_layer1);

  const Layer1Weights weights = ComputeLayer1Weights(frame, params);
  std::vector<double> x1(kLayer1Size), y1(kLayer1Size);
  std::vector<double> x2(kNumChannels), y2(kNumChannels);
  InitStates(x1, y1, params, frame.frame_index, 1);
  InitStates(x2, y2, params, frame.frame_index, 2);
  std::vector<OscillatorState> layer1(kLayer1Size), layer2(kNumChannels);
  for (int n = 0; n < kLayer1Size; ++n) layer1[n] = {x1[n], y1[n]};
  for (int j = 0; j < kNumChannels; ++j) layer2[j] = {x2[j], y2[j]};

  std::vector<double> p1(kLayer1Size);
  for (int j = 0; j < kNumChannels; ++j) {
    for (int i = 0; i < kNumMapBins; ++i) p1[NeuronIndex(i, j)] = frame.p(j, i);
  }

  ControllerState ctrl1, ctrl2;
  DriveAverager averager(params);
  std::vector<double> w2 = ComputeLayer2Weights(averager.drive(), params);

  FrameResult result;
  result.spikes.layer2.assign(kNumChannels, {});
  if (record_layer1) result.spikes.layer1.assign(kLayer1Size, {});

  std::vector<double> S1(kLayer1Size), S2(kNumChannels), xs(kLayer1Size);
  for (int step = 0; step < params.steps_per_frame; ++step) {
    const double t = step * params.dt;
    for (int n = 0; n < kLayer1Size; ++n) xs[n] = layer1[n].x;

    double active1 = 0.0;
    for (int j = 0; j < kNumChannels; ++j) {
      for (int i = 0; i < kNumMapBins; ++i) {
        const double L = LongRangeCoupling(xs, weights, i, j);
        S1[NeuronIndex(i, j)] = Layer1Coupling(xs, weights, ctrl1.G, L, params, i, j);
        active1 += Heaviside(xs[NeuronIndex(i, j)]);
      }
    }
    double active2 = 0.0;
    for (int j = 0; j < kNumChannels; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kNumChannels; ++k) {
        if (Heaviside(layer2[k].x) > 0.0) acc += w2[static_cast<std::size_t>(j) * kNumChannels + k];
      }
      S2[j] = acc - params.eta * ctrl2.G;
      active2 += Heaviside(layer2[j].x);
    }
    std::vector<double> products(kNumChannels);
    for (int j = 0; j < kNumChannels; ++j) {
      std::span<const double> column(xs.data() + j * kNumMapBins, kNumMapBins);
      products[j] = ColumnActive(column) ? ColumnProduct(column, params) : 0.0;
    }

    std::vector<OscillatorState> before2 = layer2;
    try {
      EulerStep(layer1, p1, S1, params, StreamId(frame.frame_index, 1), step);
    } catch (const DivergenceError&) {
      CheckDivergence(true, 1, t + params.dt);
    }
    try {
      EulerStep(layer2, averager.drive(), S2, params, StreamId(frame.frame_index, 2), step);
    } catch (const DivergenceError&) {
      CheckDivergence(true, 2, t + params.dt);
    }
    ctrl1 = ControllerStep(ctrl1, active1 / kLayer1Size, params, params.dt);
    ctrl2 = ControllerStep(ctrl2, active2 / kNumChannels, params, params.dt);

    for (int j = 0; j < kNumChannels; ++j) {
      if (SpikeDetector::Crossed(before2[j].x, layer2[j].x)) {
        result.spikes.layer2[j].push_back(
            SpikeDetector::Time(t, params.dt, before2[j].x, layer2[j].x));
      }
    }
    if (record_layer1) {
      for (int n = 0; n < kLayer1Size; ++n) {
        if (SpikeDetector::Crossed(xs[n], layer1[n].x)) {
          result.spikes.layer1[n].push_back(
              SpikeDetector::Time(t, params.dt, xs[n], layer1[n].x));
        }
      }
    }
    for (int j = 0; j < kNumChannels; ++j) averager.Add(j, products[j]);
    if (averager.EndStep()) w2 = ComputeLayer2Weights(averager.drive(), params);
  }

  result.layer2_drive = averager.drive();
  Finish(result, params);
  return result;
}

}  // namespace spikesep
