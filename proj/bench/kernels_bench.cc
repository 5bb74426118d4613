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


// Serial loop versus OpenMP kernel for the three hot paths, on one second of
// the two-tone test mixture. Both policies give bit-identical output; only
// the time differs.

#include <cmath>
#include <vector>

#include "benchmark/benchmark.h"
#include "spikesep/audio.h"
#include "spikesep/common.h"
#include "spikesep/filterbank.h"
#include "spikesep/maps.h"
#include "spikesep/network.h"

namespace spikesep {
namespace {

AudioSignal Mixture() {
  AudioSignal s;
  s.sample_rate = kWorkingRate;
  s.samples.resize(kWorkingRate);
  for (int n = 0; n < kWorkingRate; ++n) {
    const double t = static_cast<double>(n) / kWorkingRate;
    s.samples[n] = 0.3 * std::sin(2 * kPi * 1000 * t) * (1 + 0.5 * std::sin(2 * kPi * 100 * t)) +
                   0.3 * std::sin(2 * kPi * 2500 * t) * (1 + 0.5 * std::sin(2 * kPi * 170 * t));
  }
  return s;
}

ExecPolicy PolicyArg(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::kSerial : ExecPolicy::kParallel;
}

const Filterbank& Bank() {
  static const Filterbank* bank = new Filterbank();
  return *bank;
}

const ChannelSignals& Analyzed() {
  static const ChannelSignals* analyzed =
      new ChannelSignals(Bank().Analyze(Mixture(), ExecPolicy::kParallel));
  return *analyzed;
}

void BM_Analyze(benchmark::State& state) {
  const AudioSignal x = Mixture();
  for (auto _ : state) benchmark::DoNotOptimize(Bank().Analyze(x, PolicyArg(state)));
}
BENCHMARK(BM_Analyze)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(Bank().Synthesize(Analyzed(), PolicyArg(state)));
  }
}
BENCHMARK(BM_Synthesize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildMaps(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BuildMaps(Analyzed(), MapKind::kCam, FrameSpec{}, PolicyArg(state)));
  }
}
BENCHMARK(BM_BuildMaps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// One frame of the network, shortened to 1000 steps.
void BM_SimulateFrame(benchmark::State& state) {
  static const std::vector<MapFrame> maps =
      BuildMaps(Analyzed(), MapKind::kCam, FrameSpec{}, ExecPolicy::kParallel);
  NetParams params;
  params.steps_per_frame = 1000;
  const SimulationOptions options{PolicyArg(state), false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(SimulateFrame(maps[7], params, options));
  }
  state.counters["steps/s"] = benchmark::Counter(
      static_cast<double>(params.steps_per_frame) * state.iterations(),
      benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace spikesep

BENCHMARK_MAIN();
