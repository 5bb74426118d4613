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

#include "spikesep/fft.h"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "spikesep/common.h"

namespace spikesep {
namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int size) : size_(size), plan_(nullptr) {
  if (size <= 0) throw ConfigError("FFT size must be positive");
  std::vector<double> in(size);
  std::vector<std::complex<double>> out(size / 2 + 1);
  std::lock_guard<std::mutex> lock(PlannerMutex());
  plan_ = fftw_plan_dft_r2c_1d(size, in.data(),
                               reinterpret_cast<fftw_complex*>(out.data()),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != size_ ||
      static_cast<int>(out.size()) != size_ / 2 + 1) {
    throw ConfigError("RealFft::Forward: buffer size mismatch");
  }
  // r2c with FFTW_ESTIMATE does not write to its input for 1-D transforms.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_),
                       const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace spikesep
