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

#ifndef SPIKESEP_FFT_H_
#define SPIKESEP_FFT_H_

#include <complex>
#include <span>

namespace spikesep {

// Real-input forward DFT of fixed size, backed by FFTW. Forward() is
// const and safe to call concurrently from several threads.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }

  // in.size() == size(), out.size() == size() / 2 + 1.
  // out[k] = sum_n in[n] exp(-2 pi i k n / size).
  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;

 private:
  int size_;
  void* plan_;
};

}  // namespace spikesep

#endif  // SPIKESEP_FFT_H_
