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

#ifndef SPIKESEP_COMMON_H_
#define SPIKESEP_COMMON_H_

#include <stdexcept>
#include <string>

namespace spikesep {

// Working sample rate of everything downstream of ingestion.
inline constexpr int kWorkingRate = 8000;
inline constexpr int kNumChannels = 256;
// Frequency bins per channel in a map frame (after pooling).
inline constexpr int kNumMapBins = 50;

inline constexpr double kPi = 3.14159265358979323846;

// Kernels that have an OpenMP implementation also keep the plain loop
// around. Both must give bit-identical results.
enum class ExecPolicy { kSerial, kParallel };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File missing, unreadable, unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

// Readable file with content we do not handle.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Bad argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Oscillator state blew up during integration (bad dt or parameters).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace spikesep

#endif  // SPIKESEP_COMMON_H_
