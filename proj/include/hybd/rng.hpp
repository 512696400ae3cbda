// SPDX-License-Identifier: Apache-2.0
//
// hybd - hybrid block diagonalization for massive multiuser MIMO downlinks
// Copyright (C) 2026 The hybd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace hybd {

// SplitMix64 finalizer (Vigna). Bijective mixer over 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and up to three
// counters (trial index, purpose tag, user index, ...). Distinct key tuples
// give statistically independent streams, so work units can be distributed
// across threads without any shared RNG state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Purpose tags for per-trial stream derivation.
enum : std::uint64_t {
    kSeedBeta = 1,    // large-scale fading draws
    kSeedChannel = 2, // channel matrix entries / path parameters
};

// Deterministic random stream. Every draw is a fully specified transform of
// mt19937_64 output, so sequences are bit-identical across platforms and
// thread counts.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0, 1), 53-bit resolution
    double uniform();

    // uniform on [lo, hi)
    double uniform(double lo, double hi);

    // CN(0,1): real and imaginary parts independent N(0, 1/2)
    std::complex<double> complex_gaussian();

  private:
    std::mt19937_64 engine_;
};

} // namespace hybd
