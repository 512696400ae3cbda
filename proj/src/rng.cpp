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

#include "hybd/rng.hpp"

#include <cmath>

namespace hybd {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ mix64(a ^ 0xbb67ae8584caa73bULL));
    h = mix64(h ^ mix64(b ^ 0x3c6ef372fe94f82bULL));
    h = mix64(h ^ mix64(c ^ 0xa54ff53a5f1d36f1ULL));
    return h;
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

std::complex<double> RngStream::complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    // |z|^2 ~ Exp(1), phase uniform; -log1p(-u1) maps [0,1) to (0, inf)
    const double r = std::sqrt(-std::log1p(-u1));
    const double ph = 2.0 * M_PI * u2;
    return {r * std::cos(ph), r * std::sin(ph)};
}

} // namespace hybd
