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

#include <cstdint>
#include <string>
#include <vector>

#include "hybd/baseband_bd.hpp"
#include "hybd/channel.hpp"

namespace hybd {

// One named invariant with its observed residual and tolerance.
struct InvariantCheck {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

InvariantCheck make_check(const std::string& name, double residual, double tolerance);

// Post-assembly inter-user leakage of a concrete design (exposed separately
// so tests can corrupt a design and watch this invariant fail by name).
InvariantCheck check_design_nulling(const MultiUserChannel& channel,
                                    const HybridDesign& design,
                                    const std::string& label);

// Randomized end-to-end invariant sweep over every module; deterministic in
// `seed`. Covers array responses, codebooks, RF-stage constraints, null
// spaces, design assembly, water-filling, rate formulas, and channel
// statistics (>= 12 named checks).
std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed);

} // namespace hybd
