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

#include <vector>

#include <armadillo>

namespace hybd {

// Per-stream effective SNR gains gamma_n = (P / (sigma^2 K N_S)) * sigma_n^2
// in user order (user k occupies entries k*N_S .. (k+1)*N_S - 1).
struct StreamGains {
    arma::vec gamma;
};

// Solution of the weighted water-filling problem: per-stream power loads
// lambda_n with sum(lambda) = budget, the water-level multiplier v, and the
// per-stream expanded weights w~_n.
struct AllocationResult {
    arma::vec lambda;
    double water_level_multiplier = 0.0;
    arma::vec weights_expanded;
};

// Proportional water-filling: lambda_n = max{w~_n / v - 1/gamma_n, 0} with v
// chosen by bisection (then an exact active-set polish) so that
// sum(lambda) = budget. `weights` has one entry per user and is expanded by
// repeating each weight gains.size()/weights.size() times. Streams with
// gamma_n = 0 are shut off before solving; throws no_usable_streams when
// every gain is zero.
AllocationResult proportional_waterfill(const StreamGains& gains,
                                        const std::vector<double>& weights,
                                        double budget);

// proportional_waterfill with unit weights.
AllocationResult waterfill(const StreamGains& gains, double budget);

// Max KKT violation of a candidate allocation: stationarity residual on
// active streams, budget mismatch, primal negativity, and dual feasibility
// on shut-off streams. Zero iff the allocation is optimal.
double kkt_residual(const AllocationResult& result, const StreamGains& gains,
                    double budget);

} // namespace hybd
