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
#include <string>
#include <vector>

#include "hybd/baseband_bd.hpp"
#include "hybd/channel.hpp"

namespace hybd {

// Spectral efficiencies in bits/s/Hz. `regularized` is set when an
// interference-plus-noise covariance was near singular and a trace-scaled
// ridge had to be added.
struct RateReport {
    std::vector<double> per_user_rate;
    double sum_rate = 0.0;
    std::string scheme_label;
    double snr_db = 0.0;
    bool regularized = false;
};

// Per-user effective channels W_k^H H_k F seen at baseband (raw H_k for the
// identity-role baseline).
std::vector<arma::cx_mat> effective_user_blocks(const MultiUserChannel& channel,
                                                const HybridDesign& design);

// Exact sum rate: rate_k = log2 det(I + R_i^{-1} * (P/(K N_S)) *
// M_k^H H~_k B_k B_k^H H~_k^H M_k) with R_i the interference-plus-noise
// covariance; sigma^2 = 1 and P = snr (linear).
RateReport sum_rate_general(const MultiUserChannel& channel, const HybridDesign& design,
                            double snr, const std::string& label = "");

// Same computation with the effective blocks W_k^H H_k F precomputed (they
// do not depend on the SNR, so sweeps reuse them across the grid).
RateReport sum_rate_general_blocks(const std::vector<arma::cx_mat>& blocks,
                                   const HybridDesign& design, double snr,
                                   const std::string& label = "");

// BD closed form: per user sum_i log2(1 + (P/(K N_S)) * lambda_{k,i} *
// (power_scale * sigma_{k,i})^2). Matches sum_rate_general whenever the
// design nulls inter-user interference exactly.
RateReport sum_rate_bd_closed_form(const EffectiveSubchannels& subchannels,
                                   const AllocationResult& allocation, double snr,
                                   const SystemConfig& config, double power_scale = 1.0,
                                   const std::string& label = "");

// Large-array single-path approximation: water-fills over gamma_k =
// (P/K) * N_BS * N_MS * |alpha_k|^2 and sums log2(1 + gamma_k lambda_k).
RateReport approx_rate_single_path(const std::vector<std::complex<double>>& alphas,
                                   arma::uword n_bs, arma::uword n_ms, double snr,
                                   const std::vector<double>& weights,
                                   const std::string& label = "");

// Worst-case inter-user leakage of a design, relative to the in-link gain:
// max over users of max_{i != k} ||M_i^H H~_i B_k||_F / ||M_k^H H~_k B_k||_F.
double nulling_residual(const MultiUserChannel& channel, const HybridDesign& design);
double nulling_residual_blocks(const std::vector<arma::cx_mat>& blocks,
                               const HybridDesign& design);

} // namespace hybd
