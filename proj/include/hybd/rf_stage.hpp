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

#include "hybd/channel.hpp"

namespace hybd {

// Downlink dimensions and operating point. The general feasibility chain is
// N_S <= M_MS <= N_MS and K*N_S <= M_BS <= N_BS; the hybrid pipeline
// additionally requires M_BS = K*M_MS (square equivalent channel).
struct SystemConfig {
    arma::uword n_bs = 0;            // BS antennas N_BS
    arma::uword n_ms = 0;            // MS antennas N_MS
    arma::uword users = 0;           // K
    arma::uword streams_per_user = 0; // N_S
    arma::uword rf_chains_ms = 0;    // M_MS
    arma::uword rf_chains_bs = 0;    // M_BS
    double snr_db = 0.0;             // P/sigma^2 in dB (sigma^2 = 1)
    std::vector<double> weights;     // w_k, one per user

    double snr_linear() const;
    arma::uword total_streams() const { return users * streams_per_user; }
    void validate() const;           // throws std::invalid_argument
    bool hybrid_feasible() const { return rf_chains_bs == users * rf_chains_ms; }
};

// N_MS-point DFT basis; column q has element m = (1/sqrt(N)) exp(j2pi*q*m/N).
struct DftCodebook {
    arma::cx_mat columns; // N_MS x N_MS

    arma::uword size() const { return columns.n_cols; }
};

// Per-user RF combiner W_k: M_MS codebook columns plus the selected indices
// (the feedback payload), ordered by descending selection score.
struct RfCombiner {
    arma::cx_mat matrix;                    // N_MS x M_MS
    std::vector<arma::uword> selected_indices;
};

// Equal-gain-transmission RF precoder F with per-entry modulus 1/sqrt(N_BS).
struct RfPrecoder {
    arma::cx_mat matrix; // N_BS x M_BS
    arma::mat phases;    // psi_{i,j}
};

// Baseband equivalent channel H_eq = H_int * F with its per-user row blocks
// and the aggregate intermediate channel H_int = stack of W_k^H H_k.
struct EquivalentChannel {
    arma::cx_mat full;                      // K*M_MS x M_BS
    std::vector<arma::cx_mat> per_user_blocks; // each M_MS x M_BS
    arma::cx_mat intermediate;              // K*M_MS x N_BS
};

DftCodebook build_dft_codebook(arma::uword n_ms);

// Pick the m_ms codebook columns maximizing score(q) = ||d_q^H H_k||_1.
// Indices are ordered by descending score; ties go to the lower index.
RfCombiner select_rf_combiner(const arma::cx_mat& h_k, const DftCodebook& codebook,
                              arma::uword m_ms);

// Row-stack of W_k^H H_k in user order; block k occupies rows
// k*M_MS .. (k+1)*M_MS - 1.
arma::cx_mat build_intermediate_channel(const MultiUserChannel& channel,
                                        const std::vector<RfCombiner>& combiners);

// F(i,j) = (1/sqrt(N_BS)) exp(j*arg(conj(H_int(j,i)))); a zero entry of
// H_int maps to phase 0.
RfPrecoder egt_precoder(const arma::cx_mat& h_int);

// H_eq = H_int * F, sliced into per-user blocks. Requires a square result
// (M_BS = K*M_MS); its diagonal entries equal the l1 norms of the H_int rows
// divided by sqrt(N_BS), real and nonnegative.
EquivalentChannel equivalent_channel(const arma::cx_mat& h_int, const RfPrecoder& f,
                                     const std::vector<RfCombiner>& combiners);

} // namespace hybd
