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

#include "hybd/power_allocation.hpp"
#include "hybd/rf_stage.hpp"

namespace hybd {

// Orthonormal bases V~_k of null(H~_bar_k), one per user.
struct NullSpaceBasis {
    std::vector<arma::cx_mat> per_user;
};

// Per-user effective subchannels H~_k * V~_k with their SVD factors. The
// singular values are sorted descending; u/v column phases are fixed so the
// factorization is reproducible.
struct EffectiveSubchannels {
    std::vector<arma::cx_mat> per_user; // H~_k * V~_k
    std::vector<arma::cx_mat> u;        // left singular vectors (full)
    std::vector<arma::cx_mat> v;        // right singular vectors (full)
    std::vector<arma::vec> sigma;       // singular values, descending
};

// Output of the block-diagonalization step shared by both schemes.
struct BdResult {
    NullSpaceBasis null_bases;
    EffectiveSubchannels effective;
};

// Complete transceiver design. For the hybrid scheme F and W_k are the RF
// stage; for the full-complexity baseline they play an identity role.
// baseband_precoder stacks the per-user blocks B_k column-wise and already
// includes the water-filling loads and the global power_scale that enforces
// ||F*B||_F^2 = K*N_S.
struct HybridDesign {
    RfPrecoder rf_precoder;
    std::vector<RfCombiner> rf_combiners;
    arma::cx_mat baseband_precoder;             // rows x K*N_S
    std::vector<arma::cx_mat> baseband_combiners; // M_k, each cols = N_S
    double power_scale = 1.0;

    arma::cx_mat precoder_block(arma::uword k, arma::uword n_s) const {
        return baseband_precoder.cols(k * n_s, (k + 1) * n_s - 1);
    }
};

// Row-stack of all blocks except block k, preserving order. K = 1 yields a
// 0-row matrix.
arma::cx_mat complement_channel(const std::vector<arma::cx_mat>& blocks, arma::uword k);

// Orthonormal basis of the null space of h_bar: the right singular vectors
// past the numerical rank (threshold sigma_max * max(dim) * eps). A 0-row
// input returns the identity. Throws design_infeasible when the null space
// is empty. Column phases are fixed for reproducibility.
arma::cx_mat null_space_basis(const arma::cx_mat& h_bar);

// BD on the per-user blocks of the (square) equivalent channel.
BdResult block_diagonalize(const EquivalentChannel& eq);

// BD machinery on an arbitrary list of per-user channel blocks (used both
// for the equivalent channel and for the raw-channel baseline).
BdResult block_diagonalize_raw(const std::vector<arma::cx_mat>& blocks);

// Flattened per-stream gains gamma_n = (snr / (K*N_S)) * sigma_n^2 over the
// first N_S singular values of each user, user order.
StreamGains stream_gains(const BdResult& bd, const SystemConfig& config);

// Hybrid design: B_k = V~_k * V_k^(N_S) * diag(sqrt(lambda_k)), M_k =
// U_k^(N_S), then one global scalar enforces ||F*B||_F^2 = K*N_S.
HybridDesign assemble_hybrid_design(const EquivalentChannel& eq, const BdResult& bd,
                                    const SystemConfig& config,
                                    const AllocationResult& allocation,
                                    const RfPrecoder& f,
                                    const std::vector<RfCombiner>& combiners);

// Full-complexity baseline design from a BD of the raw channels; F and W_k
// are set to identities of the antenna dimensions.
HybridDesign assemble_full_bd(const BdResult& bd, const SystemConfig& config,
                              const AllocationResult& allocation);

// Convenience wrapper: BD the raw channels and assemble the baseline.
// Throws design_infeasible unless N_BS > (K-1)*N_MS.
HybridDesign full_complexity_bd(const MultiUserChannel& channel,
                                const SystemConfig& config,
                                const AllocationResult& allocation);

// Rotate each column so its largest-magnitude entry is real-positive.
void phase_fix_columns(arma::cx_mat& m);

} // namespace hybd
