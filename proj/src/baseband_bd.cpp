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

#include "hybd/baseband_bd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hybd/errors.hpp"

namespace hybd {

namespace {

// Rotate the paired SVD columns (and any surplus basis columns) so the
// factorization is unique up to machine precision: A = U S V^H is preserved
// when a shared column pair is multiplied by the same unit phase.
void phase_fix_svd(arma::cx_mat& u, arma::cx_mat& v) {
    const arma::uword shared = std::min(u.n_rows, v.n_rows);
    for (arma::uword j = 0; j < u.n_cols; ++j) {
        const arma::uword i = arma::abs(u.col(j)).index_max();
        const std::complex<double> pivot = u(i, j);
        if (std::abs(pivot) == 0.0)
            continue;
        const std::complex<double> rot = std::conj(pivot) / std::abs(pivot);
        u.col(j) *= rot;
        if (j < shared && j < v.n_cols)
            v.col(j) *= rot;
    }
    for (arma::uword j = shared; j < v.n_cols; ++j) {
        const arma::uword i = arma::abs(v.col(j)).index_max();
        const std::complex<double> pivot = v(i, j);
        if (std::abs(pivot) == 0.0)
            continue;
        v.col(j) *= std::conj(pivot) / std::abs(pivot);
    }
}

arma::cx_mat scaled_precoder_block(const arma::cx_mat& null_basis,
                                   const arma::cx_mat& v_full,
                                   const arma::vec& lambda_user,
                                   arma::uword n_s) {
    arma::cx_mat block = null_basis * v_full.cols(0, n_s - 1);
    for (arma::uword i = 0; i < n_s; ++i)
        block.col(i) *= std::sqrt(lambda_user(i));
    return block;
}

RfCombiner identity_combiner(arma::uword n_ms) {
    RfCombiner w;
    w.matrix = arma::cx_mat(arma::eye<arma::mat>(n_ms, n_ms),
                            arma::zeros<arma::mat>(n_ms, n_ms));
    return w;
}

RfPrecoder identity_precoder(arma::uword n_bs) {
    RfPrecoder f;
    f.matrix = arma::cx_mat(arma::eye<arma::mat>(n_bs, n_bs),
                            arma::zeros<arma::mat>(n_bs, n_bs));
    f.phases = arma::zeros<arma::mat>(n_bs, n_bs);
    return f;
}

double apply_power_scale(arma::cx_mat& b, const arma::cx_mat& f_matrix, double target) {
    const double energy = arma::accu(arma::square(arma::abs(f_matrix * b)));
    if (!(energy > 0.0))
        throw design_infeasible("power normalization: F*B has zero Frobenius norm");
    const double scale = std::sqrt(target / energy);
    b *= scale;
    return scale;
}

} // namespace

void phase_fix_columns(arma::cx_mat& m) {
    for (arma::uword j = 0; j < m.n_cols; ++j) {
        const arma::uword i = arma::abs(m.col(j)).index_max();
        const std::complex<double> pivot = m(i, j);
        if (std::abs(pivot) == 0.0)
            continue;
        m.col(j) *= std::conj(pivot) / std::abs(pivot);
    }
}

arma::cx_mat complement_channel(const std::vector<arma::cx_mat>& blocks, arma::uword k) {
    if (blocks.empty() || k >= blocks.size())
        throw std::invalid_argument("complement_channel: user index out of range");
    arma::uword rows = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (i != k)
            rows += blocks[i].n_rows;
    arma::cx_mat h_bar(rows, blocks[k].n_cols);
    arma::uword at = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i == k)
            continue;
        if (blocks[i].n_cols != h_bar.n_cols)
            throw std::invalid_argument("complement_channel: blocks must share a column count");
        h_bar.rows(at, at + blocks[i].n_rows - 1) = blocks[i];
        at += blocks[i].n_rows;
    }
    return h_bar;
}

arma::cx_mat null_space_basis(const arma::cx_mat& h_bar) {
    const arma::uword cols = h_bar.n_cols;
    if (cols == 0)
        throw std::invalid_argument("null_space_basis: matrix has no columns");
    if (h_bar.n_rows == 0) {
        return arma::cx_mat(arma::eye<arma::mat>(cols, cols),
                            arma::zeros<arma::mat>(cols, cols));
    }

    arma::cx_mat u, v;
    arma::vec s;
    if (!arma::svd(u, s, v, h_bar))
        throw std::runtime_error("null_space_basis: SVD failed to converge");

    const double threshold = s.max() *
        static_cast<double>(std::max(h_bar.n_rows, h_bar.n_cols)) *
        std::numeric_limits<double>::epsilon();
    arma::uword rank = 0;
    for (arma::uword i = 0; i < s.n_elem; ++i)
        if (s(i) > threshold)
            ++rank;
    if (rank >= cols)
        throw design_infeasible(
            "null_space_basis: interference matrix has rank " + std::to_string(rank) +
            " and leaves no null space among " + std::to_string(cols) +
            " columns (need column count > interfering rank)");

    arma::cx_mat basis = v.cols(rank, cols - 1);
    phase_fix_columns(basis);
    return basis;
}

BdResult block_diagonalize_raw(const std::vector<arma::cx_mat>& blocks) {
    if (blocks.empty())
        throw std::invalid_argument("block_diagonalize_raw: no user blocks");
    BdResult bd;
    bd.null_bases.per_user.reserve(blocks.size());
    bd.effective.per_user.reserve(blocks.size());
    bd.effective.u.reserve(blocks.size());
    bd.effective.v.reserve(blocks.size());
    bd.effective.sigma.reserve(blocks.size());

    for (std::size_t k = 0; k < blocks.size(); ++k) {
        arma::cx_mat basis = null_space_basis(complement_channel(blocks, k));
        arma::cx_mat effective = blocks[k] * basis;

        arma::cx_mat u, v;
        arma::vec s;
        if (!arma::svd(u, s, v, effective))
            throw std::runtime_error("block_diagonalize_raw: SVD failed to converge");
        phase_fix_svd(u, v);

        bd.null_bases.per_user.push_back(std::move(basis));
        bd.effective.per_user.push_back(std::move(effective));
        bd.effective.u.push_back(std::move(u));
        bd.effective.v.push_back(std::move(v));
        bd.effective.sigma.push_back(std::move(s));
    }
    return bd;
}

BdResult block_diagonalize(const EquivalentChannel& eq) {
    if (eq.full.n_rows != eq.full.n_cols)
        throw std::invalid_argument(
            "block_diagonalize: equivalent channel must be square (M_BS = K*M_MS)");
    return block_diagonalize_raw(eq.per_user_blocks);
}

StreamGains stream_gains(const BdResult& bd, const SystemConfig& config) {
    config.validate();
    const arma::uword k_users = bd.effective.sigma.size();
    if (k_users != config.users)
        throw std::invalid_argument("stream_gains: BD result user count mismatch");
    const arma::uword n_s = config.streams_per_user;
    const double coeff = config.snr_linear() /
        static_cast<double>(config.users * config.streams_per_user);

    StreamGains gains;
    gains.gamma.set_size(k_users * n_s);
    for (arma::uword k = 0; k < k_users; ++k) {
        const arma::vec& sig = bd.effective.sigma[k];
        if (sig.n_elem < n_s)
            throw design_infeasible(
                "stream_gains: user " + std::to_string(k) + " subchannel supports only " +
                std::to_string(sig.n_elem) + " streams but N_S = " + std::to_string(n_s));
        for (arma::uword i = 0; i < n_s; ++i)
            gains.gamma(k * n_s + i) = coeff * sig(i) * sig(i);
    }
    return gains;
}

HybridDesign assemble_hybrid_design(const EquivalentChannel& eq, const BdResult& bd,
                                    const SystemConfig& config,
                                    const AllocationResult& allocation,
                                    const RfPrecoder& f,
                                    const std::vector<RfCombiner>& combiners) {
    config.validate();
    const arma::uword k_users = config.users;
    const arma::uword n_s = config.streams_per_user;
    if (n_s > config.rf_chains_ms)
        throw std::invalid_argument("assemble_hybrid_design: N_S must not exceed M_MS");
    if (allocation.lambda.n_elem != k_users * n_s)
        throw std::invalid_argument("assemble_hybrid_design: allocation must cover K*N_S streams");
    if (bd.null_bases.per_user.size() != k_users || combiners.size() != k_users)
        throw std::invalid_argument("assemble_hybrid_design: per-user structure mismatch");

    const arma::uword dim = eq.full.n_rows;
    HybridDesign design;
    design.rf_precoder = f;
    design.rf_combiners = combiners;
    design.baseband_precoder.set_size(dim, k_users * n_s);
    design.baseband_combiners.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k) {
        const arma::vec lambda_user =
            allocation.lambda.subvec(k * n_s, (k + 1) * n_s - 1);
        design.baseband_precoder.cols(k * n_s, (k + 1) * n_s - 1) = scaled_precoder_block(
            bd.null_bases.per_user[k], bd.effective.v[k], lambda_user, n_s);
        design.baseband_combiners.push_back(bd.effective.u[k].cols(0, n_s - 1));
    }
    design.power_scale = apply_power_scale(design.baseband_precoder, f.matrix,
                                           static_cast<double>(k_users * n_s));
    return design;
}

HybridDesign assemble_full_bd(const BdResult& bd, const SystemConfig& config,
                              const AllocationResult& allocation) {
    config.validate();
    const arma::uword k_users = config.users;
    const arma::uword n_s = config.streams_per_user;
    if (bd.null_bases.per_user.size() != k_users)
        throw std::invalid_argument("assemble_full_bd: BD result user count mismatch");
    if (allocation.lambda.n_elem != k_users * n_s)
        throw std::invalid_argument("assemble_full_bd: allocation must cover K*N_S streams");

    const arma::uword n_bs = bd.null_bases.per_user[0].n_rows;
    const arma::uword n_ms = bd.effective.u[0].n_rows;
    HybridDesign design;
    design.rf_precoder = identity_precoder(n_bs);
    design.rf_combiners.assign(k_users, identity_combiner(n_ms));
    design.baseband_precoder.set_size(n_bs, k_users * n_s);
    design.baseband_combiners.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k) {
        if (bd.effective.sigma[k].n_elem < n_s)
            throw design_infeasible(
                "assemble_full_bd: user " + std::to_string(k) + " subchannel supports only " +
                std::to_string(bd.effective.sigma[k].n_elem) + " streams but N_S = " +
                std::to_string(n_s));
        const arma::vec lambda_user =
            allocation.lambda.subvec(k * n_s, (k + 1) * n_s - 1);
        design.baseband_precoder.cols(k * n_s, (k + 1) * n_s - 1) = scaled_precoder_block(
            bd.null_bases.per_user[k], bd.effective.v[k], lambda_user, n_s);
        design.baseband_combiners.push_back(bd.effective.u[k].cols(0, n_s - 1));
    }
    // F is an identity here, so ||F*B||_F = ||B||_F.
    const double energy = arma::accu(arma::square(arma::abs(design.baseband_precoder)));
    if (!(energy > 0.0))
        throw design_infeasible("power normalization: baseband precoder has zero Frobenius norm");
    design.power_scale = std::sqrt(static_cast<double>(k_users * n_s) / energy);
    design.baseband_precoder *= design.power_scale;
    return design;
}

HybridDesign full_complexity_bd(const MultiUserChannel& channel,
                                const SystemConfig& config,
                                const AllocationResult& allocation) {
    config.validate();
    if (channel.users() != config.users || channel.n_bs() != config.n_bs ||
        channel.n_ms() != config.n_ms)
        throw std::invalid_argument("full_complexity_bd: channel/config dimension mismatch");
    if (config.n_bs <= (config.users - 1) * config.n_ms)
        throw design_infeasible(
            "full_complexity_bd: requires N_BS > (K-1)*N_MS, got N_BS = " +
            std::to_string(config.n_bs) + ", K = " + std::to_string(config.users) +
            ", N_MS = " + std::to_string(config.n_ms));
    const BdResult bd = block_diagonalize_raw(channel.per_user_matrix);
    return assemble_full_bd(bd, config, allocation);
}

} // namespace hybd
