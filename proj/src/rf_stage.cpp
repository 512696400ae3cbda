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

#include "hybd/rf_stage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hybd {

double SystemConfig::snr_linear() const {
    return std::pow(10.0, snr_db / 10.0);
}

void SystemConfig::validate() const {
    if (n_bs < 1 || n_ms < 1 || users < 1 || streams_per_user < 1 ||
        rf_chains_ms < 1 || rf_chains_bs < 1)
        throw std::invalid_argument("SystemConfig: all dimensions must be >= 1");
    if (streams_per_user > rf_chains_ms || rf_chains_ms > n_ms)
        throw std::invalid_argument("SystemConfig: need N_S <= M_MS <= N_MS");
    if (users * streams_per_user > rf_chains_bs || rf_chains_bs > n_bs)
        throw std::invalid_argument("SystemConfig: need K*N_S <= M_BS <= N_BS");
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("SystemConfig: snr_db must be finite");
    if (weights.size() != users)
        throw std::invalid_argument("SystemConfig: weights length must equal users");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("SystemConfig: weights must be positive");
}

DftCodebook build_dft_codebook(arma::uword n_ms) {
    if (n_ms < 1)
        throw std::invalid_argument("build_dft_codebook: n_ms must be >= 1");
    DftCodebook book;
    book.columns.set_size(n_ms, n_ms);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_ms));
    const double step = 2.0 * arma::datum::pi / static_cast<double>(n_ms);
    for (arma::uword q = 0; q < n_ms; ++q)
        for (arma::uword m = 0; m < n_ms; ++m)
            book.columns(m, q) = std::polar(scale, step * static_cast<double>(q * m));
    return book;
}

RfCombiner select_rf_combiner(const arma::cx_mat& h_k, const DftCodebook& codebook,
                              arma::uword m_ms) {
    const arma::uword n_ms = codebook.columns.n_rows;
    if (m_ms < 1 || m_ms > n_ms)
        throw std::invalid_argument("select_rf_combiner: need 1 <= m_ms <= N_MS");
    if (h_k.n_rows != n_ms)
        throw std::invalid_argument("select_rf_combiner: channel rows must equal N_MS");

    // score(q) = ||d_q^H H_k||_1, the entrywise l1 norm of the projected row.
    arma::vec scores(n_ms);
    for (arma::uword q = 0; q < n_ms; ++q) {
        const arma::cx_rowvec row = codebook.columns.col(q).t() * h_k;
        scores(q) = arma::accu(arma::abs(row));
    }

    std::vector<arma::uword> order(n_ms);
    std::iota(order.begin(), order.end(), arma::uword{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](arma::uword a, arma::uword b) { return scores(a) > scores(b); });

    RfCombiner combiner;
    combiner.selected_indices.assign(order.begin(), order.begin() + m_ms);
    combiner.matrix.set_size(n_ms, m_ms);
    for (arma::uword m = 0; m < m_ms; ++m)
        combiner.matrix.col(m) = codebook.columns.col(combiner.selected_indices[m]);
    return combiner;
}

arma::cx_mat build_intermediate_channel(const MultiUserChannel& channel,
                                        const std::vector<RfCombiner>& combiners) {
    const arma::uword k_users = channel.users();
    if (combiners.size() != k_users)
        throw std::invalid_argument("build_intermediate_channel: one combiner per user required");
    if (k_users == 0)
        throw std::invalid_argument("build_intermediate_channel: empty channel");
    const arma::uword m_ms = combiners[0].matrix.n_cols;
    const arma::uword n_bs = channel.n_bs();

    arma::cx_mat h_int(k_users * m_ms, n_bs);
    for (arma::uword k = 0; k < k_users; ++k) {
        const arma::cx_mat& w = combiners[k].matrix;
        const arma::cx_mat& h = channel.per_user_matrix[k];
        if (w.n_rows != h.n_rows || w.n_cols != m_ms)
            throw std::invalid_argument("build_intermediate_channel: combiner/channel dimension mismatch");
        h_int.rows(k * m_ms, (k + 1) * m_ms - 1) = w.t() * h;
    }
    return h_int;
}

RfPrecoder egt_precoder(const arma::cx_mat& h_int) {
    if (!h_int.is_finite())
        throw std::invalid_argument("egt_precoder: intermediate channel has non-finite entries");
    const arma::uword n_bs = h_int.n_cols;
    const arma::uword m_bs = h_int.n_rows;
    RfPrecoder f;
    f.phases.set_size(n_bs, m_bs);
    f.matrix.set_size(n_bs, m_bs);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_bs));
    for (arma::uword i = 0; i < n_bs; ++i) {
        for (arma::uword j = 0; j < m_bs; ++j) {
            // std::arg(0) = 0, which realizes the zero-entry convention.
            const double psi = std::arg(std::conj(h_int(j, i)));
            f.phases(i, j) = psi;
            f.matrix(i, j) = std::polar(scale, psi);
        }
    }
    return f;
}

EquivalentChannel equivalent_channel(const arma::cx_mat& h_int, const RfPrecoder& f,
                                     const std::vector<RfCombiner>& combiners) {
    if (f.matrix.n_rows != h_int.n_cols)
        throw std::invalid_argument("equivalent_channel: precoder rows must equal N_BS");
    if (f.matrix.n_cols != h_int.n_rows)
        throw std::invalid_argument("equivalent_channel: H_eq must be square (M_BS = K*M_MS)");
    if (combiners.empty() || h_int.n_rows % combiners.size() != 0)
        throw std::invalid_argument("equivalent_channel: rows must split evenly across users");

    EquivalentChannel eq;
    eq.intermediate = h_int;
    eq.full = h_int * f.matrix;
    const arma::uword k_users = combiners.size();
    const arma::uword m_ms = h_int.n_rows / k_users;
    eq.per_user_blocks.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k)
        eq.per_user_blocks.push_back(eq.full.rows(k * m_ms, (k + 1) * m_ms - 1));
    return eq;
}

} // namespace hybd
