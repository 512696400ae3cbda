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

#include "hybd/rate_evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hybd/power_allocation.hpp"

namespace hybd {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double snr_to_db(double snr) {
    return 10.0 * std::log10(snr);
}

// log(det(A)) of a Hermitian positive-definite matrix; on failure adds a
// trace-scaled ridge once and sets `regularized`.
double log_det_hpd(arma::cx_mat a, bool& regularized) {
    a = 0.5 * (a + a.t()); // remove rounding asymmetry
    double val = 0.0;
    if (arma::log_det_sympd(val, a))
        return val;
    regularized = true;
    double ridge = 1e-12 * std::abs(arma::trace(a).real()) /
                   static_cast<double>(a.n_rows);
    if (!(ridge > 0.0))
        ridge = 1e-12;
    a.diag() += ridge;
    if (arma::log_det_sympd(val, a))
        return val;
    throw std::runtime_error("rate evaluation: covariance matrix is not positive definite "
                             "even after ridge regularization");
}

void finalize(RateReport& report) {
    double total = 0.0;
    for (double r : report.per_user_rate)
        total += r;
    report.sum_rate = total;
}

} // namespace

std::vector<arma::cx_mat> effective_user_blocks(const MultiUserChannel& channel,
                                                const HybridDesign& design) {
    const arma::uword k_users = channel.users();
    if (design.rf_combiners.size() != k_users ||
        design.baseband_combiners.size() != k_users)
        throw std::invalid_argument("effective_user_blocks: design/channel user count mismatch");
    std::vector<arma::cx_mat> blocks;
    blocks.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k)
        blocks.push_back(design.rf_combiners[k].matrix.t() * channel.per_user_matrix[k] *
                         design.rf_precoder.matrix);
    return blocks;
}

RateReport sum_rate_general(const MultiUserChannel& channel, const HybridDesign& design,
                            double snr, const std::string& label) {
    return sum_rate_general_blocks(effective_user_blocks(channel, design), design, snr,
                                   label);
}

RateReport sum_rate_general_blocks(const std::vector<arma::cx_mat>& blocks,
                                   const HybridDesign& design, double snr,
                                   const std::string& label) {
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw std::invalid_argument("sum_rate_general: snr must be positive and finite");
    const arma::uword k_users = blocks.size();
    if (k_users == 0 || design.baseband_combiners.size() != k_users)
        throw std::invalid_argument("sum_rate_general: empty channel or design");
    const arma::uword n_s = design.baseband_combiners[0].n_cols;
    if (design.baseband_precoder.n_cols != k_users * n_s)
        throw std::invalid_argument("sum_rate_general: precoder must have K*N_S columns");

    const double coeff = snr / static_cast<double>(k_users * n_s);

    RateReport report;
    report.scheme_label = label;
    report.snr_db = snr_to_db(snr);
    report.per_user_rate.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k) {
        const arma::cx_mat& m_k = design.baseband_combiners[k];
        const arma::cx_mat a = m_k.t() * blocks[k]; // N_S x (precoder rows)
        const arma::cx_mat& w_k = design.rf_combiners[k].matrix;
        const arma::cx_mat wm = w_k * m_k;

        arma::cx_mat noise_interference = wm.t() * wm; // sigma^2 = 1
        arma::cx_mat signal(n_s, n_s, arma::fill::zeros);
        for (arma::uword i = 0; i < k_users; ++i) {
            const arma::cx_mat g = a * design.precoder_block(i, n_s);
            if (i == k)
                signal = coeff * (g * g.t());
            else
                noise_interference += coeff * (g * g.t());
        }

        const double ld_noise = log_det_hpd(noise_interference, report.regularized);
        const double ld_total = log_det_hpd(noise_interference + signal, report.regularized);
        report.per_user_rate.push_back(std::max(0.0, (ld_total - ld_noise) / kLn2));
    }
    finalize(report);
    return report;
}

RateReport sum_rate_bd_closed_form(const EffectiveSubchannels& subchannels,
                                   const AllocationResult& allocation, double snr,
                                   const SystemConfig& config, double power_scale,
                                   const std::string& label) {
    config.validate();
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw std::invalid_argument("sum_rate_bd_closed_form: snr must be positive and finite");
    const arma::uword k_users = config.users;
    const arma::uword n_s = config.streams_per_user;
    if (subchannels.sigma.size() != k_users)
        throw std::invalid_argument("sum_rate_bd_closed_form: subchannel user count mismatch");
    if (allocation.lambda.n_elem != k_users * n_s)
        throw std::invalid_argument("sum_rate_bd_closed_form: allocation must cover K*N_S streams");

    const double coeff = snr / static_cast<double>(k_users * n_s);
    RateReport report;
    report.scheme_label = label;
    report.snr_db = snr_to_db(snr);
    report.per_user_rate.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k) {
        double rate = 0.0;
        for (arma::uword i = 0; i < n_s; ++i) {
            const double sigma = power_scale * subchannels.sigma[k](i);
            rate += std::log2(1.0 + coeff * allocation.lambda(k * n_s + i) * sigma * sigma);
        }
        report.per_user_rate.push_back(rate);
    }
    finalize(report);
    return report;
}

RateReport approx_rate_single_path(const std::vector<std::complex<double>>& alphas,
                                   arma::uword n_bs, arma::uword n_ms, double snr,
                                   const std::vector<double>& weights,
                                   const std::string& label) {
    if (alphas.empty())
        throw std::invalid_argument("approx_rate_single_path: need at least one user");
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw std::invalid_argument("approx_rate_single_path: snr must be positive and finite");
    const arma::uword k_users = alphas.size();
    const double array_gain = static_cast<double>(n_bs) * static_cast<double>(n_ms);

    StreamGains gains;
    gains.gamma.set_size(k_users);
    for (arma::uword k = 0; k < k_users; ++k)
        gains.gamma(k) = (snr / static_cast<double>(k_users)) * array_gain *
                         std::norm(alphas[k]);
    const AllocationResult alloc =
        proportional_waterfill(gains, weights, static_cast<double>(k_users));

    RateReport report;
    report.scheme_label = label;
    report.snr_db = snr_to_db(snr);
    report.per_user_rate.reserve(k_users);
    for (arma::uword k = 0; k < k_users; ++k)
        report.per_user_rate.push_back(std::log2(1.0 + gains.gamma(k) * alloc.lambda(k)));
    finalize(report);
    return report;
}

double nulling_residual(const MultiUserChannel& channel, const HybridDesign& design) {
    return nulling_residual_blocks(effective_user_blocks(channel, design), design);
}

double nulling_residual_blocks(const std::vector<arma::cx_mat>& blocks,
                               const HybridDesign& design) {
    const arma::uword k_users = blocks.size();
    const arma::uword n_s = design.baseband_combiners.empty()
                                ? 0
                                : design.baseband_combiners[0].n_cols;
    if (k_users == 0 || n_s == 0)
        throw std::invalid_argument("nulling_residual: empty channel or design");

    double worst = 0.0;
    for (arma::uword k = 0; k < k_users; ++k) {
        double leakage = 0.0;
        for (arma::uword i = 0; i < k_users; ++i) {
            if (i == k)
                continue;
            leakage = std::max(leakage,
                               arma::norm(design.baseband_combiners[i].t() * blocks[i] *
                                              design.precoder_block(k, n_s),
                                          "fro"));
        }
        const double in_link = arma::norm(
            design.baseband_combiners[k].t() * blocks[k] * design.precoder_block(k, n_s),
            "fro");
        if (in_link > 0.0)
            worst = std::max(worst, leakage / in_link);
        else if (leakage > 0.0)
            worst = std::numeric_limits<double>::infinity();
    }
    return worst;
}

} // namespace hybd
