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

#include "hybd/validate.hpp"

#include <cmath>

#include "hybd/power_allocation.hpp"
#include "hybd/rate_evaluation.hpp"
#include "hybd/rf_stage.hpp"
#include "hybd/rng.hpp"

namespace hybd {

namespace {

double max_abs(const arma::cx_mat& m) {
    return m.n_elem == 0 ? 0.0 : arma::abs(m).max();
}

double identity_residual(const arma::cx_mat& gram) {
    return max_abs(gram - arma::eye<arma::cx_mat>(gram.n_rows, gram.n_cols));
}

// Everything a scheme produces for one channel draw, for invariant checks.
struct PipelineArtifacts {
    std::vector<arma::cx_mat> user_blocks; // H~_k fed to BD
    BdResult bd;
    AllocationResult alloc;
    HybridDesign design;
};

PipelineArtifacts build_hybrid(const MultiUserChannel& channel, const SystemConfig& sys) {
    PipelineArtifacts art;
    const DftCodebook codebook = build_dft_codebook(sys.n_ms);
    std::vector<RfCombiner> combiners;
    for (arma::uword k = 0; k < sys.users; ++k)
        combiners.push_back(
            select_rf_combiner(channel.per_user_matrix[k], codebook, sys.rf_chains_ms));
    const arma::cx_mat h_int = build_intermediate_channel(channel, combiners);
    const RfPrecoder f = egt_precoder(h_int);
    const EquivalentChannel eq = equivalent_channel(h_int, f, combiners);
    art.bd = block_diagonalize(eq);
    art.user_blocks = eq.per_user_blocks;
    const StreamGains gains = stream_gains(art.bd, sys);
    art.alloc = proportional_waterfill(gains, sys.weights,
                                       static_cast<double>(sys.total_streams()));
    art.design = assemble_hybrid_design(eq, art.bd, sys, art.alloc, f, combiners);
    return art;
}

PipelineArtifacts build_full_bd(const MultiUserChannel& channel, const SystemConfig& sys) {
    PipelineArtifacts art;
    art.user_blocks = channel.per_user_matrix;
    art.bd = block_diagonalize_raw(channel.per_user_matrix);
    const StreamGains gains = stream_gains(art.bd, sys);
    art.alloc = proportional_waterfill(gains, sys.weights,
                                       static_cast<double>(sys.total_streams()));
    art.design = assemble_full_bd(art.bd, sys, art.alloc);
    return art;
}

double null_space_residual(const PipelineArtifacts& art) {
    double worst = 0.0;
    for (arma::uword k = 0; k < art.user_blocks.size(); ++k) {
        const arma::cx_mat h_bar = complement_channel(art.user_blocks, k);
        const double scale = std::max(1.0, arma::norm(h_bar, "fro"));
        worst = std::max(worst,
                         arma::norm(h_bar * art.bd.null_bases.per_user[k], "fro") / scale);
    }
    return worst;
}

double basis_orthonormality(const PipelineArtifacts& art) {
    double worst = 0.0;
    for (const arma::cx_mat& v : art.bd.null_bases.per_user)
        worst = std::max(worst, identity_residual(v.t() * v));
    for (const arma::cx_mat& m : art.design.baseband_combiners)
        worst = std::max(worst, identity_residual(m.t() * m));
    return worst;
}

double svd_reconstruction(const PipelineArtifacts& art) {
    double worst = 0.0;
    for (arma::uword k = 0; k < art.bd.effective.per_user.size(); ++k) {
        const arma::cx_mat& a = art.bd.effective.per_user[k];
        arma::mat s(a.n_rows, a.n_cols, arma::fill::zeros);
        for (arma::uword i = 0; i < art.bd.effective.sigma[k].n_elem; ++i)
            s(i, i) = art.bd.effective.sigma[k](i);
        const arma::cx_mat rebuilt = art.bd.effective.u[k] *
                                     arma::cx_mat(s, arma::zeros<arma::mat>(a.n_rows, a.n_cols)) *
                                     art.bd.effective.v[k].t();
        const double denom = std::max(1e-300, arma::norm(a, "fro"));
        worst = std::max(worst, arma::norm(rebuilt - a, "fro") / denom);
    }
    return worst;
}

double power_constraint_residual(const PipelineArtifacts& art, const SystemConfig& sys) {
    const double target = static_cast<double>(sys.total_streams());
    const double energy = arma::accu(arma::square(
        arma::abs(art.design.rf_precoder.matrix * art.design.baseband_precoder)));
    return std::abs(energy - target) / target;
}

double noise_whitening_residual(const PipelineArtifacts& art) {
    double worst = 0.0;
    for (arma::uword k = 0; k < art.design.baseband_combiners.size(); ++k) {
        const arma::cx_mat wm =
            art.design.rf_combiners[k].matrix * art.design.baseband_combiners[k];
        worst = std::max(worst, identity_residual(wm.t() * wm));
    }
    return worst;
}

} // namespace

InvariantCheck make_check(const std::string& name, double residual, double tolerance) {
    InvariantCheck c;
    c.name = name;
    c.residual = residual;
    c.tolerance = tolerance;
    c.pass = std::isfinite(residual) && residual <= tolerance;
    return c;
}

InvariantCheck check_design_nulling(const MultiUserChannel& channel,
                                    const HybridDesign& design,
                                    const std::string& label) {
    return make_check("nulling_leakage[" + label + "]",
                      nulling_residual(channel, design), 1e-9);
}

std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed) {
    std::vector<InvariantCheck> checks;

    // --- array responses ---------------------------------------------------
    {
        RngStream rng(derive_seed(seed, 101));
        const ArrayGeometry ula = ArrayGeometry::ula(8);
        const ArrayGeometry upa = ArrayGeometry::upa(4, 4);
        double worst_ula = 0.0, worst_upa = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double az = rng.uniform(-arma::datum::pi, arma::datum::pi);
            const double el = rng.uniform(-0.5 * arma::datum::pi, 0.5 * arma::datum::pi);
            worst_ula = std::max(worst_ula,
                                 std::abs(arma::norm(ula_response(ula, az)) - 1.0));
            worst_upa = std::max(worst_upa,
                                 std::abs(arma::norm(upa_response(upa, az, el)) - 1.0));
        }
        checks.push_back(make_check("ula_response_unit_norm", worst_ula, 1e-12));
        checks.push_back(make_check("upa_response_unit_norm", worst_upa, 1e-12));
    }

    // --- DFT codebook --------------------------------------------------------
    const DftCodebook codebook = build_dft_codebook(8);
    checks.push_back(make_check("dft_codebook_orthonormal",
                                identity_residual(codebook.columns.t() * codebook.columns),
                                1e-12));

    // --- a small two-scheme scenario ----------------------------------------
    SystemConfig sys;
    sys.n_bs = 16;
    sys.n_ms = 4;
    sys.users = 3;
    sys.streams_per_user = 2;
    sys.rf_chains_ms = 2;
    sys.rf_chains_bs = 6;
    sys.snr_db = 5.0;
    sys.weights = {1.0, 2.0, 1.0};

    RngStream channel_rng(derive_seed(seed, 102));
    const MultiUserChannel channel =
        sample_rayleigh(channel_rng, ArrayGeometry::ula(sys.n_bs),
                        ArrayGeometry::ula(sys.n_ms), {0.8, 1.0, 1.4});

    // RF-stage constraints.
    const DftCodebook ms_codebook = build_dft_codebook(sys.n_ms);
    {
        double entry_mod = 0.0, gram = 0.0;
        for (arma::uword k = 0; k < sys.users; ++k) {
            const RfCombiner w = select_rf_combiner(channel.per_user_matrix[k], ms_codebook,
                                                    sys.rf_chains_ms);
            entry_mod = std::max(entry_mod,
                                 arma::abs(arma::abs(w.matrix) -
                                           1.0 / std::sqrt(static_cast<double>(sys.n_ms)))
                                     .max());
            gram = std::max(gram, identity_residual(w.matrix.t() * w.matrix));
        }
        checks.push_back(make_check("combiner_entry_modulus", entry_mod, 1e-12));
        checks.push_back(make_check("combiner_orthonormal", gram, 1e-12));
    }
    {
        std::vector<RfCombiner> combiners;
        for (arma::uword k = 0; k < sys.users; ++k)
            combiners.push_back(select_rf_combiner(channel.per_user_matrix[k], ms_codebook,
                                                   sys.rf_chains_ms));
        const arma::cx_mat h_int = build_intermediate_channel(channel, combiners);
        const RfPrecoder f = egt_precoder(h_int);
        checks.push_back(make_check(
            "egt_entry_modulus",
            arma::abs(arma::abs(f.matrix) - 1.0 / std::sqrt(static_cast<double>(sys.n_bs)))
                .max(),
            1e-12));
        const EquivalentChannel eq = equivalent_channel(h_int, f, combiners);
        double diag_residual = 0.0;
        for (arma::uword i = 0; i < eq.full.n_rows; ++i) {
            const double l1 = arma::accu(arma::abs(h_int.row(i)));
            diag_residual = std::max(
                diag_residual,
                std::abs(eq.full(i, i) - l1 / std::sqrt(static_cast<double>(sys.n_bs))));
        }
        checks.push_back(make_check("heq_diagonal_egt_identity", diag_residual, 1e-9));
    }

    // BD + assembly invariants for both schemes.
    const PipelineArtifacts hybrid = build_hybrid(channel, sys);
    const PipelineArtifacts baseline = build_full_bd(channel, sys);
    checks.push_back(make_check(
        "null_space_residual",
        std::max(null_space_residual(hybrid), null_space_residual(baseline)), 1e-10));
    checks.push_back(make_check(
        "singular_vector_orthonormal",
        std::max(basis_orthonormality(hybrid), basis_orthonormality(baseline)), 1e-10));
    checks.push_back(make_check(
        "svd_reconstruction",
        std::max(svd_reconstruction(hybrid), svd_reconstruction(baseline)), 1e-10));
    checks.push_back(make_check("power_constraint",
                                std::max(power_constraint_residual(hybrid, sys),
                                         power_constraint_residual(baseline, sys)),
                                1e-9));
    checks.push_back(make_check(
        "noise_whitening",
        std::max(noise_whitening_residual(hybrid), noise_whitening_residual(baseline)),
        1e-10));
    {
        const InvariantCheck h = check_design_nulling(channel, hybrid.design, "hybd");
        const InvariantCheck b = check_design_nulling(channel, baseline.design, "full_bd");
        checks.push_back(make_check("nulling_leakage", std::max(h.residual, b.residual),
                                    1e-9));
    }

    // Water-filling invariants.
    {
        const double budget = static_cast<double>(sys.total_streams());
        const StreamGains gains = stream_gains(hybrid.bd, sys);
        checks.push_back(make_check("waterfill_budget",
                                    std::abs(arma::accu(hybrid.alloc.lambda) - budget),
                                    1e-9));
        checks.push_back(make_check("waterfill_kkt",
                                    kkt_residual(hybrid.alloc, gains, budget), 1e-8));
    }

    // Rate-formula agreement (both schemes) and report additivity.
    {
        double agreement = 0.0, additivity = 0.0;
        const PipelineArtifacts* arts[2] = {&hybrid, &baseline};
        for (const PipelineArtifacts* art : arts) {
            const RateReport general =
                sum_rate_general(channel, art->design, sys.snr_linear());
            const RateReport closed =
                sum_rate_bd_closed_form(art->bd.effective, art->alloc, sys.snr_linear(),
                                        sys, art->design.power_scale);
            agreement = std::max(agreement, std::abs(general.sum_rate - closed.sum_rate) /
                                                closed.sum_rate);
            double total = 0.0;
            for (double r : general.per_user_rate)
                total += r;
            additivity = std::max(additivity, std::abs(general.sum_rate - total) /
                                                  std::max(1.0, general.sum_rate));
        }
        checks.push_back(make_check("rate_formula_agreement", agreement, 1e-9));
        checks.push_back(make_check("rate_report_additivity", additivity, 1e-12));
    }

    // Channel-model invariants.
    {
        RngStream a(derive_seed(seed, 103));
        RngStream b(derive_seed(seed, 103));
        const MultiUserChannel ca = sample_rayleigh(a, ArrayGeometry::ula(8),
                                                    ArrayGeometry::ula(2), {1.0, 1.0});
        const MultiUserChannel cb = sample_rayleigh(b, ArrayGeometry::ula(8),
                                                    ArrayGeometry::ula(2), {1.0, 1.0});
        double diff = 0.0;
        for (arma::uword k = 0; k < ca.users(); ++k)
            diff = std::max(diff, max_abs(ca.per_user_matrix[k] - cb.per_user_matrix[k]));
        checks.push_back(make_check("channel_determinism", diff, 0.0));
    }
    {
        RngStream rng(derive_seed(seed, 104));
        double excess = 0.0;
        const double mean = 0.7, spread = 0.6;
        for (int i = 0; i < 20000; ++i) {
            const double x = sample_truncated_laplacian(rng, mean, spread);
            excess = std::max(excess, std::max(0.0, std::abs(x - mean) - arma::datum::pi));
        }
        checks.push_back(make_check("laplacian_truncation", excess, 0.0));
    }
    {
        RngStream rng(derive_seed(seed, 105));
        double acc = 0.0;
        const int draws = 400;
        for (int i = 0; i < draws; ++i) {
            const MultiUserChannel c = sample_rayleigh(rng, ArrayGeometry::ula(16),
                                                       ArrayGeometry::ula(4), {1.0});
            acc += arma::accu(arma::square(arma::abs(c.per_user_matrix[0]))) / 64.0;
        }
        checks.push_back(make_check("rayleigh_normalization",
                                    std::abs(acc / draws - 1.0), 0.05));
    }

    return checks;
}

} // namespace hybd
