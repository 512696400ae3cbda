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

#include "hybd/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hybd/errors.hpp"

namespace hybd {

namespace {

void check_large_scale(const std::vector<double>& large_scale) {
    if (large_scale.empty())
        throw std::invalid_argument("channel: need at least one user");
    for (double b : large_scale)
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("channel: large_scale entries must be positive");
}

} // namespace

void MmWaveSpec::validate() const {
    if (clusters < 1 || paths_per_cluster < 1)
        throw std::invalid_argument("MmWaveSpec: clusters and paths_per_cluster must be >= 1");
    if (!(aod_mean_lo <= aod_mean_hi) || !(aoa_mean_lo <= aoa_mean_hi))
        throw std::invalid_argument("MmWaveSpec: mean-angle ranges must satisfy lo <= hi");
    if (!(aod_spread >= 0.0) || !(aoa_spread >= 0.0))
        throw std::invalid_argument("MmWaveSpec: angle spreads must be >= 0");
    if (!std::isfinite(aod_mean_lo) || !std::isfinite(aod_mean_hi) ||
        !std::isfinite(aoa_mean_lo) || !std::isfinite(aoa_mean_hi) ||
        !std::isfinite(aod_spread) || !std::isfinite(aoa_spread))
        throw std::invalid_argument("MmWaveSpec: parameters must be finite");
}

double sample_truncated_laplacian(RngStream& rng, double mean, double spread) {
    if (!(spread >= 0.0) || !std::isfinite(spread) || !std::isfinite(mean))
        throw std::invalid_argument("sample_truncated_laplacian: bad mean/spread");
    if (spread == 0.0)
        return mean;
    // Laplacian with std dev `spread` has scale b = spread/sqrt(2). Exact
    // inverse CDF after restricting the mass to [mean - pi, mean + pi].
    const double b = spread / std::sqrt(2.0);
    const double edge = 0.5 * std::exp(-arma::datum::pi / b); // CDF at mean - pi
    const double u = rng.uniform();
    const double target = edge + u * (1.0 - 2.0 * edge);
    double x;
    if (target <= 0.5)
        x = mean + b * std::log(2.0 * target);
    else
        x = mean - b * std::log(2.0 * (1.0 - target));
    // Clamp guards against rounding at the interval edges only.
    return std::min(std::max(x, mean - arma::datum::pi), mean + arma::datum::pi);
}

MultiUserChannel sample_rayleigh(RngStream& rng,
                                 const ArrayGeometry& geometry_bs,
                                 const ArrayGeometry& geometry_ms,
                                 const std::vector<double>& large_scale) {
    geometry_bs.validate();
    geometry_ms.validate();
    check_large_scale(large_scale);
    const arma::uword n_bs = geometry_bs.elements_total;
    const arma::uword n_ms = geometry_ms.elements_total;

    MultiUserChannel out;
    out.geometry_bs = geometry_bs;
    out.geometry_ms = geometry_ms;
    out.large_scale = large_scale;
    out.per_user_matrix.reserve(large_scale.size());
    for (double beta : large_scale) {
        arma::cx_mat h(n_ms, n_bs);
        const double root_beta = std::sqrt(beta);
        for (arma::uword r = 0; r < n_ms; ++r)
            for (arma::uword c = 0; c < n_bs; ++c)
                h(r, c) = root_beta * rng.complex_gaussian();
        out.per_user_matrix.push_back(std::move(h));
    }
    return out;
}

MultiUserChannel sample_mmwave(RngStream& rng, const MmWaveSpec& spec,
                               const ArrayGeometry& geometry_bs,
                               const ArrayGeometry& geometry_ms,
                               const std::vector<double>& large_scale) {
    spec.validate();
    geometry_bs.validate();
    geometry_ms.validate();
    check_large_scale(large_scale);
    if (spec.elevation_enabled &&
        geometry_bs.kind != ArrayKind::UPA && geometry_ms.kind != ArrayKind::UPA)
        throw std::invalid_argument("sample_mmwave: elevation_enabled requires a UPA geometry");

    const arma::uword n_bs = geometry_bs.elements_total;
    const arma::uword n_ms = geometry_ms.elements_total;
    const double paths_total = static_cast<double>(spec.clusters * spec.paths_per_cluster);
    const double scale =
        std::sqrt(static_cast<double>(n_bs) * static_cast<double>(n_ms) / paths_total);

    MultiUserChannel out;
    out.geometry_bs = geometry_bs;
    out.geometry_ms = geometry_ms;
    out.large_scale = large_scale;
    out.per_user_matrix.reserve(large_scale.size());
    out.per_user_paths.reserve(large_scale.size());

    for (double beta : large_scale) {
        std::vector<PathRealization> paths;
        paths.reserve(spec.clusters * spec.paths_per_cluster);
        for (arma::uword i = 0; i < spec.clusters; ++i) {
            const double aod_mean = rng.uniform(spec.aod_mean_lo, spec.aod_mean_hi);
            const double aoa_mean = rng.uniform(spec.aoa_mean_lo, spec.aoa_mean_hi);
            double aod_el_mean = 0.0, aoa_el_mean = 0.0;
            if (spec.elevation_enabled) {
                aod_el_mean = rng.uniform(spec.aod_mean_lo, spec.aod_mean_hi);
                aoa_el_mean = rng.uniform(spec.aoa_mean_lo, spec.aoa_mean_hi);
            }
            for (arma::uword l = 0; l < spec.paths_per_cluster; ++l) {
                PathRealization p;
                p.gain = rng.complex_gaussian();
                p.aod_azimuth = sample_truncated_laplacian(rng, aod_mean, spec.aod_spread);
                p.aoa_azimuth = sample_truncated_laplacian(rng, aoa_mean, spec.aoa_spread);
                if (spec.elevation_enabled) {
                    p.aod_elevation =
                        sample_truncated_laplacian(rng, aod_el_mean, spec.aod_spread);
                    p.aoa_elevation =
                        sample_truncated_laplacian(rng, aoa_el_mean, spec.aoa_spread);
                }
                paths.push_back(p);
            }
        }

        arma::cx_mat h(n_ms, n_bs, arma::fill::zeros);
        for (const PathRealization& p : paths) {
            const arma::cx_vec a_ms = array_response(geometry_ms, p.aoa_azimuth, p.aoa_elevation);
            const arma::cx_vec a_bs = array_response(geometry_bs, p.aod_azimuth, p.aod_elevation);
            h += p.gain * (a_ms * a_bs.t());
        }
        h *= scale * std::sqrt(beta);
        out.per_user_matrix.push_back(std::move(h));
        out.per_user_paths.push_back(std::move(paths));
    }
    return out;
}

MultiUserChannel single_path_channel(const std::vector<std::complex<double>>& gains,
                                     const std::vector<double>& aoas,
                                     const std::vector<double>& aods,
                                     const ArrayGeometry& geometry_bs,
                                     const ArrayGeometry& geometry_ms) {
    geometry_bs.validate();
    geometry_ms.validate();
    if (gains.empty() || gains.size() != aoas.size() || gains.size() != aods.size())
        throw std::invalid_argument("single_path_channel: gains/aoas/aods must have equal length >= 1");

    const double scale = std::sqrt(static_cast<double>(geometry_bs.elements_total) *
                                   static_cast<double>(geometry_ms.elements_total));
    MultiUserChannel out;
    out.geometry_bs = geometry_bs;
    out.geometry_ms = geometry_ms;
    out.large_scale.assign(gains.size(), 1.0);
    out.per_user_matrix.reserve(gains.size());
    out.per_user_paths.reserve(gains.size());
    for (std::size_t k = 0; k < gains.size(); ++k) {
        const arma::cx_vec a_ms = array_response(geometry_ms, aoas[k]);
        const arma::cx_vec a_bs = array_response(geometry_bs, aods[k]);
        out.per_user_matrix.push_back(scale * gains[k] * (a_ms * a_bs.t()));
        PathRealization p;
        p.gain = gains[k];
        p.aoa_azimuth = aoas[k];
        p.aod_azimuth = aods[k];
        out.per_user_paths.push_back({p});
    }
    return out;
}

void write_channel_file(const MultiUserChannel& channel, std::uint64_t seed,
                        const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw io_error("cannot open channel dump file for writing: " + path);
    std::fprintf(f, "hybd-channel-dump v1\n");
    std::fprintf(f, "users %zu\n", channel.per_user_matrix.size());
    std::fprintf(f, "n_ms %llu\n", static_cast<unsigned long long>(channel.n_ms()));
    std::fprintf(f, "n_bs %llu\n", static_cast<unsigned long long>(channel.n_bs()));
    std::fprintf(f, "seed %llu\n", static_cast<unsigned long long>(seed));
    std::fprintf(f, "beta");
    for (double b : channel.large_scale)
        std::fprintf(f, " %.17g", b);
    std::fprintf(f, "\n");
    for (std::size_t k = 0; k < channel.per_user_matrix.size(); ++k) {
        std::fprintf(f, "user %zu\n", k);
        const arma::cx_mat& h = channel.per_user_matrix[k];
        for (arma::uword r = 0; r < h.n_rows; ++r) {
            for (arma::uword c = 0; c < h.n_cols; ++c) {
                std::fprintf(f, "%s%.17g %.17g", c == 0 ? "" : " ",
                             h(r, c).real(), h(r, c).imag());
            }
            std::fprintf(f, "\n");
        }
    }
    if (std::fclose(f) != 0)
        throw io_error("failed writing channel dump file: " + path);
}

} // namespace hybd
