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
#include <cstdint>
#include <string>
#include <vector>

#include "hybd/array.hpp"
#include "hybd/rng.hpp"

namespace hybd {

// Clustered mmWave channel parameters. Elevation angles (UPA geometries)
// reuse the azimuth mean ranges and spreads.
struct MmWaveSpec {
    arma::uword clusters = 8;          // N_c
    arma::uword paths_per_cluster = 10; // N_p
    double aod_mean_lo = 0.0;          // cluster-mean AoD range [lo, hi], radians
    double aod_mean_hi = 0.0;
    double aoa_mean_lo = 0.0;          // cluster-mean AoA range [lo, hi], radians
    double aoa_mean_hi = 0.0;
    double aod_spread = 0.0;           // per-path Laplacian std dev, radians
    double aoa_spread = 0.0;
    bool elevation_enabled = false;

    void validate() const;
};

// One propagation path of a clustered channel draw.
struct PathRealization {
    std::complex<double> gain;   // alpha_il
    double aoa_azimuth = 0.0;
    double aod_azimuth = 0.0;
    double aoa_elevation = 0.0;  // used only when elevation_enabled
    double aod_elevation = 0.0;
};

// K downlink channels H_k (N_MS x N_BS) with large-scale gains beta_k;
// H_k = sqrt(beta_k) * normalized draw. per_user_paths is populated only by
// the clustered sampler.
struct MultiUserChannel {
    std::vector<arma::cx_mat> per_user_matrix;
    std::vector<double> large_scale;
    ArrayGeometry geometry_bs;
    ArrayGeometry geometry_ms;
    std::vector<std::vector<PathRealization>> per_user_paths;

    arma::uword users() const { return per_user_matrix.size(); }
    arma::uword n_ms() const { return per_user_matrix.empty() ? 0 : per_user_matrix[0].n_rows; }
    arma::uword n_bs() const { return per_user_matrix.empty() ? 0 : per_user_matrix[0].n_cols; }
};

// Draw from a Laplacian with standard deviation `spread` centered at `mean`,
// truncated (and renormalized) to [mean - pi, mean + pi] via the exact
// inverse CDF. spread = 0 returns the mean.
double sample_truncated_laplacian(RngStream& rng, double mean, double spread);

// i.i.d. CN(0,1) entries per user, scaled by sqrt(beta_k). Entries are drawn
// user by user, row-major within each matrix.
MultiUserChannel sample_rayleigh(RngStream& rng,
                                 const ArrayGeometry& geometry_bs,
                                 const ArrayGeometry& geometry_ms,
                                 const std::vector<double>& large_scale);

// Clustered geometric channel: N_c clusters of N_p paths each, cluster means
// uniform in the configured ranges, per-path angles truncated-Laplacian about
// the cluster mean, gains CN(0,1). Draw order per user: for each cluster the
// AoD mean, AoA mean (then AoD/AoA elevation means when enabled), then for
// each path the gain, AoD, AoA (then the elevations).
MultiUserChannel sample_mmwave(RngStream& rng, const MmWaveSpec& spec,
                               const ArrayGeometry& geometry_bs,
                               const ArrayGeometry& geometry_ms,
                               const std::vector<double>& large_scale);

// Deterministic rank-one channels H_k = sqrt(N_BS*N_MS) * gain_k *
// a_MS(aoa_k) * a_BS(aod_k)^H. Large-scale fading is folded into the gains.
MultiUserChannel single_path_channel(const std::vector<std::complex<double>>& gains,
                                     const std::vector<double>& aoas,
                                     const std::vector<double>& aods,
                                     const ArrayGeometry& geometry_bs,
                                     const ArrayGeometry& geometry_ms);

// Text dump of one realization: header line "hybd-channel-dump v1",
// dimensions, seed, beta list, then per user the row-major entries as
// interleaved real/imaginary decimal text.
void write_channel_file(const MultiUserChannel& channel, std::uint64_t seed,
                        const std::string& path);

} // namespace hybd
