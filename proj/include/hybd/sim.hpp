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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hybd/channel.hpp"
#include "hybd/rate_evaluation.hpp"
#include "hybd/rf_stage.hpp"

namespace hybd {

enum class Scheme { hybd, full_bd, single_path_analytic };
enum class ChannelKind { rayleigh, mmwave, single_path };

std::string scheme_name(Scheme s);
std::string channel_kind_name(ChannelKind k);

// Optional sweep over one scenario dimension. For `snr` the values act as
// the SNR grid; for `n_s` each value v sets streams_per_user = rf_chains_ms
// = v and rf_chains_bs = users * v; for `k` each value v sets users = v and
// rf_chains_bs = v * rf_chains_ms.
struct SweepSpec {
    enum class Parameter { none, snr, n_s, k };
    Parameter parameter = Parameter::none;
    std::vector<double> values;
};

// Full description of one simulation scenario (see README for the config
// file grammar; keys mirror these field names).
struct ScenarioConfig {
    std::string name;
    SystemConfig system;
    ChannelKind channel_kind = ChannelKind::rayleigh;
    MmWaveSpec mmwave;
    ArrayGeometry geometry_bs;
    ArrayGeometry geometry_ms;
    double beta_low = 0.5;
    double beta_high = 1.5;
    std::vector<double> snr_grid_db;
    arma::uword trials = 1;
    std::uint64_t master_seed = 1;
    std::vector<Scheme> schemes;
    SweepSpec sweep;

    void validate() const; // throws config_error

    // The scenario with one sweep value applied (identity for snr sweeps).
    ScenarioConfig at_sweep_value(double value) const;
    // Effective SNR grid (sweep values when the sweep parameter is snr).
    std::vector<double> snr_points() const;
};

// Parse a scenario from JSON text / a file. Unknown keys anywhere are a
// config_error; `fallback_name` labels the scenario when the file has no
// usable stem.
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& fallback_name);
ScenarioConfig load_scenario_file(const std::string& path);

// Why a scheme cannot run at a given operating point (empty = feasible).
std::string scheme_infeasibility(const ScenarioConfig& config, Scheme scheme);

// One Monte-Carlo channel draw for trial `trial_index`, fully determined by
// (master_seed, trial_index).
MultiUserChannel sample_trial_channel(const ScenarioConfig& config, arma::uword trial_index);

// Per-scheme outcome of a trial, one RateReport per SNR grid point.
struct TrialSchemeResult {
    Scheme scheme = Scheme::hybd;
    bool feasible = true;
    std::vector<RateReport> per_snr;
    std::vector<double> water_levels;             // per SNR point
    double nulling_residual = 0.0;                // worst over the grid
    std::vector<std::vector<arma::uword>> combiner_indices; // hybrid only
};

struct TrialResult {
    arma::uword trial_index = 0;
    std::vector<TrialSchemeResult> per_scheme; // aligned with config.schemes
    double wall_time_s = 0.0;
};

// Run one trial at a fixed operating point (config.sweep is ignored here;
// callers pass configs already specialized via at_sweep_value).
TrialResult run_trial(const ScenarioConfig& config, arma::uword trial_index);

// One aggregated CSV row.
struct SweepRow {
    std::string scenario;
    std::string scheme;
    std::string channel_kind;
    std::string sweep_param;
    double sweep_value = 0.0;
    double snr_db = 0.0;
    arma::uword trials = 0;
    double mean_sum_rate = 0.0;
    double stderr_sum_rate = 0.0;
    double mean_per_user_rate_min = 0.0;
    double mean_per_user_rate_max = 0.0;
    bool feasible = true;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

// Observer invoked (in trial-index order, after all trials of a point
// finished) for trial logging.
using TrialSink =
    std::function<void(const ScenarioConfig& point, const TrialResult& result)>;

// Monte-Carlo sweep: for every sweep value x SNR x scheme, the mean and
// standard error of the sum rate over `trials` trials. Trials may execute
// on `threads` workers; results are reduced in index order so the table is
// identical for any thread count. Infeasible points become rows with
// feasible = 0.
SweepTable run_sweep(const ScenarioConfig& config, unsigned threads = 1,
                     const TrialSink& sink = nullptr);

// CSV rendering of a table (schema documented in the README).
std::string csv_to_string(const SweepTable& table);
void emit_csv(const SweepTable& table, const std::string& path);

// Python/matplotlib script that plots the CSV (presentation only).
void write_plot_script(const std::string& csv_path, const std::string& script_path);

// Dump `trials` channel realizations of a scenario into a directory.
void write_channels(const ScenarioConfig& config, const std::string& out_dir);

} // namespace hybd
