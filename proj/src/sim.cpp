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

#include "hybd/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hybd/baseband_bd.hpp"
#include "hybd/errors.hpp"
#include "hybd/power_allocation.hpp"
#include "hybd/rng.hpp"

namespace hybd {

using nlohmann::json;

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::hybd: return "hybd";
        case Scheme::full_bd: return "full_bd";
        case Scheme::single_path_analytic: return "single_path_analytic";
    }
    return "?";
}

std::string channel_kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::rayleigh: return "rayleigh";
        case ChannelKind::mmwave: return "mmwave";
        case ChannelKind::single_path: return "single_path";
    }
    return "?";
}

namespace {

std::string sweep_param_name(SweepSpec::Parameter p) {
    switch (p) {
        case SweepSpec::Parameter::none: return "none";
        case SweepSpec::Parameter::snr: return "snr";
        case SweepSpec::Parameter::n_s: return "n_s";
        case SweepSpec::Parameter::k: return "k";
    }
    return "?";
}

[[noreturn]] void fail(const std::string& message) {
    throw config_error(message);
}

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        fail("config: '" + context + "' must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            fail("config: unknown key '" + item.key() + "' in " + context);
    }
}

const json& require(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end())
        fail("config: missing key '" + std::string(key) + "' in " + context);
    return *it;
}

arma::uword parse_count(const json& value, const std::string& what) {
    if (!value.is_number_integer() && !value.is_number_unsigned())
        fail("config: " + what + " must be an integer");
    const std::int64_t v = value.get<std::int64_t>();
    if (v < 1)
        fail("config: " + what + " must be >= 1");
    return static_cast<arma::uword>(v);
}

double parse_real(const json& value, const std::string& what) {
    if (!value.is_number())
        fail("config: " + what + " must be a number");
    const double v = value.get<double>();
    if (!std::isfinite(v))
        fail("config: " + what + " must be finite");
    return v;
}

std::pair<double, double> parse_range(const json& value, const std::string& what) {
    if (!value.is_array() || value.size() != 2)
        fail("config: " + what + " must be a two-element array [low, high]");
    return {parse_real(value[0], what + "[0]"), parse_real(value[1], what + "[1]")};
}

ArrayGeometry parse_geometry(const json& obj, const std::string& context) {
    check_keys(obj, context,
               {"kind", "elements_total", "rows", "cols", "spacing_over_wavelength"});
    const std::string kind = require(obj, "kind", context).get<std::string>();
    const double spacing = obj.contains("spacing_over_wavelength")
                               ? parse_real(obj["spacing_over_wavelength"],
                                            context + ".spacing_over_wavelength")
                               : 0.5;
    try {
        if (kind == "ula") {
            if (obj.contains("rows") || obj.contains("cols"))
                fail("config: " + context + ": rows/cols are only valid for kind 'upa'");
            return ArrayGeometry::ula(
                parse_count(require(obj, "elements_total", context),
                            context + ".elements_total"),
                spacing);
        }
        if (kind == "upa") {
            const arma::uword rows =
                parse_count(require(obj, "rows", context), context + ".rows");
            const arma::uword cols =
                parse_count(require(obj, "cols", context), context + ".cols");
            if (obj.contains("elements_total") &&
                parse_count(obj["elements_total"], context + ".elements_total") != rows * cols)
                fail("config: " + context + ": elements_total must equal rows*cols");
            return ArrayGeometry::upa(rows, cols, spacing);
        }
    } catch (const std::invalid_argument& e) {
        fail("config: " + context + ": " + e.what());
    }
    fail("config: " + context + ".kind must be 'ula' or 'upa'");
}

SystemConfig parse_system(const json& obj, const std::string& context) {
    check_keys(obj, context,
               {"n_bs", "n_ms", "users", "streams_per_user", "rf_chains_ms",
                "rf_chains_bs", "weights", "snr_db"});
    if (obj.contains("snr_db"))
        fail("config: " + context +
             ".snr_db is set per grid point; use the scenario-level snr_grid_db");
    SystemConfig sys;
    sys.n_bs = parse_count(require(obj, "n_bs", context), context + ".n_bs");
    sys.n_ms = parse_count(require(obj, "n_ms", context), context + ".n_ms");
    sys.users = parse_count(require(obj, "users", context), context + ".users");
    sys.streams_per_user = parse_count(require(obj, "streams_per_user", context),
                                       context + ".streams_per_user");
    sys.rf_chains_ms = parse_count(require(obj, "rf_chains_ms", context),
                                   context + ".rf_chains_ms");
    sys.rf_chains_bs = parse_count(require(obj, "rf_chains_bs", context),
                                   context + ".rf_chains_bs");
    if (obj.contains("weights")) {
        const json& w = obj["weights"];
        if (!w.is_array() || w.empty())
            fail("config: " + context + ".weights must be a nonempty array");
        for (const json& e : w)
            sys.weights.push_back(parse_real(e, context + ".weights[]"));
    } else {
        sys.weights.assign(sys.users, 1.0);
    }
    return sys;
}

MmWaveSpec parse_mmwave(const json& obj, const std::string& context) {
    check_keys(obj, context,
               {"clusters", "paths_per_cluster", "aod_mean_range", "aoa_mean_range",
                "aod_spread", "aoa_spread", "elevation_enabled"});
    MmWaveSpec spec;
    spec.clusters = parse_count(require(obj, "clusters", context), context + ".clusters");
    spec.paths_per_cluster = parse_count(require(obj, "paths_per_cluster", context),
                                         context + ".paths_per_cluster");
    std::tie(spec.aod_mean_lo, spec.aod_mean_hi) =
        parse_range(require(obj, "aod_mean_range", context), context + ".aod_mean_range");
    std::tie(spec.aoa_mean_lo, spec.aoa_mean_hi) =
        parse_range(require(obj, "aoa_mean_range", context), context + ".aoa_mean_range");
    spec.aod_spread = parse_real(require(obj, "aod_spread", context), context + ".aod_spread");
    spec.aoa_spread = parse_real(require(obj, "aoa_spread", context), context + ".aoa_spread");
    if (obj.contains("elevation_enabled")) {
        if (!obj["elevation_enabled"].is_boolean())
            fail("config: " + context + ".elevation_enabled must be a boolean");
        spec.elevation_enabled = obj["elevation_enabled"].get<bool>();
    }
    return spec;
}

SweepSpec parse_sweep(const json& obj) {
    check_keys(obj, "sweep", {"parameter", "values"});
    SweepSpec sweep;
    const std::string p = require(obj, "parameter", "sweep").get<std::string>();
    if (p == "snr")
        sweep.parameter = SweepSpec::Parameter::snr;
    else if (p == "n_s")
        sweep.parameter = SweepSpec::Parameter::n_s;
    else if (p == "k")
        sweep.parameter = SweepSpec::Parameter::k;
    else
        fail("config: sweep.parameter must be one of 'snr', 'n_s', 'k'");
    const json& values = require(obj, "values", "sweep");
    if (!values.is_array() || values.empty())
        fail("config: sweep.values must be a nonempty array");
    for (const json& v : values)
        sweep.values.push_back(parse_real(v, "sweep.values[]"));
    return sweep;
}

bool uniform_weights(const std::vector<double>& w) {
    for (double x : w)
        if (x != w.front())
            return false;
    return true;
}

} // namespace

void ScenarioConfig::validate() const {
    try {
        system.validate();
        geometry_bs.validate();
        geometry_ms.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("config: ") + e.what());
    }
    if (geometry_bs.elements_total != system.n_bs)
        fail("config: geometry_bs.elements_total must equal system.n_bs");
    if (geometry_ms.elements_total != system.n_ms)
        fail("config: geometry_ms.elements_total must equal system.n_ms");
    if (!(beta_low > 0.0) || !(beta_low <= beta_high) || !std::isfinite(beta_high))
        fail("config: beta_range must satisfy 0 < low <= high");
    if (trials < 1)
        fail("config: trials must be >= 1");
    if (schemes.empty())
        fail("config: schemes must be nonempty");
    for (std::size_t i = 0; i < schemes.size(); ++i)
        for (std::size_t j = i + 1; j < schemes.size(); ++j)
            if (schemes[i] == schemes[j])
                fail("config: duplicate scheme '" + scheme_name(schemes[i]) + "'");
    if (channel_kind == ChannelKind::mmwave) {
        try {
            mmwave.validate();
        } catch (const std::invalid_argument& e) {
            fail(std::string("config: mmwave: ") + e.what());
        }
        if (mmwave.elevation_enabled && geometry_bs.kind != ArrayKind::UPA &&
            geometry_ms.kind != ArrayKind::UPA)
            fail("config: mmwave.elevation_enabled requires a UPA geometry");
    }
    for (double s : snr_grid_db)
        if (!std::isfinite(s))
            fail("config: snr_grid_db entries must be finite");
    if (sweep.parameter == SweepSpec::Parameter::none) {
        if (!sweep.values.empty())
            fail("config: sweep.values given without a sweep parameter");
        if (snr_grid_db.empty())
            fail("config: snr_grid_db must be nonempty");
    } else if (sweep.parameter == SweepSpec::Parameter::snr) {
        if (sweep.values.empty())
            fail("config: sweep.values must be nonempty");
        for (double v : sweep.values)
            if (!std::isfinite(v))
                fail("config: sweep.values entries must be finite");
    } else {
        if (sweep.values.empty())
            fail("config: sweep.values must be nonempty");
        if (snr_grid_db.empty())
            fail("config: snr_grid_db must be nonempty");
        for (double v : sweep.values)
            if (!(v >= 1.0) || v != std::floor(v))
                fail("config: sweep.values for '" + sweep_param_name(sweep.parameter) +
                     "' must be positive integers");
        if (sweep.parameter == SweepSpec::Parameter::k && !uniform_weights(system.weights))
            fail("config: a 'k' sweep requires uniform weights");
    }
}

ScenarioConfig ScenarioConfig::at_sweep_value(double value) const {
    ScenarioConfig point = *this;
    point.sweep.parameter = SweepSpec::Parameter::none;
    point.sweep.values.clear();
    switch (sweep.parameter) {
        case SweepSpec::Parameter::none:
        case SweepSpec::Parameter::snr:
            break;
        case SweepSpec::Parameter::n_s: {
            const arma::uword v = static_cast<arma::uword>(value);
            point.system.streams_per_user = v;
            point.system.rf_chains_ms = v;
            point.system.rf_chains_bs = system.users * v;
            break;
        }
        case SweepSpec::Parameter::k: {
            const arma::uword v = static_cast<arma::uword>(value);
            point.system.users = v;
            point.system.rf_chains_bs = v * system.rf_chains_ms;
            point.system.weights.assign(v, system.weights.empty() ? 1.0
                                                                  : system.weights.front());
            break;
        }
    }
    return point;
}

std::vector<double> ScenarioConfig::snr_points() const {
    if (sweep.parameter == SweepSpec::Parameter::snr)
        return sweep.values;
    return snr_grid_db;
}

ScenarioConfig parse_scenario(const std::string& json_text,
                              const std::string& fallback_name) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("config: JSON parse failure: ") + e.what());
    }
    check_keys(root, "scenario",
               {"system", "channel_kind", "mmwave", "geometry_bs", "geometry_ms",
                "beta_range", "snr_grid_db", "trials", "master_seed", "schemes", "sweep"});

    ScenarioConfig cfg;
    cfg.name = fallback_name;
    try {
        cfg.system = parse_system(require(root, "system", "scenario"), "system");

        const std::string kind = require(root, "channel_kind", "scenario").get<std::string>();
        if (kind == "rayleigh")
            cfg.channel_kind = ChannelKind::rayleigh;
        else if (kind == "mmwave")
            cfg.channel_kind = ChannelKind::mmwave;
        else if (kind == "single_path")
            cfg.channel_kind = ChannelKind::single_path;
        else
            fail("config: channel_kind must be 'rayleigh', 'mmwave' or 'single_path'");

        if (root.contains("mmwave")) {
            if (cfg.channel_kind != ChannelKind::mmwave)
                fail("config: 'mmwave' section given but channel_kind is '" + kind + "'");
            cfg.mmwave = parse_mmwave(root["mmwave"], "mmwave");
        } else if (cfg.channel_kind == ChannelKind::mmwave) {
            fail("config: channel_kind 'mmwave' requires an 'mmwave' section");
        }

        cfg.geometry_bs = parse_geometry(require(root, "geometry_bs", "scenario"), "geometry_bs");
        cfg.geometry_ms = parse_geometry(require(root, "geometry_ms", "scenario"), "geometry_ms");

        if (root.contains("beta_range"))
            std::tie(cfg.beta_low, cfg.beta_high) =
                parse_range(root["beta_range"], "beta_range");

        const json& grid = require(root, "snr_grid_db", "scenario");
        if (!grid.is_array())
            fail("config: snr_grid_db must be an array");
        for (const json& s : grid)
            cfg.snr_grid_db.push_back(parse_real(s, "snr_grid_db[]"));

        cfg.trials = parse_count(require(root, "trials", "scenario"), "trials");

        const json& seed = require(root, "master_seed", "scenario");
        if (!seed.is_number_integer() && !seed.is_number_unsigned())
            fail("config: master_seed must be an integer");
        cfg.master_seed = seed.get<std::uint64_t>();

        const json& schemes = require(root, "schemes", "scenario");
        if (!schemes.is_array() || schemes.empty())
            fail("config: schemes must be a nonempty array");
        for (const json& s : schemes) {
            const std::string label = s.get<std::string>();
            if (label == "hybd")
                cfg.schemes.push_back(Scheme::hybd);
            else if (label == "full_bd")
                cfg.schemes.push_back(Scheme::full_bd);
            else if (label == "single_path_analytic")
                cfg.schemes.push_back(Scheme::single_path_analytic);
            else
                fail("config: unknown scheme '" + label + "'");
        }

        if (root.contains("sweep"))
            cfg.sweep = parse_sweep(root["sweep"]);
    } catch (const json::exception& e) {
        fail(std::string("config: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (in.bad())
        throw io_error("failed reading config file: " + path);
    std::string name = std::filesystem::path(path).stem().string();
    if (name.empty())
        name = path;
    return parse_scenario(buffer.str(), name);
}

std::string scheme_infeasibility(const ScenarioConfig& config, Scheme scheme) {
    const SystemConfig& sys = config.system;
    try {
        sys.validate();
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    switch (scheme) {
        case Scheme::hybd:
            if (!sys.hybrid_feasible())
                return "hybd requires M_BS = K*M_MS (got M_BS = " +
                       std::to_string(sys.rf_chains_bs) + ", K*M_MS = " +
                       std::to_string(sys.users * sys.rf_chains_ms) + ")";
            break;
        case Scheme::full_bd: {
            if (sys.n_bs <= (sys.users - 1) * sys.n_ms)
                return "full_bd requires N_BS > (K-1)*N_MS (got N_BS = " +
                       std::to_string(sys.n_bs) + ", (K-1)*N_MS = " +
                       std::to_string((sys.users - 1) * sys.n_ms) + ")";
            const arma::uword null_dim = sys.n_bs - (sys.users - 1) * sys.n_ms;
            const arma::uword max_streams = std::min(sys.n_ms, null_dim);
            if (sys.streams_per_user > max_streams)
                return "full_bd supports at most min(N_MS, N_BS-(K-1)*N_MS) = " +
                       std::to_string(max_streams) + " streams per user (requested " +
                       std::to_string(sys.streams_per_user) + ")";
            break;
        }
        case Scheme::single_path_analytic:
            if (config.channel_kind != ChannelKind::single_path)
                return "single_path_analytic applies only to single_path channels";
            break;
    }
    return "";
}

MultiUserChannel sample_trial_channel(const ScenarioConfig& config, arma::uword trial_index) {
    RngStream beta_stream(derive_seed(config.master_seed, kSeedBeta, trial_index));
    RngStream channel_stream(derive_seed(config.master_seed, kSeedChannel, trial_index));

    std::vector<double> betas(config.system.users);
    for (double& b : betas)
        b = beta_stream.uniform(config.beta_low, config.beta_high);

    switch (config.channel_kind) {
        case ChannelKind::rayleigh:
            return sample_rayleigh(channel_stream, config.geometry_bs, config.geometry_ms,
                                   betas);
        case ChannelKind::mmwave:
            return sample_mmwave(channel_stream, config.mmwave, config.geometry_bs,
                                 config.geometry_ms, betas);
        case ChannelKind::single_path: {
            // Per user: complex gain (large-scale fading folded in), then
            // AoA, then AoD, both uniform over the full circle.
            std::vector<std::complex<double>> alphas(config.system.users);
            std::vector<double> aoas(config.system.users), aods(config.system.users);
            for (arma::uword k = 0; k < config.system.users; ++k) {
                alphas[k] = std::sqrt(betas[k]) * channel_stream.complex_gaussian();
                aoas[k] = channel_stream.uniform(0.0, 2.0 * arma::datum::pi);
                aods[k] = channel_stream.uniform(0.0, 2.0 * arma::datum::pi);
            }
            return single_path_channel(alphas, aoas, aods, config.geometry_bs,
                                       config.geometry_ms);
        }
    }
    throw std::logic_error("sample_trial_channel: unreachable");
}

namespace {

TrialSchemeResult run_hybrid_scheme(const ScenarioConfig& config,
                                    const MultiUserChannel& channel,
                                    const std::vector<double>& snrs) {
    TrialSchemeResult r;
    r.scheme = Scheme::hybd;

    const DftCodebook codebook = build_dft_codebook(config.system.n_ms);
    std::vector<RfCombiner> combiners;
    combiners.reserve(config.system.users);
    for (arma::uword k = 0; k < config.system.users; ++k) {
        combiners.push_back(select_rf_combiner(channel.per_user_matrix[k], codebook,
                                               config.system.rf_chains_ms));
        r.combiner_indices.push_back(combiners.back().selected_indices);
    }
    const arma::cx_mat h_int = build_intermediate_channel(channel, combiners);
    const RfPrecoder f = egt_precoder(h_int);
    const EquivalentChannel eq = equivalent_channel(h_int, f, combiners);
    const BdResult bd = block_diagonalize(eq);

    std::vector<arma::cx_mat> blocks;
    blocks.reserve(config.system.users);
    for (arma::uword k = 0; k < config.system.users; ++k)
        blocks.push_back(combiners[k].matrix.t() * channel.per_user_matrix[k] * f.matrix);

    SystemConfig sys = config.system;
    for (double snr_db : snrs) {
        sys.snr_db = snr_db;
        const StreamGains gains = stream_gains(bd, sys);
        const AllocationResult alloc = proportional_waterfill(
            gains, sys.weights, static_cast<double>(sys.total_streams()));
        const HybridDesign design =
            assemble_hybrid_design(eq, bd, sys, alloc, f, combiners);
        r.per_snr.push_back(
            sum_rate_general_blocks(blocks, design, sys.snr_linear(), "hybd"));
        r.water_levels.push_back(alloc.water_level_multiplier);
        r.nulling_residual =
            std::max(r.nulling_residual, nulling_residual_blocks(blocks, design));
    }
    return r;
}

TrialSchemeResult run_full_bd_scheme(const ScenarioConfig& config,
                                     const MultiUserChannel& channel,
                                     const std::vector<double>& snrs) {
    TrialSchemeResult r;
    r.scheme = Scheme::full_bd;
    const BdResult bd = block_diagonalize_raw(channel.per_user_matrix);
    const std::vector<arma::cx_mat>& blocks = channel.per_user_matrix; // identity F, W

    SystemConfig sys = config.system;
    for (double snr_db : snrs) {
        sys.snr_db = snr_db;
        const StreamGains gains = stream_gains(bd, sys);
        const AllocationResult alloc = proportional_waterfill(
            gains, sys.weights, static_cast<double>(sys.total_streams()));
        const HybridDesign design = assemble_full_bd(bd, sys, alloc);
        r.per_snr.push_back(
            sum_rate_general_blocks(blocks, design, sys.snr_linear(), "full_bd"));
        r.water_levels.push_back(alloc.water_level_multiplier);
        r.nulling_residual =
            std::max(r.nulling_residual, nulling_residual_blocks(blocks, design));
    }
    return r;
}

TrialSchemeResult run_analytic_scheme(const ScenarioConfig& config,
                                      const MultiUserChannel& channel,
                                      const std::vector<double>& snrs) {
    TrialSchemeResult r;
    r.scheme = Scheme::single_path_analytic;
    std::vector<std::complex<double>> alphas;
    alphas.reserve(channel.per_user_paths.size());
    for (const auto& paths : channel.per_user_paths)
        alphas.push_back(paths.at(0).gain);
    for (double snr_db : snrs) {
        const double snr = std::pow(10.0, snr_db / 10.0);
        r.per_snr.push_back(approx_rate_single_path(alphas, config.system.n_bs,
                                                    config.system.n_ms, snr,
                                                    config.system.weights,
                                                    "single_path_analytic"));
    }
    return r;
}

} // namespace

TrialResult run_trial(const ScenarioConfig& config, arma::uword trial_index) {
    const auto start = std::chrono::steady_clock::now();
    TrialResult result;
    result.trial_index = trial_index;

    bool any_feasible = false;
    for (Scheme s : config.schemes)
        if (scheme_infeasibility(config, s).empty())
            any_feasible = true;

    MultiUserChannel channel;
    if (any_feasible)
        channel = sample_trial_channel(config, trial_index);
    const std::vector<double> snrs = config.snr_points();

    for (Scheme s : config.schemes) {
        if (!scheme_infeasibility(config, s).empty()) {
            TrialSchemeResult r;
            r.scheme = s;
            r.feasible = false;
            result.per_scheme.push_back(std::move(r));
            continue;
        }
        switch (s) {
            case Scheme::hybd:
                result.per_scheme.push_back(run_hybrid_scheme(config, channel, snrs));
                break;
            case Scheme::full_bd:
                result.per_scheme.push_back(run_full_bd_scheme(config, channel, snrs));
                break;
            case Scheme::single_path_analytic:
                result.per_scheme.push_back(run_analytic_scheme(config, channel, snrs));
                break;
        }
    }

    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

std::vector<TrialResult> run_point_trials(const ScenarioConfig& point, unsigned threads,
                                          const TrialSink& sink) {
    bool any_feasible = false;
    for (Scheme s : point.schemes)
        if (scheme_infeasibility(point, s).empty())
            any_feasible = true;
    if (!any_feasible)
        return {};

    std::vector<TrialResult> results(point.trials);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(point.trials)));
    if (workers == 1) {
        for (arma::uword t = 0; t < point.trials; ++t)
            results[t] = run_trial(point, t);
    } else {
        std::atomic<arma::uword> next{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                try {
                    for (arma::uword t = next.fetch_add(1); t < point.trials;
                         t = next.fetch_add(1))
                        results[t] = run_trial(point, t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }

    if (sink)
        for (const TrialResult& r : results)
            sink(point, r);
    return results;
}

void aggregate_point(const ScenarioConfig& base, const ScenarioConfig& point,
                     const std::string& sweep_param, double sweep_value,
                     const std::vector<TrialResult>& results, SweepTable& table) {
    const std::vector<double> snrs = point.snr_points();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t si = 0; si < point.schemes.size(); ++si) {
        const Scheme scheme = point.schemes[si];
        const bool feasible =
            scheme_infeasibility(point, scheme).empty() && !results.empty();
        for (std::size_t gi = 0; gi < snrs.size(); ++gi) {
            SweepRow row;
            row.scenario = base.name;
            row.scheme = scheme_name(scheme);
            row.channel_kind = channel_kind_name(point.channel_kind);
            row.sweep_param = sweep_param;
            row.sweep_value = sweep_param == "snr" ? snrs[gi] : sweep_value;
            row.snr_db = snrs[gi];
            row.feasible = feasible;
            if (!feasible) {
                row.trials = 0;
                row.mean_sum_rate = nan;
                row.stderr_sum_rate = nan;
                row.mean_per_user_rate_min = nan;
                row.mean_per_user_rate_max = nan;
                table.rows.push_back(std::move(row));
                continue;
            }

            const double n = static_cast<double>(results.size());
            double sum = 0.0, sum_sq = 0.0, min_sum = 0.0, max_sum = 0.0;
            for (const TrialResult& trial : results) {
                const RateReport& report = trial.per_scheme[si].per_snr[gi];
                sum += report.sum_rate;
                sum_sq += report.sum_rate * report.sum_rate;
                double lo = report.per_user_rate.front(), hi = lo;
                for (double r : report.per_user_rate) {
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
                min_sum += lo;
                max_sum += hi;
            }
            const double mean = sum / n;
            row.trials = results.size();
            row.mean_sum_rate = mean;
            row.stderr_sum_rate =
                results.size() > 1
                    ? std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) / n)
                    : 0.0;
            row.mean_per_user_rate_min = min_sum / n;
            row.mean_per_user_rate_max = max_sum / n;
            table.rows.push_back(std::move(row));
        }
    }
}

} // namespace

SweepTable run_sweep(const ScenarioConfig& config, unsigned threads, const TrialSink& sink) {
    config.validate();
    SweepTable table;
    if (config.sweep.parameter == SweepSpec::Parameter::none ||
        config.sweep.parameter == SweepSpec::Parameter::snr) {
        const std::vector<TrialResult> results = run_point_trials(config, threads, sink);
        aggregate_point(config, config, "snr", 0.0, results, table);
        return table;
    }

    const std::string param = sweep_param_name(config.sweep.parameter);
    for (double value : config.sweep.values) {
        const ScenarioConfig point = config.at_sweep_value(value);
        const std::vector<TrialResult> results = run_point_trials(point, threads, sink);
        aggregate_point(config, point, param, value, results, table);
    }
    return table;
}

std::string csv_to_string(const SweepTable& table) {
    std::string out =
        "scenario,scheme,channel_kind,sweep_param,sweep_value,snr_db,trials,"
        "mean_sum_rate_bps_hz,stderr_sum_rate,mean_per_user_rate_min,"
        "mean_per_user_rate_max,feasible\n";
    char buf[256];
    for (const SweepRow& row : table.rows) {
        out += row.scenario;
        out += ',';
        out += row.scheme;
        out += ',';
        out += row.channel_kind;
        out += ',';
        out += row.sweep_param;
        std::snprintf(buf, sizeof(buf), ",%.10g,%.10g,%llu,%.10g,%.10g,%.10g,%.10g,%d\n",
                      row.sweep_value, row.snr_db,
                      static_cast<unsigned long long>(row.trials), row.mean_sum_rate,
                      row.stderr_sum_rate, row.mean_per_user_rate_min,
                      row.mean_per_user_rate_max, row.feasible ? 1 : 0);
        out += buf;
    }
    return out;
}

void emit_csv(const SweepTable& table, const std::string& path) {
    if (table.rows.empty())
        throw std::invalid_argument("emit_csv: refusing to write an empty table");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw io_error("cannot open CSV output file: " + path);
    const std::string text = csv_to_string(table);
    const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
    if (std::fclose(f) != 0 || written != text.size())
        throw io_error("failed writing CSV output file: " + path);
}

void write_plot_script(const std::string& csv_path, const std::string& script_path) {
    std::ofstream out(script_path);
    if (!out)
        throw io_error("cannot open plot script for writing: " + script_path);
    out << "#!/usr/bin/env python3\n"
        << "# Plots a hybd sweep CSV (presentation only; no computation).\n"
        << "import csv\n"
        << "import collections\n"
        << "import matplotlib\n"
        << "matplotlib.use(\"Agg\")\n"
        << "import matplotlib.pyplot as plt\n"
        << "\n"
        << "CSV = " << std::quoted(csv_path) << "\n"
        << "rows = [r for r in csv.DictReader(open(CSV)) if r[\"feasible\"] == \"1\"]\n"
        << "snr_sweep = all(r[\"sweep_param\"] == \"snr\" for r in rows)\n"
        << "series = collections.defaultdict(list)\n"
        << "for r in rows:\n"
        << "    if snr_sweep:\n"
        << "        key = r[\"scheme\"]\n"
        << "        x = float(r[\"snr_db\"])\n"
        << "    else:\n"
        << "        key = \"%s @ %s dB\" % (r[\"scheme\"], r[\"snr_db\"])\n"
        << "        x = float(r[\"sweep_value\"])\n"
        << "    series[key].append((x, float(r[\"mean_sum_rate_bps_hz\"])))\n"
        << "fig, ax = plt.subplots(figsize=(7, 5))\n"
        << "for key in sorted(series):\n"
        << "    pts = sorted(series[key])\n"
        << "    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=\"o\", label=key)\n"
        << "param = rows[0][\"sweep_param\"] if rows else \"snr\"\n"
        << "ax.set_xlabel(\"SNR (dB)\" if snr_sweep else param)\n"
        << "ax.set_ylabel(\"sum spectral efficiency (bits/s/Hz)\")\n"
        << "ax.set_title(rows[0][\"scenario\"] if rows else CSV)\n"
        << "ax.grid(True)\n"
        << "ax.legend()\n"
        << "fig.savefig(CSV.rsplit(\".\", 1)[0] + \".png\", dpi=150)\n"
        << "print(\"wrote\", CSV.rsplit(\".\", 1)[0] + \".png\")\n";
    if (!out)
        throw io_error("failed writing plot script: " + script_path);
}

void write_channels(const ScenarioConfig& config, const std::string& out_dir) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw io_error("cannot create channel output directory: " + out_dir);
    for (arma::uword t = 0; t < config.trials; ++t) {
        const MultiUserChannel channel = sample_trial_channel(config, t);
        const std::string path =
            out_dir + "/" + config.name + "_trial" + std::to_string(t) + ".txt";
        write_channel_file(channel, derive_seed(config.master_seed, kSeedChannel, t), path);
    }
}

} // namespace hybd
