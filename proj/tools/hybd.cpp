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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybd/errors.hpp"
#include "hybd/sim.hpp"
#include "hybd/validate.hpp"

namespace {

// Exit codes: 0 success, 1 invalid config, 2 invariant failure, 3 I/O error.
constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;

hybd::TrialSink make_trial_log_sink(std::ofstream& log) {
    return [&log](const hybd::ScenarioConfig& point, const hybd::TrialResult& trial) {
        nlohmann::json entry;
        entry["scenario"] = point.name;
        entry["users"] = point.system.users;
        entry["streams_per_user"] = point.system.streams_per_user;
        entry["trial"] = trial.trial_index;
        entry["wall_time_s"] = trial.wall_time_s;
        nlohmann::json schemes = nlohmann::json::array();
        for (const hybd::TrialSchemeResult& r : trial.per_scheme) {
            nlohmann::json s;
            s["scheme"] = hybd::scheme_name(r.scheme);
            s["feasible"] = r.feasible;
            if (r.feasible) {
                s["nulling_residual"] = r.nulling_residual;
                nlohmann::json sums = nlohmann::json::array();
                for (const hybd::RateReport& report : r.per_snr)
                    sums.push_back(report.sum_rate);
                s["sum_rates"] = sums;
                if (!r.water_levels.empty())
                    s["water_levels"] = r.water_levels;
                if (!r.combiner_indices.empty())
                    s["combiner_indices"] = r.combiner_indices;
            }
            schemes.push_back(std::move(s));
        }
        entry["schemes"] = std::move(schemes);
        log << entry.dump() << '\n';
    };
}

int run_or_sweep(const std::string& config_path, const std::string& out_path,
                 unsigned threads, const std::string& plot_script,
                 const std::string& trial_log, bool allow_dimension_sweep) {
    const hybd::ScenarioConfig cfg = hybd::load_scenario_file(config_path);
    if (!allow_dimension_sweep &&
        (cfg.sweep.parameter == hybd::SweepSpec::Parameter::n_s ||
         cfg.sweep.parameter == hybd::SweepSpec::Parameter::k))
        throw hybd::config_error(
            "config declares an '" + std::string(cfg.sweep.parameter ==
                                                         hybd::SweepSpec::Parameter::n_s
                                                     ? "n_s"
                                                     : "k") +
            "' sweep; use the 'sweep' subcommand");

    std::ofstream log;
    hybd::TrialSink sink;
    if (!trial_log.empty()) {
        log.open(trial_log);
        if (!log)
            throw hybd::io_error("cannot open trial log for writing: " + trial_log);
        sink = make_trial_log_sink(log);
    }

    const hybd::SweepTable table = hybd::run_sweep(cfg, threads, sink);
    if (out_path.empty()) {
        std::fputs(hybd::csv_to_string(table).c_str(), stdout);
    } else {
        hybd::emit_csv(table, out_path);
        std::fprintf(stderr, "wrote %zu rows to %s\n", table.rows.size(),
                     out_path.c_str());
    }
    if (!plot_script.empty()) {
        hybd::write_plot_script(out_path, plot_script);
        std::fprintf(stderr, "wrote plot script %s\n", plot_script.c_str());
    }
    return kExitOk;
}

int do_validate(std::uint64_t seed) {
    const std::vector<hybd::InvariantCheck> checks = hybd::run_invariant_suite(seed);
    bool all_pass = true;
    for (const hybd::InvariantCheck& c : checks) {
        std::printf("[%s] %-32s residual=%.3e tolerance=%.3e\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.tolerance);
        all_pass = all_pass && c.pass;
    }
    std::printf("%zu invariants checked, %s (seed %llu)\n", checks.size(),
                all_pass ? "all passed" : "FAILURES PRESENT",
                static_cast<unsigned long long>(seed));
    return all_pass ? kExitOk : kExitInvariant;
}

int do_channels(const std::string& config_path, const std::string& out_dir) {
    const hybd::ScenarioConfig cfg = hybd::load_scenario_file(config_path);
    hybd::write_channels(cfg, out_dir);
    std::fprintf(stderr, "wrote %llu channel dumps to %s\n",
                 static_cast<unsigned long long>(cfg.trials), out_dir.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    // Single-threaded BLAS keeps every matrix product bit-reproducible; the
    // harness parallelizes across trials instead.
    setenv("OPENBLAS_NUM_THREADS", "1", 1);
    setenv("OMP_NUM_THREADS", "1", 1);

    CLI::App app{"hybrid block diagonalization simulator for massive multiuser "
                 "MIMO downlinks"};
    app.require_subcommand(1);

    std::string config_path, out_path, plot_script, trial_log, out_dir;
    unsigned threads = 1;
    std::uint64_t seed = 1;

    CLI::App* run = app.add_subcommand("run", "run one scenario over its SNR grid");
    run->add_option("config", config_path, "scenario config file (JSON)")->required();
    run->add_option("--out", out_path, "CSV output path (default: stdout)");
    run->add_option("--threads", threads, "worker threads across trials");
    CLI::Option* run_plot =
        run->add_option("--plot-script", plot_script, "write a plotting script here");
    CLI::Option* run_out = run->get_option("--out");
    run_plot->needs(run_out);
    run->add_option("--trial-log", trial_log, "write per-trial JSON lines here");

    CLI::App* sweep = app.add_subcommand("sweep", "run a scenario including its sweep");
    sweep->add_option("config", config_path, "scenario config file (JSON)")->required();
    sweep->add_option("--out", out_path, "CSV output path (default: stdout)");
    sweep->add_option("--threads", threads, "worker threads across trials");
    CLI::Option* sweep_plot =
        sweep->add_option("--plot-script", plot_script, "write a plotting script here");
    sweep_plot->needs(sweep->get_option("--out"));
    sweep->add_option("--trial-log", trial_log, "write per-trial JSON lines here");

    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    validate->add_option("--seed", seed, "seed for the randomized instances");

    CLI::App* channels = app.add_subcommand("channels", "dump channel realizations");
    channels->add_option("config", config_path, "scenario config file (JSON)")->required();
    channels->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        if (run->parsed())
            return run_or_sweep(config_path, out_path, threads, plot_script, trial_log,
                                false);
        if (sweep->parsed())
            return run_or_sweep(config_path, out_path, threads, plot_script, trial_log,
                                true);
        if (validate->parsed())
            return do_validate(seed);
        if (channels->parsed())
            return do_channels(config_path, out_dir);
    } catch (const hybd::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const hybd::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvariant;
    }
    return kExitBadConfig;
}
