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

#include "hybd/power_allocation.hpp"

#include <cmath>
#include <stdexcept>

#include "hybd/errors.hpp"

namespace hybd {

namespace {

// sum_n max{w~_n / v - 1/gamma_n, 0} over usable streams; nonincreasing in v.
double load_at_level(double v, const arma::vec& w, const arma::vec& gamma) {
    double total = 0.0;
    for (arma::uword n = 0; n < gamma.n_elem; ++n) {
        if (gamma(n) <= 0.0)
            continue;
        total += std::max(w(n) / v - 1.0 / gamma(n), 0.0);
    }
    return total;
}

} // namespace

AllocationResult proportional_waterfill(const StreamGains& gains,
                                        const std::vector<double>& weights,
                                        double budget) {
    const arma::uword n_streams = gains.gamma.n_elem;
    if (n_streams == 0)
        throw std::invalid_argument("proportional_waterfill: no streams");
    if (weights.empty() || n_streams % weights.size() != 0)
        throw std::invalid_argument(
            "proportional_waterfill: stream count must be a multiple of the user count");
    if (!(budget > 0.0) || !std::isfinite(budget))
        throw std::invalid_argument("proportional_waterfill: budget must be positive");
    for (arma::uword n = 0; n < n_streams; ++n)
        if (!(gains.gamma(n) >= 0.0) || !std::isfinite(gains.gamma(n)))
            throw std::invalid_argument("proportional_waterfill: gains must be finite and >= 0");

    AllocationResult out;
    out.weights_expanded.set_size(n_streams);
    const arma::uword per_user = n_streams / weights.size();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
            throw std::invalid_argument("proportional_waterfill: weights must be positive");
        for (arma::uword i = 0; i < per_user; ++i)
            out.weights_expanded(k * per_user + i) = weights[k];
    }

    const arma::vec& g = gains.gamma;
    const arma::vec& w = out.weights_expanded;
    if (arma::all(g <= 0.0))
        throw no_usable_streams("proportional_waterfill: every stream gain is zero");

    // Bracket the water level: at v_lo a single stream already absorbs the
    // whole budget; at v_hi every stream is shut off.
    double v_lo = 0.0, v_hi = 0.0;
    for (arma::uword n = 0; n < n_streams; ++n) {
        if (g(n) <= 0.0)
            continue;
        v_lo = std::max(v_lo, w(n) / (budget + 1.0 / g(n)));
        v_hi = std::max(v_hi, w(n) * g(n));
    }
    v_hi = std::max(v_hi, v_lo * 2.0);

    double v = 0.5 * (v_lo + v_hi);
    for (int it = 0; it < 200; ++it) {
        v = 0.5 * (v_lo + v_hi);
        if (load_at_level(v, w, g) > budget)
            v_lo = v;
        else
            v_hi = v;
    }

    // Exact polish: with the active set fixed, sum_A (w/v - 1/g) = budget
    // gives v in closed form.
    double w_sum = 0.0, inv_g_sum = 0.0;
    bool any_active = false;
    for (arma::uword n = 0; n < n_streams; ++n) {
        if (g(n) > 0.0 && w(n) / v - 1.0 / g(n) > 0.0) {
            w_sum += w(n);
            inv_g_sum += 1.0 / g(n);
            any_active = true;
        }
    }
    if (any_active) {
        const double v_exact = w_sum / (budget + inv_g_sum);
        // Keep the polish only if it does not flip the active set.
        bool consistent = true;
        for (arma::uword n = 0; n < n_streams; ++n) {
            if (g(n) <= 0.0)
                continue;
            const bool was = w(n) / v - 1.0 / g(n) > 0.0;
            const bool now = w(n) / v_exact - 1.0 / g(n) > 0.0;
            if (was != now) {
                consistent = false;
                break;
            }
        }
        if (consistent)
            v = v_exact;
    }

    out.water_level_multiplier = v;
    out.lambda.set_size(n_streams);
    for (arma::uword n = 0; n < n_streams; ++n)
        out.lambda(n) = g(n) > 0.0 ? std::max(w(n) / v - 1.0 / g(n), 0.0) : 0.0;
    return out;
}

AllocationResult waterfill(const StreamGains& gains, double budget) {
    const arma::uword n = gains.gamma.n_elem;
    if (n == 0)
        throw std::invalid_argument("waterfill: no streams");
    return proportional_waterfill(gains, std::vector<double>(n, 1.0), budget);
}

double kkt_residual(const AllocationResult& result, const StreamGains& gains,
                    double budget) {
    const arma::vec& lam = result.lambda;
    const arma::vec& g = gains.gamma;
    const arma::vec& w = result.weights_expanded;
    if (lam.n_elem != g.n_elem || w.n_elem != g.n_elem)
        throw std::invalid_argument("kkt_residual: dimension mismatch");
    const double v = result.water_level_multiplier;

    double stationarity = 0.0, dual = 0.0, negativity = 0.0;
    for (arma::uword n = 0; n < g.n_elem; ++n) {
        const double marginal = w(n) * g(n) / (1.0 + g(n) * lam(n));
        stationarity = std::max(stationarity, std::abs(lam(n) * (v - marginal)));
        if (lam(n) == 0.0)
            dual += std::max(0.0, marginal - v);
        negativity += std::max(0.0, -lam(n));
    }
    return stationarity + std::abs(arma::accu(lam) - budget) + negativity + dual;
}

} // namespace hybd
