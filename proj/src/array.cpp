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

#include "hybd/array.hpp"

#include <cmath>
#include <stdexcept>

namespace hybd {

namespace {

// (1/sqrt(n)) * exp(j * 2*pi * spacing * phase_arg * k), k = 0..n-1
arma::cx_vec steering(arma::uword n, double spacing, double phase_arg) {
    arma::cx_vec v(n);
    const double step = 2.0 * arma::datum::pi * spacing * phase_arg;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (arma::uword k = 0; k < n; ++k)
        v(k) = std::polar(scale, step * static_cast<double>(k));
    return v;
}

} // namespace

ArrayGeometry ArrayGeometry::ula(arma::uword n, double spacing) {
    ArrayGeometry g;
    g.kind = ArrayKind::ULA;
    g.elements_total = n;
    g.rows = 1;
    g.cols = n;
    g.spacing_over_wavelength = spacing;
    g.validate();
    return g;
}

ArrayGeometry ArrayGeometry::upa(arma::uword rows, arma::uword cols, double spacing) {
    ArrayGeometry g;
    g.kind = ArrayKind::UPA;
    g.elements_total = rows * cols;
    g.rows = rows;
    g.cols = cols;
    g.spacing_over_wavelength = spacing;
    g.validate();
    return g;
}

void ArrayGeometry::validate() const {
    if (elements_total < 1)
        throw std::invalid_argument("ArrayGeometry: elements_total must be >= 1");
    if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength))
        throw std::invalid_argument("ArrayGeometry: spacing_over_wavelength must be positive");
    if (kind == ArrayKind::UPA) {
        if (rows < 1 || cols < 1 || rows * cols != elements_total)
            throw std::invalid_argument("ArrayGeometry: UPA requires rows*cols == elements_total");
    }
}

arma::cx_vec ula_response(const ArrayGeometry& geometry, double azimuth) {
    geometry.validate();
    if (geometry.kind != ArrayKind::ULA)
        throw std::invalid_argument("ula_response: geometry is not a ULA");
    if (!std::isfinite(azimuth))
        throw std::invalid_argument("ula_response: azimuth must be finite");
    return steering(geometry.elements_total, geometry.spacing_over_wavelength,
                    std::sin(azimuth));
}

arma::cx_vec upa_response(const ArrayGeometry& geometry, double azimuth, double elevation) {
    geometry.validate();
    if (geometry.kind != ArrayKind::UPA)
        throw std::invalid_argument("upa_response: geometry is not a UPA");
    if (!std::isfinite(azimuth) || !std::isfinite(elevation))
        throw std::invalid_argument("upa_response: angles must be finite");
    const double s = geometry.spacing_over_wavelength;
    return arma::kron(steering(geometry.rows, s, std::sin(elevation)),
                      steering(geometry.cols, s, std::sin(azimuth) * std::cos(elevation)));
}

arma::cx_vec array_response(const ArrayGeometry& geometry, double azimuth, double elevation) {
    if (geometry.kind == ArrayKind::ULA)
        return ula_response(geometry, azimuth);
    return upa_response(geometry, azimuth, elevation);
}

} // namespace hybd
