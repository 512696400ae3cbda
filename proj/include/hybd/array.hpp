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

#include <armadillo>

namespace hybd {

enum class ArrayKind { ULA, UPA };

// Antenna panel description. Only the element count, the planar
// factorization and the spacing-to-wavelength ratio enter the response.
struct ArrayGeometry {
    ArrayKind kind = ArrayKind::ULA;
    arma::uword elements_total = 1;
    arma::uword rows = 1; // UPA only; rows * cols == elements_total
    arma::uword cols = 1;
    double spacing_over_wavelength = 0.5;

    static ArrayGeometry ula(arma::uword n, double spacing = 0.5);
    static ArrayGeometry upa(arma::uword rows, arma::uword cols, double spacing = 0.5);

    void validate() const; // throws std::invalid_argument
};

// Unit-norm steering vector of an N-element uniform linear array,
// element n carrying phase n * 2*pi * (d/lambda) * sin(azimuth).
arma::cx_vec ula_response(const ArrayGeometry& geometry, double azimuth);

// Unit-norm steering vector of a rows x cols planar array. Element (r, c)
// carries phase 2*pi*(d/lambda) * (r*sin(el) + c*sin(az)*cos(el)), columns
// varying fastest.
arma::cx_vec upa_response(const ArrayGeometry& geometry, double azimuth, double elevation);

// Dispatch on geometry kind; elevation is ignored for a ULA.
arma::cx_vec array_response(const ArrayGeometry& geometry, double azimuth,
                            double elevation = 0.0);

} // namespace hybd
