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

#include <stdexcept>
#include <string>

namespace hybd {

// A transceiver design cannot exist for the requested dimensions
// (e.g. an empty interference null space). The message names the
// violated dimension condition.
class design_infeasible : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent scenario configuration.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure; the message names the offending path.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Water-filling was asked to spread power over streams whose gains are
// all zero.
class no_usable_streams : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace hybd
