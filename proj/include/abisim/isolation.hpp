// Copyright 2026 The abisim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>

#include "abisim/optics.hpp"

namespace abisim {

/// A power or count-rate measurement: rate = amount / exposure.
struct RateMeasurement {
    double amount = 0.0;
    double exposure = 1.0;

    double rate() const { return amount / exposure; }
};

struct IsolationResult {
    double on_rate = 0.0;
    double off_rate = 0.0;
    double attenuation_db = 0.0;
    /// 10·log10(on/off) + attenuation. Empty when either rate is zero.
    std::optional<double> isolation_db;
    /// With zero off counts, the isolation is only known to exceed this
    /// (one count over the off exposure).
    std::optional<double> lower_bound_db;
};

/// Compares an on-state and an off-state measurement. `attenuation_db` is
/// the calibrated attenuation inserted for the on-state measurement only.
IsolationResult isolation_db(const RateMeasurement &on, const RateMeasurement &off,
                             double attenuation_db);

/// Power fraction leaking along the path diffracted by both AOMs while the
/// RF is off: the product of the two off-state leakages.
double double_diffraction_leakage(const AbiConfig &cfg);

/// Switch isolation between the RF-on maximum of the shifted port and the
/// RF-off double-diffraction leakage. Both sides carry the same lumped η.
IsolationResult double_diffraction_isolation(const AbiConfig &cfg);

/// Input power relative to the locked minimum of the direct-pass port.
IsolationResult direct_pass_isolation(double efficiency, double visibility);

}  // namespace abisim
