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

#include "abisim/isolation.hpp"

#include <cmath>
#include <numbers>

#include "abisim/errors.hpp"

namespace abisim {

IsolationResult isolation_db(const RateMeasurement &on, const RateMeasurement &off,
                             double attenuation_db) {
    if (!(on.exposure > 0.0 && off.exposure > 0.0)) {
        throw ConfigError("isolation: both measurements need a positive exposure");
    }
    if (on.amount < 0.0 || off.amount < 0.0) {
        throw ConfigError("isolation: negative measurement");
    }
    IsolationResult r;
    r.on_rate = on.rate();
    r.off_rate = off.rate();
    r.attenuation_db = attenuation_db;
    if (r.on_rate > 0.0 && r.off_rate > 0.0) {
        r.isolation_db = 10.0 * std::log10(r.on_rate / r.off_rate) + attenuation_db;
    } else if (r.on_rate > 0.0) {
        r.lower_bound_db = 10.0 * std::log10(r.on_rate * off.exposure) + attenuation_db;
    }
    return r;
}

double double_diffraction_leakage(const AbiConfig &cfg) {
    return cfg.aom1.off_leakage_power * cfg.aom2.off_leakage_power;
}

IsolationResult double_diffraction_isolation(const AbiConfig &cfg) {
    cfg.validate();
    AbiConfig on = cfg;
    on.aom1.rf_on = on.aom2.rf_on = true;
    // Shifted-port maximum for light entering port b.
    const PortPower max_on =
        envelope_intensities(SplitAmplitudes::from(on), 0.0, cfg.visibility, cfg.efficiency, 1.0);
    const double off = cfg.efficiency * double_diffraction_leakage(cfg);
    return isolation_db({max_on.e, 1.0}, {off, 1.0}, 0.0);
}

IsolationResult direct_pass_isolation(double efficiency, double visibility) {
    const double locked_min = observed_intensity(efficiency, visibility, 0.0, 0.0,
                                                 std::numbers::pi, 1.0);
    return isolation_db({1.0, 1.0}, {locked_min, 1.0}, 0.0);
}

}  // namespace abisim
