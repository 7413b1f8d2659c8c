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

#include "abisim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abisim/errors.hpp"

namespace abisim {

DriftModel::DriftModel(double diffusion, std::uint64_t seed, double initial_phase)
    : diffusion_(diffusion), seed_(seed), phase_(initial_phase), rng_(seed) {
    if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) {
        throw ConfigError("drift diffusion must be non-negative");
    }
}

double DriftModel::step(double dt) {
    // Always draw so runs with different diffusion share one noise realisation.
    const double z = normal_(rng_);
    phase_ += std::sqrt(diffusion_ * dt) * z;
    return phase_;
}

void PztModel::validate() const {
    if (!(gain != 0.0) || !std::isfinite(gain)) throw ConfigError("PZT gain must be nonzero");
    if (!(walkoff_scale_v > 0.0)) throw ConfigError("PZT walk-off scale must be positive");
    if (!(v_min < v_max)) throw ConfigError("PZT voltage range is empty");
    if (!(v0_visibility >= 0.0 && v0_visibility <= 1.0)) {
        throw ConfigError("PZT baseline visibility must lie in [0, 1]");
    }
}

PztResponse pzt_apply(const PztModel &m, double volts) {
    PztResponse r;
    r.applied_v = std::clamp(volts, m.v_min, m.v_max);
    r.saturated = r.applied_v != volts;
    r.phase = m.gain * r.applied_v;
    const double x = r.applied_v / m.walkoff_scale_v;
    r.visibility_factor = std::max(std::exp(-x * x), std::numeric_limits<double>::min());
    r.effective_visibility = m.v0_visibility * r.visibility_factor;
    return r;
}

double calibrate_walkoff_scale(double excursion_v, double v0, double v_target) {
    if (!(v_target > 0.0 && v_target < v0)) {
        throw ConfigError("target visibility must lie strictly between 0 and the baseline");
    }
    if (!(excursion_v > 0.0)) throw ConfigError("excursion must be positive");
    return excursion_v / std::sqrt(-std::log(v_target / v0));
}

}  // namespace abisim
