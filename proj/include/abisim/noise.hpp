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

#include <cstdint>
#include <numbers>
#include <random>

#include "abisim/random.hpp"

namespace abisim {

/// Diffusion giving roughly π of free-running fringe drift per second.
inline constexpr double kDefaultDiffusion = std::numbers::pi * std::numbers::pi;

/// Wiener-process phase drift of the free-running interferometer. Stateful,
/// one instance per simulated timeline.
class DriftModel {
   public:
    DriftModel(double diffusion, std::uint64_t seed, double initial_phase = 0.0);

    /// Advances by dt, adding an N(0, diffusion·dt) increment.
    double step(double dt);

    double current_phase() const { return phase_; }
    double diffusion() const { return diffusion_; }
    std::uint64_t seed() const { return seed_; }

   private:
    double diffusion_;
    std::uint64_t seed_;
    double phase_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double drift_step(DriftModel &m, double dt) { return m.step(dt); }

struct PztModel {
    double gain = 1.0;  // rad/V
    double v_min = -75.0;
    double v_max = 75.0;
    double walkoff_scale_v = 40.8;  // voltage scale of the Gaussian overlap loss
    double v0_visibility = 1.0;

    void validate() const;
};

struct PztResponse {
    double applied_v = 0.0;  // after clamping to the actuator range
    double phase = 0.0;
    double visibility_factor = 1.0;
    double effective_visibility = 1.0;
    bool saturated = false;
};

/// Phase shift and walk-off visibility factor exp(−(v/v_s)²) at a drive
/// voltage. Out-of-range voltages rail and set `saturated`.
PztResponse pzt_apply(const PztModel &m, double volts);

/// Walk-off scale such that a displacement of `excursion_v` reduces the
/// visibility from v0 to v_target.
double calibrate_walkoff_scale(double excursion_v, double v0, double v_target);

}  // namespace abisim
