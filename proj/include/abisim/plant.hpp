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
#include <optional>

#include "abisim/drive.hpp"
#include "abisim/noise.hpp"
#include "abisim/optics.hpp"

namespace abisim {

/// Where the lock feedback is applied.
enum class ActuatorMode {
    pzt,  // mirror PZT: phase plus walk-off visibility loss
    rf2,  // RF₂ phase: wrapped, no walk-off
};

struct PlantConfig {
    /// Splitting amplitudes, leakages, static path phase, V and η. The AOM θ
    /// fields are ignored; drive phases come from rf1/rf2.
    AbiConfig optics;
    RfDrive rf1;
    RfDrive rf2;
    double diffusion = 0.0;
    std::uint64_t drift_seed = 0;
    PztModel pzt;
    double actuator_bias_v = 0.0;
    ActuatorMode actuator = ActuatorMode::pzt;
    double sample_hz = 4e6;
    /// Propagate complex amplitudes through the two AOMs each sample instead
    /// of the closed-form intensities. Slower; used to cross-check.
    bool field_mode = false;

    void validate() const;
};

/// State of the interferometer at one simulation sample. Intensities are per
/// unit intensity entering port b.
struct PlantSample {
    std::uint64_t index = 0;
    double t = 0.0;
    bool rf1_on = true;
    bool rf2_on = true;
    double overall_phase = 0.0;  // φ including dither and beat
    double control_phase = 0.0;  // φ without the dither modulation
    double visibility = 1.0;     // after walk-off
    double e = 0.0;
    double f = 0.0;
    double actuator_v = 0.0;
    bool actuator_saturated = false;
};

/// Time-stepped interferometer: drives, drift, actuator and optics.
class Plant {
   public:
    explicit Plant(PlantConfig cfg);

    /// Evaluates the current sample, then advances time by one step.
    const PlantSample &step();

    void set_actuator(double volts);
    double actuator() const { return actuator_v_; }

    double dt() const { return dt_; }
    std::uint64_t next_index() const { return index_; }
    double next_time() const { return static_cast<double>(index_) * dt_; }
    const PlantConfig &config() const { return cfg_; }

    /// Dither frequency, depth and the sign with which it enters φ
    /// (−1 when on RF₁, +1 when on RF₂). Depth 0 when no drive is dithered.
    double dither_hz() const;
    double dither_depth() const;
    double dither_sign() const;

    /// Visibility in effect for the current actuator value.
    double current_visibility() const;

   private:
    PlantConfig cfg_;
    double dt_;
    std::uint64_t index_ = 0;
    DriftModel drift_;
    double actuator_v_ = 0.0;
    PztResponse pzt_;
    SplitAmplitudes amps_[2][2];  // [rf1_on][rf2_on]
    PlantSample sample_;

    void refresh_actuator();
};

}  // namespace abisim
