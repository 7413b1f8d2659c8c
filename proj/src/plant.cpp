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

#include "abisim/plant.hpp"

#include <cmath>
#include <numbers>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

double wrap_pi(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

}  // namespace

void PlantConfig::validate() const {
    optics.validate();
    rf1.validate();
    rf2.validate();
    pzt.validate();
    if (!(sample_hz > 0.0)) throw ConfigError("simulation sample rate must be positive");
    if (rf1.dither_depth > 0.0 && rf2.dither_depth > 0.0) {
        throw ConfigError("dither may be applied to only one RF drive");
    }
    if (!(diffusion >= 0.0)) throw ConfigError("drift diffusion must be non-negative");
}

Plant::Plant(PlantConfig cfg)
    : cfg_(std::move(cfg)),
      dt_(1.0 / cfg_.sample_hz),
      drift_(cfg_.diffusion, cfg_.drift_seed),
      actuator_v_(cfg_.actuator_bias_v) {
    cfg_.validate();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            AbiConfig c = cfg_.optics;
            c.aom1.rf_on = a != 0;
            c.aom2.rf_on = b != 0;
            amps_[a][b] = SplitAmplitudes::from(c);
        }
    }
    refresh_actuator();
}

void Plant::refresh_actuator() {
    if (cfg_.actuator == ActuatorMode::pzt) {
        pzt_ = pzt_apply(cfg_.pzt, actuator_v_);
    } else {
        pzt_ = PztResponse{};
        pzt_.applied_v = actuator_v_;
        pzt_.phase = wrap_pi(cfg_.pzt.gain * actuator_v_);
    }
}

void Plant::set_actuator(double volts) {
    if (volts == actuator_v_) return;
    actuator_v_ = volts;
    refresh_actuator();
}

double Plant::dither_hz() const {
    return cfg_.rf1.dither_depth > 0.0 ? cfg_.rf1.dither_hz : cfg_.rf2.dither_hz;
}

double Plant::dither_depth() const {
    return cfg_.rf1.dither_depth > 0.0 ? cfg_.rf1.dither_depth : cfg_.rf2.dither_depth;
}

double Plant::dither_sign() const { return cfg_.rf1.dither_depth > 0.0 ? -1.0 : 1.0; }

double Plant::current_visibility() const {
    return cfg_.optics.visibility *
           (cfg_.actuator == ActuatorMode::pzt ? pzt_.visibility_factor : 1.0);
}

const PlantSample &Plant::step() {
    const double t = static_cast<double>(index_) * dt_;
    PlantSample &s = sample_;
    s.index = index_;
    s.t = t;
    s.rf1_on = gate_state(cfg_.rf1.gate, t);
    s.rf2_on = gate_state(cfg_.rf2.gate, t);

    const double dither1 = instantaneous_phase(cfg_.rf1, t) - cfg_.rf1.phase0;
    const double dither2 = instantaneous_phase(cfg_.rf2, t) - cfg_.rf2.phase0;
    const double theta1 = cfg_.rf1.phase0 + dither1;
    double theta2 = cfg_.rf2.phase0 + dither2 + drive_detuning_phase(cfg_.rf2, cfg_.rf1, t);
    double path = cfg_.optics.path_phase + drift_.current_phase();
    if (cfg_.actuator == ActuatorMode::pzt) {
        path += pzt_.phase;
    } else {
        theta2 += pzt_.phase;
    }
    s.overall_phase = path - theta1 + theta2;
    s.control_phase = s.overall_phase + dither1 - dither2;
    s.visibility = current_visibility();
    s.actuator_v = pzt_.applied_v;
    s.actuator_saturated = pzt_.saturated;

    const double eta = cfg_.optics.efficiency;
    const double level1 = gate_level(cfg_.rf1.gate, t);
    const double level2 = gate_level(cfg_.rf2.gate, t);
    const bool ramping = (level1 != 0.0 && level1 != 1.0) || (level2 != 0.0 && level2 != 1.0);

    if (cfg_.field_mode || ramping) {
        AbiConfig c = cfg_.optics;
        c.aom1.theta = theta1;
        c.aom2.theta = theta2;
        c.path_phase = path;
        c.visibility = s.visibility;
        if (ramping) {
            // Linear edge: interpolate the diffraction amplitude.
            c.aom1.r = level1 * c.aom1.r + (1.0 - level1) * std::sqrt(c.aom1.off_leakage_power);
            c.aom2.r = level2 * c.aom2.r + (1.0 - level2) * std::sqrt(c.aom2.off_leakage_power);
        } else {
            c.aom1.rf_on = s.rf1_on;
            c.aom2.rf_on = s.rf2_on;
        }
        const double rf = c.aom1.rf_frequency;
        c.aom2.rf_frequency = rf;
        const PortField in_a{Port::a, {1, rf}, {0.0, 0.0}};
        const PortField in_b{Port::b, {0, rf}, {1.0, 0.0}};
        const AbiOutput out = abi_transfer(in_a, in_b, c);
        s.e = out.e_intensity();
        s.f = out.f_intensity();
    } else {
        const PortPower p = envelope_intensities(amps_[s.rf1_on][s.rf2_on], s.overall_phase,
                                                 s.visibility, eta, 1.0);
        s.e = p.e;
        s.f = p.f;
    }

    drift_.step(dt_);
    ++index_;
    return s;
}

}  // namespace abisim
