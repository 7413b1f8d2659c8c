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

#include "abisim/drive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

constexpr double kEdgeSnap = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void GateEnvelope::validate() const {
    if (!(duty >= 0.0 && duty <= 1.0)) throw ConfigError("gate duty must lie in [0, 1]");
    if (!(repetition_hz >= 0.0) || !std::isfinite(repetition_hz)) {
        throw ConfigError("gate repetition rate must be non-negative");
    }
    if (!(ramp_s >= 0.0)) throw ConfigError("gate ramp must be non-negative");
    if (!std::isfinite(phase_offset_s)) throw ConfigError("gate offset must be finite");
}

double gate_phase(const GateEnvelope &g, double t) {
    if (g.repetition_hz <= 0.0) return 0.0;
    const double x = (t - g.phase_offset_s) * g.repetition_hz;
    double frac = x - std::floor(x);
    if (frac > 1.0 - kEdgeSnap) frac = 0.0;
    return frac;
}

bool gate_state(const GateEnvelope &g, double t) {
    if (g.repetition_hz <= 0.0) return true;
    if (g.duty >= 1.0) return true;
    if (g.duty <= 0.0) return false;
    return gate_phase(g, t) < g.duty - kEdgeSnap;
}

double gate_level(const GateEnvelope &g, double t) {
    const bool on = gate_state(g, t);
    if (g.ramp_s <= 0.0 || g.repetition_hz <= 0.0 || g.duty >= 1.0 || g.duty <= 0.0) {
        return on ? 1.0 : 0.0;
    }
    const double period = g.period_s();
    const double frac = gate_phase(g, t);
    if (on) return std::min(1.0, frac * period / g.ramp_s);
    const double since_fall = (frac - g.duty) * period;
    return std::max(0.0, 1.0 - since_fall / g.ramp_s);
}

void RfDrive::validate() const {
    if (!(carrier_hz > 0.0)) throw ConfigError("RF carrier frequency must be positive");
    if (!(dither_depth >= 0.0)) throw ConfigError("dither depth must be non-negative");
    if (!(dither_hz >= 0.0)) throw ConfigError("dither frequency must be non-negative");
    gate.validate();
}

double instantaneous_phase(const RfDrive &drive, double t) {
    if (drive.dither_depth == 0.0) return drive.phase0;
    return drive.phase0 + drive.dither_depth * std::sin(kTwoPi * drive.dither_hz * t);
}

double drive_detuning_phase(const RfDrive &drive, const RfDrive &reference, double t) {
    return -kTwoPi * (drive.carrier_hz - reference.carrier_hz) * t;
}

double beat_angular_frequency(const RfDrive &rf1, const RfDrive &rf2) {
    return kTwoPi * (rf1.carrier_hz - rf2.carrier_hz);
}

TimingSequence make_tuner_sequence(double lr_duty, double lr_hz, double spde_duty,
                                   double feedback_offset_s) {
    if (!(lr_duty > 0.0 && lr_duty < 1.0)) {
        throw ConfigError("LR duty must lie strictly between 0 and 1");
    }
    if (!(lr_hz > 0.0)) throw ConfigError("LR repetition rate must be positive");
    if (!(spde_duty >= 0.0 && spde_duty <= 1.0)) {
        throw ConfigError("SPD enable duty must lie in [0, 1]");
    }
    const double coh_duty = 1.0 - lr_duty;
    if (spde_duty > coh_duty + 1e-12) {
        throw ConfigError("SPD enable window (" + std::to_string(spde_duty) +
                          " of the period) does not fit inside the Coh window (" +
                          std::to_string(coh_duty) + "); the SPD would count LR photons");
    }
    const double period = 1.0 / lr_hz;

    TimingSequence seq;
    seq.lr_gate = {lr_hz, lr_duty, 0.0, 0.0};
    seq.coh_gate = {lr_hz, coh_duty, lr_duty * period, 0.0};
    seq.spde_gate = {lr_hz, spde_duty,
                     lr_duty * period + 0.5 * (coh_duty - spde_duty) * period, 0.0};
    seq.feedback_enable = {lr_hz, lr_duty, feedback_offset_s, 0.0};
    return seq;
}

}  // namespace abisim
