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

#include <numbers>

namespace abisim {

/// Periodic on/off envelope. repetition_hz = 0 means always on.
struct GateEnvelope {
    double repetition_hz = 0.0;
    double duty = 1.0;
    double phase_offset_s = 0.0;  // time of the rising edge within a period
    double ramp_s = 0.0;          // linear edge duration used by gate_level()

    double period_s() const { return repetition_hz > 0.0 ? 1.0 / repetition_hz : 0.0; }
    void validate() const;
};

/// True while the gate is on. Edges are snapped to 1e-9 of a period so that
/// sampled sequences built from complementary envelopes never overlap.
bool gate_state(const GateEnvelope &g, double t);

/// Fractional position within the current gate period, in [0, 1).
double gate_phase(const GateEnvelope &g, double t);

/// Envelope amplitude in [0, 1], including the optional linear edge ramp.
double gate_level(const GateEnvelope &g, double t);

struct RfDrive {
    double carrier_hz = 80e6;
    double phase0 = 0.0;
    double dither_hz = 0.0;
    double dither_depth = 0.0;  // rad, sinusoidal phase modulation
    GateEnvelope gate;

    void validate() const;
};

/// θ(t) = phase0 + dither_depth·sin(2π·dither_hz·t). Carrier detuning is
/// handled by drive_detuning_phase().
double instantaneous_phase(const RfDrive &drive, double t);

/// Rotating-frame phase of a drive relative to the reference drive:
/// −2π(f − f_ref)·t.
double drive_detuning_phase(const RfDrive &drive, const RfDrive &reference, double t);

/// Δω = 2π(f₁ − f₂): the beat angular frequency in the observed intensity.
double beat_angular_frequency(const RfDrive &rf1, const RfDrive &rf2);

struct TimingSequence {
    GateEnvelope lr_gate;   // locking reference light
    GateEnvelope coh_gate;  // weak coherent light, complementary to lr_gate
    GateEnvelope spde_gate;
    GateEnvelope feedback_enable;
};

/// Complementary LR/Coh sequence with the SPD enable centred in the Coh
/// window and the feedback enable following LR (shifted by feedback_offset_s).
TimingSequence make_tuner_sequence(double lr_duty, double lr_hz, double spde_duty,
                                   double feedback_offset_s = 0.0);

}  // namespace abisim
