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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "abisim/drive.hpp"
#include "abisim/errors.hpp"

using namespace abisim;

namespace {

constexpr double kPi = std::numbers::pi;

// On-fraction of a gate sampled on a fine grid.
double sampled_duty(const GateEnvelope &g, double t0, double span, int n) {
    int on = 0;
    for (int k = 0; k < n; ++k) on += gate_state(g, t0 + span * (k + 0.5) / n);
    return static_cast<double>(on) / n;
}

}  // namespace

TEST_CASE("gate is periodic") {
    const GateEnvelope g{100.0, 0.3, 1.7e-3, 0.0};
    for (int k = 0; k < 997; ++k) {
        const double t = k * 1.3e-5 + 2.2e-7;
        CHECK(gate_state(g, t) == gate_state(g, t + 0.01));
        CHECK(gate_state(g, t) == gate_state(g, t + 0.05));
    }
}

TEST_CASE("gate duty matches the configured fraction") {
    for (double duty : {0.1, 0.3, 0.5, 0.77, 0.9}) {
        const GateEnvelope g{100.0, duty, 0.0, 0.0};
        CHECK(sampled_duty(g, 0.0, 0.05, 500000) == doctest::Approx(duty).epsilon(1e-4));
    }
    CHECK(sampled_duty({100.0, 1.0, 0.0, 0.0}, 0.0, 0.05, 1000) == 1.0);
    CHECK(sampled_duty({100.0, 0.0, 0.0, 0.0}, 0.0, 0.05, 1000) == 0.0);
    CHECK(sampled_duty({0.0, 0.3, 0.0, 0.0}, 0.0, 0.05, 1000) == 1.0);
}

TEST_CASE("gate edges: on at the rising edge, off at the falling edge") {
    const GateEnvelope g{100.0, 0.3, 0.0, 0.0};
    CHECK(gate_state(g, 0.0));
    CHECK(gate_state(g, 0.01));
    CHECK(gate_state(g, 0.003 - 1e-7));
    CHECK_FALSE(gate_state(g, 0.003));
    CHECK_FALSE(gate_state(g, 0.01 - 1e-7));
}

TEST_CASE("gate ramp rises and falls linearly") {
    const GateEnvelope g{100.0, 0.5, 0.0, 1e-3};
    CHECK(gate_level(g, 0.0) == doctest::Approx(0.0));
    CHECK(gate_level(g, 0.5e-3) == doctest::Approx(0.5));
    CHECK(gate_level(g, 2e-3) == doctest::Approx(1.0));
    CHECK(gate_level(g, 5.25e-3) == doctest::Approx(0.75));
    CHECK(gate_level(g, 7e-3) == doctest::Approx(0.0));
    const GateEnvelope hard{100.0, 0.5, 0.0, 0.0};
    CHECK(gate_level(hard, 1e-4) == 1.0);
    CHECK(gate_level(hard, 6e-3) == 0.0);
}

TEST_CASE("tuner sequence: LR and Coh are complementary, SPDe sits inside Coh") {
    const TimingSequence s = make_tuner_sequence(0.3, 5.0, 0.5);
    int spde_on = 0, n = 400000;
    for (int k = 0; k < n; ++k) {
        const double t = 1.0 * (k + 0.5) / n;
        const bool lr = gate_state(s.lr_gate, t), coh = gate_state(s.coh_gate, t);
        CHECK(lr != coh);
        if (gate_state(s.spde_gate, t)) {
            ++spde_on;
            CHECK(coh);
        }
        CHECK(gate_state(s.feedback_enable, t) == lr);
    }
    CHECK(static_cast<double>(spde_on) / n == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("tuner sequence rejects an SPD window overlapping the LR light") {
    CHECK_THROWS_AS(make_tuner_sequence(0.6, 5.0, 0.5), ConfigError);
    CHECK_NOTHROW(make_tuner_sequence(0.5, 5.0, 0.5));
    CHECK_THROWS_AS(make_tuner_sequence(0.0, 5.0, 0.5), ConfigError);
    CHECK_THROWS_AS(make_tuner_sequence(0.3, 0.0, 0.5), ConfigError);
}

TEST_CASE("drive phase: static phase plus sinusoidal dither") {
    RfDrive d;
    d.phase0 = 0.2;
    CHECK(instantaneous_phase(d, 1.234) == 0.2);
    d.dither_hz = 200e3;
    d.dither_depth = 0.1;
    CHECK(instantaneous_phase(d, 1.25e-6) == doctest::Approx(0.3));  // quarter period
    CHECK(instantaneous_phase(d, 3.75e-6) == doctest::Approx(0.1));
}

TEST_CASE("beat frequency from 80 and 79.9 MHz is 100 kHz") {
    RfDrive rf1, rf2;
    rf1.carrier_hz = 80e6;
    rf2.carrier_hz = 79.9e6;
    CHECK(beat_angular_frequency(rf1, rf2) / (2 * kPi) == doctest::Approx(1e5).epsilon(1e-9));
    // The detuning phase advances θ₂ so that φ = path − θ₁ + θ₂ grows at +Δω.
    const double t = 3.3e-6;
    CHECK(drive_detuning_phase(rf2, rf1, t) == doctest::Approx(beat_angular_frequency(rf1, rf2) * t));
    CHECK(drive_detuning_phase(rf1, rf1, t) == 0.0);
}

TEST_CASE("drive and gate validation") {
    RfDrive d;
    d.carrier_hz = -1.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d.carrier_hz = 80e6;
    d.dither_depth = -0.1;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    GateEnvelope g{100.0, 1.5, 0.0, 0.0};
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
