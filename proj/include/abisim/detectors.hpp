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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "abisim/drive.hpp"
#include "abisim/random.hpp"

namespace abisim {

/// Uniformly sampled analog record; sample k is taken at t0 + k·dt.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> samples;

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    std::size_t size() const { return samples.size(); }
    std::vector<double> times() const;
};

/// Photon counts per counting window; window k starts at t0 + k·window_s.
struct CountSeries {
    double t0 = 0.0;
    double window_s = 10e-3;
    std::int64_t triggers_per_window = 0;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> enabled_triggers;  // per window, after SPD gating

    double window_start(std::size_t k) const {
        return t0 + static_cast<double>(k) * window_s;
    }
    std::size_t size() const { return counts.size(); }
};

struct PdModel {
    double responsivity = 1.0;
    double noise_sigma = 0.0;
    double sample_hz = 10e6;

    void validate() const;
};

double pd_sample(double intensity, const PdModel &m, Rng &rng);

struct SpdModel {
    double efficiency = 0.20;
    double dark_prob = 4e-6;  // counts per trigger
    double trigger_hz = 50e6;
    double window_s = 10e-3;
    GateEnvelope enable_gate;

    std::int64_t triggers_per_window() const;
    void validate() const;
};

struct SpdCount {
    std::int64_t counts = 0;
    std::int64_t enabled_triggers = 0;
    double click_probability = 0.0;
    bool saturated = false;  // click probability was clipped at 1
};

/// Per-trigger click probability: efficiency·rate/trigger_hz + dark_prob.
double click_probability(double mean_photon_rate, const SpdModel &m, bool *saturated = nullptr);

/// Number of triggers of a `trigger_hz` clock starting at window_start that
/// fall inside the on-intervals of `gate`.
std::int64_t enabled_triggers(const GateEnvelope &gate, double window_start, double window_s,
                              double trigger_hz);

/// Binomial count over the enabled triggers of one counting window.
SpdCount spd_count_window(double mean_photon_rate, const SpdModel &m, double window_start,
                          Rng &rng);

}  // namespace abisim
