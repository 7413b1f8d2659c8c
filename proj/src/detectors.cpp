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

#include "abisim/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "abisim/errors.hpp"

namespace abisim {

std::vector<double> TimeSeries::times() const {
    std::vector<double> t(samples.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
}

void PdModel::validate() const {
    if (!(noise_sigma >= 0.0)) throw ConfigError("PD noise sigma must be non-negative");
    if (!(sample_hz > 0.0)) throw ConfigError("PD sample rate must be positive");
    if (!std::isfinite(responsivity)) throw ConfigError("PD responsivity must be finite");
}

double pd_sample(double intensity, const PdModel &m, Rng &rng) {
    double v = m.responsivity * intensity;
    if (m.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, m.noise_sigma);
        v += noise(rng);
    }
    return v;
}

std::int64_t SpdModel::triggers_per_window() const {
    return std::llround(window_s * trigger_hz);
}

void SpdModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw ConfigError("SPD efficiency must lie in [0, 1]");
    }
    if (!(dark_prob >= 0.0)) throw ConfigError("SPD dark probability must be non-negative");
    if (!(trigger_hz > 0.0)) throw ConfigError("SPD trigger rate must be positive");
    if (!(window_s > 0.0)) throw ConfigError("SPD counting window must be positive");
    enable_gate.validate();
}

double click_probability(double mean_photon_rate, const SpdModel &m, bool *saturated) {
    const double p = m.efficiency * mean_photon_rate / m.trigger_hz + m.dark_prob;
    if (saturated != nullptr) *saturated = p > 1.0;
    return std::min(1.0, p);
}

std::int64_t enabled_triggers(const GateEnvelope &gate, double window_start, double window_s,
                              double trigger_hz) {
    const std::int64_t n = std::llround(window_s * trigger_hz);
    if (gate.repetition_hz <= 0.0 || gate.duty >= 1.0) return n;
    if (gate.duty <= 0.0) return 0;

    // Index slack keeps edge-aligned windows from picking up a stray trigger.
    constexpr double kSlack = 1e-6;
    const double period = gate.period_s();
    const double on_len = gate.duty * period;
    const double window_end = window_start + window_s;
    auto first_period = static_cast<std::int64_t>(
        std::floor((window_start - gate.phase_offset_s) / period)) - 1;

    std::int64_t total = 0;
    for (std::int64_t p = first_period;; ++p) {
        const double on_start = gate.phase_offset_s + static_cast<double>(p) * period;
        if (on_start >= window_end) break;
        const double on_end = on_start + on_len;
        auto k0 = static_cast<std::int64_t>(
            std::ceil((on_start - window_start) * trigger_hz - kSlack));
        auto k1 = static_cast<std::int64_t>(
            std::ceil((on_end - window_start) * trigger_hz - kSlack));
        k0 = std::clamp<std::int64_t>(k0, 0, n);
        k1 = std::clamp<std::int64_t>(k1, 0, n);
        if (k1 > k0) total += k1 - k0;
    }
    return total;
}

SpdCount spd_count_window(double mean_photon_rate, const SpdModel &m, double window_start,
                          Rng &rng) {
    SpdCount out;
    out.enabled_triggers = enabled_triggers(m.enable_gate, window_start, m.window_s, m.trigger_hz);
    out.click_probability = click_probability(std::max(0.0, mean_photon_rate), m, &out.saturated);
    if (out.enabled_triggers == 0 || out.click_probability <= 0.0) return out;
    std::binomial_distribution<std::int64_t> clicks(out.enabled_triggers, out.click_probability);
    out.counts = clicks(rng);
    return out;
}

}  // namespace abisim
