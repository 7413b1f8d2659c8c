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
#include <vector>

#include "abisim/errors.hpp"
#include "abisim/noise.hpp"

using namespace abisim;

TEST_CASE("drift variance grows as D t") {
    const double d = kDefaultDiffusion, dt = 1e-3;
    const int runs = 10000, steps = 100;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < runs; ++r) {
        DriftModel m(d, 1000 + r);
        for (int k = 0; k < steps; ++k) m.step(dt);
        sum += m.current_phase();
        sum2 += m.current_phase() * m.current_phase();
    }
    const double mean = sum / runs;
    const double var = sum2 / runs - mean * mean;
    CHECK(var == doctest::Approx(d * dt * steps).epsilon(0.05));
    CHECK(std::abs(mean) < 4.0 * std::sqrt(d * dt * steps / runs));
}

TEST_CASE("drift increments are uncorrelated") {
    DriftModel m(1.0, 7);
    const int n = 100000;
    std::vector<double> inc(n);
    double prev = m.current_phase();
    for (int k = 0; k < n; ++k) {
        const double p = m.step(1e-6);
        inc[k] = p - prev;
        prev = p;
    }
    double mean = 0.0;
    for (double x : inc) mean += x;
    mean /= n;
    double c0 = 0.0, c1 = 0.0;
    for (int k = 0; k < n; ++k) {
        c0 += (inc[k] - mean) * (inc[k] - mean);
        if (k > 0) c1 += (inc[k] - mean) * (inc[k - 1] - mean);
    }
    CHECK(std::abs(c1 / c0) < 0.02);
}

TEST_CASE("drift is reproducible and zero diffusion is static") {
    DriftModel a(2.0, 99), b(2.0, 99), z(0.0, 99, 0.3);
    for (int k = 0; k < 1000; ++k) {
        CHECK(a.step(1e-4) == b.step(1e-4));
        CHECK(z.step(1e-4) == 0.3);
    }
    CHECK_THROWS_AS(DriftModel(-1.0, 1), ConfigError);
}

TEST_CASE("PZT phase is linear in voltage and clamps at the range") {
    PztModel m;
    m.gain = 0.8;
    const PztResponse r = pzt_apply(m, 12.5);
    CHECK(r.phase == doctest::Approx(10.0));
    CHECK_FALSE(r.saturated);
    const PztResponse hi = pzt_apply(m, 100.0);
    CHECK(hi.saturated);
    CHECK(hi.applied_v == m.v_max);
    CHECK(pzt_apply(m, -100.0).applied_v == m.v_min);
}

TEST_CASE("walk-off: 10 V reduces V from 99.5% to 93.7%") {
    PztModel m;
    m.v0_visibility = 0.995;
    const double scale = calibrate_walkoff_scale(10.0, 0.995, 0.937);
    CHECK(scale == doctest::Approx(m.walkoff_scale_v).epsilon(1e-3));
    m.walkoff_scale_v = scale;
    CHECK(pzt_apply(m, 10.0).effective_visibility == doctest::Approx(0.937).epsilon(1e-12));
    CHECK(pzt_apply(m, -10.0).effective_visibility == doctest::Approx(0.937).epsilon(1e-12));
    CHECK(pzt_apply(m, 0.0).effective_visibility == 0.995);
    // Oracle: exp(−(v/s)²).
    CHECK(pzt_apply(m, 5.0).visibility_factor == doctest::Approx(std::exp(-std::pow(5.0 / scale, 2))));
    CHECK_THROWS_AS(calibrate_walkoff_scale(10.0, 0.9, 0.95), ConfigError);
}
