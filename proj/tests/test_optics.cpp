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
#include <complex>
#include <numbers>
#include <random>

#include "abisim/errors.hpp"
#include "abisim/optics.hpp"

using namespace abisim;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOmega = 2.0 * kPi * 80e6;

// Independent statement of the single-AOM relations as a 2×2 matrix acting
// on (a, b), written from the published coefficients.
struct Matrix2 {
    C m00, m01, m10, m11;
};

Matrix2 aom_matrix(double r, double theta) {
    const double t = std::sqrt(1.0 - r * r);
    // c = t b + e^{iθ} r a ; d = t a − e^{−iθ} r b
    return {std::polar(r, theta), t, t, -std::polar(r, -theta)};
}

struct Draw {
    double r1, r2, th1, th2, path;
};

Draw random_draw(std::mt19937_64 &g) {
    std::uniform_real_distribution<double> u01(0.0, 1.0), uang(-10.0, 10.0);
    return {u01(g), u01(g), uang(g), uang(g), uang(g)};
}

AbiConfig config_of(const Draw &d, double v = 1.0, double eta = 1.0) {
    AbiConfig c;
    c.aom1 = AomConfig::with_efficiency(d.r1 * d.r1, kOmega, d.th1);
    c.aom2 = AomConfig::with_efficiency(d.r2 * d.r2, kOmega, d.th2);
    c.path_phase = d.path;
    c.visibility = v;
    c.efficiency = eta;
    return c;
}

PortField field(Port p, int offset, C amp) { return {p, {offset, kOmega}, amp}; }

}  // namespace

TEST_CASE("aom_scatter matches the matrix form and conserves power") {
    std::mt19937_64 g(11);
    std::normal_distribution<double> n;
    for (int i = 0; i < 10000; ++i) {
        const Draw d = random_draw(g);
        AomConfig cfg = AomConfig::with_efficiency(d.r1 * d.r1, kOmega, d.th1);
        const C a(n(g), n(g)), b(n(g), n(g));
        const ScatterOutput out = aom_scatter(field(Port::a, 1, a), field(Port::b, 0, b), cfg);
        const Matrix2 m = aom_matrix(d.r1, d.th1);
        CHECK(std::abs(out.c.amplitude - (m.m00 * a + m.m01 * b)) < 1e-12);
        CHECK(std::abs(out.d.amplitude - (m.m10 * a + m.m11 * b)) < 1e-12);
        const double pin = std::norm(a) + std::norm(b);
        CHECK(std::abs(out.c.intensity() + out.d.intensity() - pin) <= 1e-12 * std::max(1.0, pin));
    }
}

TEST_CASE("aom_scatter limits: r = 0 passes straight, r = 1 swaps with phase") {
    const C a(0.3, -0.2), b(0.7, 0.1);
    AomConfig off = AomConfig::with_efficiency(0.0, kOmega);
    auto o = aom_scatter(field(Port::a, 1, a), field(Port::b, 0, b), off);
    CHECK(std::abs(o.c.amplitude - b) < 1e-15);
    CHECK(std::abs(o.d.amplitude - a) < 1e-15);

    AomConfig full = AomConfig::with_efficiency(1.0, kOmega, 0.4);
    o = aom_scatter(field(Port::a, 1, a), field(Port::b, 0, b), full);
    CHECK(std::abs(o.c.amplitude - std::polar(1.0, 0.4) * a) < 1e-15);
    CHECK(std::abs(o.d.amplitude + std::polar(1.0, -0.4) * b) < 1e-15);
}

TEST_CASE("frequency bookkeeping of a single AOM") {
    AomConfig cfg = AomConfig::with_efficiency(0.5, kOmega);
    auto o = aom_scatter(field(Port::a, 1, 1.0), field(Port::b, 0, 1.0), cfg);
    CHECK(o.c.frequency.offset_index == 0);
    CHECK(o.d.frequency.offset_index == 1);
    CHECK(o.c.port == Port::c);
    CHECK(o.d.port == Port::d);

    // Vacuum on a: labels follow b.
    o = aom_scatter(field(Port::a, 0, 0.0), field(Port::b, 3, 1.0), cfg);
    CHECK(o.c.frequency.offset_index == 3);
    CHECK(o.d.frequency.offset_index == 4);

    // a must sit one RF quantum above b.
    CHECK_THROWS_AS(aom_scatter(field(Port::a, 0, 1.0), field(Port::b, 0, 1.0), cfg), ConfigError);
    // Input labelled with a different RF frequency.
    PortField wrong{Port::b, {0, kOmega * 1.001}, 1.0};
    CHECK_THROWS_AS(aom_scatter(field(Port::a, 1, 0.0), wrong, cfg), ConfigError);
    // Swapped ports.
    CHECK_THROWS_AS(aom_scatter(field(Port::b, 1, 1.0), field(Port::b, 0, 1.0), cfg), ConfigError);
}

TEST_CASE("effective coefficients equal the published expressions") {
    std::mt19937_64 g(12);
    for (int i = 0; i < 2000; ++i) {
        const Draw d = random_draw(g);
        const double t1 = std::sqrt(1 - d.r1 * d.r1), t2 = std::sqrt(1 - d.r2 * d.r2);
        const auto e = [](double x) { return std::polar(1.0, x); };
        const C t1p = t1 * t2 * e(d.path) - d.r1 * d.r2 * e(d.th1 - d.th2);
        const C r1p = d.r1 * t2 * e(d.path - d.th1) + t1 * d.r2 * e(-d.th2);
        const C t2p = t1 * t2 - d.r1 * d.r2 * e(d.th2 - d.th1 + d.path);
        const C r2p = d.r1 * t2 * e(d.th1) + t1 * d.r2 * e(d.th2 + d.path);
        const EffectiveCoeffs k = effective_coeffs(config_of(d));
        CHECK(std::abs(k.t1p - t1p) < 1e-12);
        CHECK(std::abs(k.r1p - r1p) < 1e-12);
        CHECK(std::abs(k.t2p - t2p) < 1e-12);
        CHECK(std::abs(k.r2p - r2p) < 1e-12);
    }
}

TEST_CASE("unitarity of the effective coefficients") {
    std::mt19937_64 g(13);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const EffectiveCoeffs k = effective_coeffs(config_of(random_draw(g)));
        worst = std::max(worst, std::abs(std::norm(k.t1p) + std::norm(k.r1p) - 1.0));
        worst = std::max(worst, std::abs(std::norm(k.t2p) + std::norm(k.r2p) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("applying the single-AOM relation twice reproduces abi_transfer") {
    // AOM1 on (a, b); the shifted output d travels the path with phase φ and
    // enters AOM2 at its a port, the direct output c enters at b.
    std::mt19937_64 g(14);
    std::normal_distribution<double> n;
    for (int i = 0; i < 2000; ++i) {
        const Draw d = random_draw(g);
        const C a(n(g), n(g)), b(n(g), n(g));
        const Matrix2 m1 = aom_matrix(d.r1, d.th1), m2 = aom_matrix(d.r2, d.th2);
        const C c1 = m1.m00 * a + m1.m01 * b;
        const C d1 = (m1.m10 * a + m1.m11 * b) * std::polar(1.0, d.path);
        const C c2 = m2.m00 * d1 + m2.m01 * c1;  // frequency ω
        const C d2 = m2.m10 * d1 + m2.m11 * c1;  // frequency ω + Ω
        const AbiOutput out = abi_transfer(field(Port::a, 1, a), field(Port::b, 0, b), config_of(d));
        CHECK(std::abs(out.e.amplitude - d2) < 1e-11);
        CHECK(std::abs(out.f.amplitude - c2) < 1e-11);
        CHECK(out.e.frequency.offset_index == 1);
        CHECK(out.f.frequency.offset_index == 0);
    }
}

TEST_CASE("energy: e + f equals eta times the input for any V") {
    std::mt19937_64 g(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n;
    for (int i = 0; i < 10000; ++i) {
        const Draw d = random_draw(g);
        const double v = u(g), eta = u(g);
        AbiConfig cfg = config_of(d, v, eta);
        cfg.aom1.rf_on = u(g) < 0.8;
        cfg.aom2.rf_on = u(g) < 0.8;
        cfg.aom1.off_leakage_power = 1e-4 * u(g);
        cfg.aom2.off_leakage_power = 1e-4 * u(g);
        const C a(n(g), n(g)), b(n(g), n(g));
        const AbiOutput out = abi_transfer(field(Port::a, 1, a), field(Port::b, 0, b), cfg);
        const double pin = std::norm(a) + std::norm(b);
        CHECK(std::abs(out.e_intensity() + out.f_intensity() - eta * pin) <= 1e-12 * std::max(1.0, pin));
    }
}

TEST_CASE("balanced ideal interferometer reduces to (1 + cos phi)/2") {
    Draw d{std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0, 0.0};
    for (double phi = -7.0; phi <= 7.0; phi += 0.01) {
        d.path = phi;
        const AbiOutput out = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, 1.0), config_of(d));
        CHECK(std::abs(out.e_intensity() - ideal_intensity(phi, 1.0)) < 1e-12);
        CHECK(std::abs(out.e_intensity() - observed_intensity(1.0, 1.0, 0.0, 0.0, phi, 1.0)) < 1e-12);
        CHECK(std::abs(ideal_intensity(phi, 1.0) - 0.5 * (1.0 + std::cos(phi))) < 1e-15);
    }
    CHECK(ideal_intensity(0.0, 2.0) == doctest::Approx(2.0));
    CHECK(std::abs(ideal_intensity(kPi, 2.0)) < 1e-15);
    CHECK(ideal_intensity(kPi / 2, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("observed intensity with V and eta, including the beat term") {
    Draw d{std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0, 0.0};
    std::mt19937_64 g(16);
    std::uniform_real_distribution<double> u(0.0, 1.0), ua(-7.0, 7.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(g), eta = u(g), phi = ua(g), dw = 2 * kPi * 1e5, t = 1e-5 * u(g);
        d.path = dw * t + phi;
        const AbiOutput out = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, 1.0), config_of(d, v, eta));
        const double oracle = 0.5 * eta * (1.0 + v * std::cos(dw * t + phi));
        CHECK(std::abs(out.e_intensity() - oracle) < 1e-12);
        CHECK(std::abs(observed_intensity(eta, v, dw, t, phi, 1.0) - oracle) < 1e-12);
    }
}

TEST_CASE("switch efficiency at the locked maximum matches the measured value") {
    // η(1+V)/2 with η = 0.95 and the identical-frequency V = 0.937: (92 ± 1)%.
    CHECK(observed_intensity(0.95, 0.937, 0.0, 0.0, 0.0, 1.0) == doctest::Approx(0.92).epsilon(0.011));
}

TEST_CASE("only the overall phase path - theta1 + theta2 matters") {
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 2000; ++i) {
        Draw d = random_draw(g);
        const AbiConfig base = config_of(d, 0.9, 0.8);
        Draw shifted = d;
        const double x = u(g), y = u(g);
        shifted.th1 = d.th1 + x;
        shifted.th2 = d.th2 + y;
        shifted.path = d.path + x - y;
        const AbiConfig moved = config_of(shifted, 0.9, 0.8);
        REQUIRE(std::abs(std::remainder(moved.overall_phase() - base.overall_phase(), 2 * kPi)) < 1e-12);
        const auto o1 = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, 1.0), base);
        const auto o2 = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, 1.0), moved);
        CHECK(std::abs(o1.e_intensity() - o2.e_intensity()) < 1e-12);
        CHECK(std::abs(o1.f_intensity() - o2.f_intensity()) < 1e-12);
    }
}

TEST_CASE("closed-form envelope agrees with field propagation") {
    std::mt19937_64 g(18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        AbiConfig cfg = config_of(random_draw(g), u(g), u(g));
        cfg.aom1.rf_on = u(g) < 0.7;
        cfg.aom2.rf_on = u(g) < 0.7;
        cfg.aom1.off_leakage_power = 2e-4;
        cfg.aom2.off_leakage_power = 3e-4;
        const double i_in = 3.0 * u(g);
        const auto out = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, std::sqrt(i_in)), cfg);
        const PortPower p = envelope_intensities(SplitAmplitudes::from(cfg), cfg.overall_phase(),
                                                 cfg.visibility, cfg.efficiency, i_in);
        CHECK(std::abs(out.e_intensity() - p.e) < 1e-9);
        CHECK(std::abs(out.f_intensity() - p.f) < 1e-9);
    }
}

TEST_CASE("splitting ratio round trip") {
    for (double target = 0.0; target <= 1.0; target += 0.01) {
        Draw d{std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0, phase_for_splitting_ratio(target)};
        const EffectiveCoeffs k = effective_coeffs(config_of(d));
        CHECK(std::abs(std::norm(k.t1p) - target) < 1e-12);
    }
    CHECK_THROWS_AS(phase_for_splitting_ratio(1.5), ConfigError);
    CHECK_THROWS_AS(phase_for_splitting_ratio(-0.1), ConfigError);
}

TEST_CASE("RF off: direct pass with only the leakage diffracted") {
    AbiConfig cfg = config_of({std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0, 0.0});
    cfg.aom1.rf_on = cfg.aom2.rf_on = false;
    cfg.aom1.off_leakage_power = cfg.aom2.off_leakage_power = 0.0;
    const auto out = abi_transfer(field(Port::a, 1, 0.0), field(Port::b, 0, 1.0), cfg);
    CHECK(out.e_intensity() < 1e-30);
    CHECK(out.f_intensity() == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
    AbiConfig cfg = config_of({0.5, 0.5, 0.0, 0.0, 0.0});
    cfg.visibility = 1.2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.visibility = 1.0;
    cfg.efficiency = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.efficiency = 1.0;
    cfg.aom1.r = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.aom1.r = 0.5;
    cfg.aom2.off_leakage_power = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
