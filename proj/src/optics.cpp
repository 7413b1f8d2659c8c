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

#include "abisim/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

Complex cis(double x) { return std::polar(1.0, x); }

// Frequency index of the ω-side output given the two inputs. A vacuum input
// carries no frequency information, so the other one decides.
int base_offset(const PortField &in_a, const PortField &in_b, double rf_frequency) {
    for (const PortField *f : {&in_a, &in_b}) {
        if (!f->is_vacuum() && f->frequency.rf_frequency != rf_frequency) {
            throw ConfigError("input at port " + std::string(port_name(f->port)) +
                              " labelled with RF frequency " +
                              std::to_string(f->frequency.rf_frequency) +
                              " rad/s, modulator driven at " + std::to_string(rf_frequency));
        }
    }
    if (!in_a.is_vacuum() && !in_b.is_vacuum() &&
        in_a.frequency.offset_index != in_b.frequency.offset_index + 1) {
        throw ConfigError("port a must carry exactly one RF quantum above port b");
    }
    if (!in_b.is_vacuum()) return in_b.frequency.offset_index;
    if (!in_a.is_vacuum()) return in_a.frequency.offset_index - 1;
    return in_b.frequency.offset_index;
}

void check_ports(const PortField &in_a, const PortField &in_b) {
    if (in_a.port != Port::a || in_b.port != Port::b) {
        throw ConfigError("inputs must be presented on ports a and b");
    }
}

}  // namespace

const char *port_name(Port p) {
    switch (p) {
        case Port::a: return "a";
        case Port::b: return "b";
        case Port::c: return "c";
        case Port::d: return "d";
        case Port::e: return "e";
        case Port::f: return "f";
    }
    return "?";
}

double AomConfig::effective_r() const { return rf_on ? r : std::sqrt(off_leakage_power); }

double AomConfig::effective_t() const {
    double re = effective_r();
    return std::sqrt(1.0 - re * re);
}

double AomConfig::t() const { return std::sqrt(1.0 - r * r); }

void AomConfig::validate() const {
    if (!(r >= 0.0 && r <= 1.0)) {
        throw ConfigError("AOM diffraction amplitude r must lie in [0, 1], got " +
                          std::to_string(r));
    }
    if (!(off_leakage_power >= 0.0 && off_leakage_power <= 1.0)) {
        throw ConfigError("AOM off-state leakage must lie in [0, 1]");
    }
    if (!(rf_frequency > 0.0) || !std::isfinite(rf_frequency)) {
        throw ConfigError("AOM RF frequency must be positive");
    }
    if (!std::isfinite(theta)) throw ConfigError("AOM phase must be finite");
}

AomConfig AomConfig::with_efficiency(double diffraction_efficiency, double rf_frequency,
                                     double theta) {
    AomConfig c;
    c.r = std::sqrt(diffraction_efficiency);
    c.rf_frequency = rf_frequency;
    c.theta = theta;
    return c;
}

void AbiConfig::validate() const {
    aom1.validate();
    aom2.validate();
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw ConfigError("visibility must lie in [0, 1]");
    }
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw ConfigError("efficiency must lie in [0, 1]");
    }
    if (!std::isfinite(path_phase)) throw ConfigError("path phase must be finite");
}

ScatterOutput aom_scatter(const PortField &in_a, const PortField &in_b, const AomConfig &cfg) {
    cfg.validate();
    check_ports(in_a, in_b);
    const int base = base_offset(in_a, in_b, cfg.rf_frequency);
    const double r = cfg.effective_r();
    const double t = cfg.effective_t();

    ScatterOutput out;
    out.c.port = Port::c;
    out.c.frequency = {base, cfg.rf_frequency};
    out.c.amplitude = t * in_b.amplitude + cis(cfg.theta) * r * in_a.amplitude;
    out.d.port = Port::d;
    out.d.frequency = {base + 1, cfg.rf_frequency};
    out.d.amplitude = t * in_a.amplitude - cis(-cfg.theta) * r * in_b.amplitude;
    return out;
}

EffectiveCoeffs effective_coeffs(const AbiConfig &cfg) {
    cfg.validate();
    const double t1 = cfg.aom1.effective_t(), r1 = cfg.aom1.effective_r();
    const double t2 = cfg.aom2.effective_t(), r2 = cfg.aom2.effective_r();
    const double th1 = cfg.aom1.theta, th2 = cfg.aom2.theta;
    const double vp = cfg.path_phase;

    EffectiveCoeffs k;
    k.t1p = t1 * t2 * cis(vp) - r1 * r2 * cis(th1 - th2);
    k.r1p = r1 * t2 * cis(vp - th1) + t1 * r2 * cis(-th2);
    k.t2p = t1 * t2 - r1 * r2 * cis(th2 - th1 + vp);
    k.r2p = r1 * t2 * cis(th1) + t1 * r2 * cis(th2 + vp);
    return k;
}

AbiOutput abi_transfer(const PortField &in_a, const PortField &in_b, const AbiConfig &cfg) {
    const EffectiveCoeffs k = effective_coeffs(cfg);
    check_ports(in_a, in_b);
    const int base = base_offset(in_a, in_b, cfg.aom1.rf_frequency);
    const Complex a = in_a.amplitude, b = in_b.amplitude;

    // Per-arm contributions, needed for the incoherent (mismatched) power.
    const double t1 = cfg.aom1.effective_t(), r1 = cfg.aom1.effective_r();
    const double t2 = cfg.aom2.effective_t(), r2 = cfg.aom2.effective_r();
    const Complex c1 = t1 * b + cis(cfg.aom1.theta) * r1 * a;
    const Complex d1 = t1 * a - cis(-cfg.aom1.theta) * r1 * b;
    const double shifted_arm = std::norm(d1);
    const double direct_arm = std::norm(c1);
    const double arm_e = t2 * t2 * shifted_arm + r2 * r2 * direct_arm;
    const double arm_f = r2 * r2 * shifted_arm + t2 * t2 * direct_arm;

    const double eta = cfg.efficiency, v = cfg.visibility;
    const double coherent_scale = std::sqrt(eta * v);

    AbiOutput out;
    out.e.port = Port::e;
    out.e.frequency = {base + 1, cfg.aom1.rf_frequency};
    out.e.amplitude = coherent_scale * (k.t1p * a - k.r1p * b);
    out.f.port = Port::f;
    out.f.frequency = {base, cfg.aom1.rf_frequency};
    out.f.amplitude = coherent_scale * (k.r2p * a + k.t2p * b);
    out.e_incoherent = eta * (1.0 - v) * arm_e;
    out.f_incoherent = eta * (1.0 - v) * arm_f;
    return out;
}

double ideal_intensity(double phi, double i_in) { return 0.5 * (1.0 + std::cos(phi)) * i_in; }

double observed_intensity(double eta, double v, double delta_omega, double t, double phi,
                          double i_in) {
    return 0.5 * eta * (1.0 + v * std::cos(delta_omega * t + phi)) * i_in;
}

SplitAmplitudes SplitAmplitudes::from(const AbiConfig &cfg) {
    return {cfg.aom1.effective_t(), cfg.aom1.effective_r(), cfg.aom2.effective_t(),
            cfg.aom2.effective_r()};
}

PortPower envelope_intensities(const SplitAmplitudes &s, double phi, double visibility,
                               double efficiency, double i_in) {
    const double cross = 2.0 * visibility * s.t1 * s.t2 * s.r1 * s.r2 * std::cos(phi);
    const double scale = efficiency * i_in;
    PortPower p;
    p.e = scale * (s.t2 * s.t2 * s.r1 * s.r1 + s.t1 * s.t1 * s.r2 * s.r2 + cross);
    p.f = scale * (s.t1 * s.t1 * s.t2 * s.t2 + s.r1 * s.r1 * s.r2 * s.r2 - cross);
    return p;
}

double phase_for_splitting_ratio(double target_t1p_power) {
    if (!(target_t1p_power >= 0.0 && target_t1p_power <= 1.0)) {
        throw ConfigError("splitting ratio must lie in [0, 1]");
    }
    // Balanced AOMs: |t′₁|² = (1 − cos φ)/2.
    return std::acos(1.0 - 2.0 * target_t1p_power);
}

}  // namespace abisim
