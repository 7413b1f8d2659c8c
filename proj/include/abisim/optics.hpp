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

// Scattering model of an acousto-optic modulator used as a bi-frequency beam
// splitter, and of the two-AOM Mach-Zehnder built from a pair of them.
//
// Conventions:
//   * A field's optical frequency is ω + n·Ω, stored as the integer n.
//   * Input port a carries ω+Ω, input port b carries ω.
//   * AOM: c = t·b + e^{iθ}·r·a   (frequency ω)
//          d = t·a − e^{−iθ}·r·b  (frequency ω+Ω)
//   * Interferometer: e = t′₁·a − r′₁·b (ω+Ω), f = r′₂·a + t′₂·b (ω), with the
//     optical path phase on the frequency-shifted arm.

#include <complex>
#include <optional>

namespace abisim {

using Complex = std::complex<double>;

enum class Port { a, b, c, d, e, f };

const char *port_name(Port p);

struct FrequencyLabel {
    int offset_index = 0;       // multiples of Ω above the carrier ω
    double rf_frequency = 1.0;  // Ω, rad/s

    bool operator==(const FrequencyLabel &) const = default;
};

struct PortField {
    Port port = Port::a;
    FrequencyLabel frequency;
    Complex amplitude{0.0, 0.0};

    double intensity() const { return std::norm(amplitude); }
    bool is_vacuum() const { return amplitude == Complex{0.0, 0.0}; }
};

struct AomConfig {
    double r = 0.0;      // diffraction amplitude, r² is the diffraction efficiency
    double theta = 0.0;  // RF-drive induced phase
    double rf_frequency = 1.0;
    bool rf_on = true;
    double off_leakage_power = 0.0;  // diffracted power fraction with the RF off

    /// r actually in effect: √off_leakage_power when the RF is off.
    double effective_r() const;
    /// √(1 − effective_r²).
    double effective_t() const;
    double t() const;

    void validate() const;

    static AomConfig with_efficiency(double diffraction_efficiency, double rf_frequency,
                                     double theta = 0.0);
};

struct AbiConfig {
    AomConfig aom1;
    AomConfig aom2;
    double path_phase = 0.0;
    double visibility = 1.0;
    double efficiency = 1.0;

    /// φ = φ_path − θ₁ + θ₂, the only phase combination the outputs depend on.
    double overall_phase() const { return path_phase - aom1.theta + aom2.theta; }

    void validate() const;
};

struct EffectiveCoeffs {
    Complex t1p, r1p, t2p, r2p;
};

struct ScatterOutput {
    PortField c;
    PortField d;
};

/// Output of the interferometer. The coherent part lives in `e`/`f`; power of
/// the mode-mismatched fraction adds incoherently on the same port.
struct AbiOutput {
    PortField e;
    PortField f;
    double e_incoherent = 0.0;
    double f_incoherent = 0.0;

    double e_intensity() const { return e.intensity() + e_incoherent; }
    double f_intensity() const { return f.intensity() + f_incoherent; }
};

ScatterOutput aom_scatter(const PortField &in_a, const PortField &in_b, const AomConfig &cfg);

EffectiveCoeffs effective_coeffs(const AbiConfig &cfg);

AbiOutput abi_transfer(const PortField &in_a, const PortField &in_b, const AbiConfig &cfg);

/// (1/2)[1 + cos φ]·I_in
double ideal_intensity(double phi, double i_in);

/// (η/2)[1 + V·cos(Δω·t + φ)]·I_in
double observed_intensity(double eta, double v, double delta_omega, double t, double phi,
                          double i_in);

/// Real splitting amplitudes in effect for the two AOMs (RF state applied).
struct SplitAmplitudes {
    double t1, r1, t2, r2;

    static SplitAmplitudes from(const AbiConfig &cfg);
};

struct PortPower {
    double e = 0.0;
    double f = 0.0;
};

/// Port intensities for light entering port b only, as a closed form of the
/// field model. For balanced AOMs this is exactly the observed-intensity law.
PortPower envelope_intensities(const SplitAmplitudes &s, double phi, double visibility,
                               double efficiency, double i_in);

/// Overall phase φ ∈ [0, π] giving |t′₁|² = target with balanced 50 % AOMs.
double phase_for_splitting_ratio(double target_t1p_power);

}  // namespace abisim
