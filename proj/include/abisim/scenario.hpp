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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "abisim/detectors.hpp"
#include "abisim/drive.hpp"
#include "abisim/fit.hpp"
#include "abisim/lock.hpp"
#include "abisim/noise.hpp"
#include "abisim/plant.hpp"

namespace abisim {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { beating_pd, beating_spd, scan_and_lock, chopped_switch, frequency_tuner };

const char *scenario_name(ScenarioKind k);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view name);
const std::vector<ScenarioKind> &all_scenario_kinds();

struct AomSection {
    double diffraction_efficiency = 0.5;  // r²
    double off_leakage_db = -37.0;        // diffracted power with RF off
};

struct OpticsSection {
    AomSection aom1;
    AomSection aom2;
    double path_phase = 0.0;
    double visibility = 0.995;
    double efficiency = 0.95;
    /// Intensity at port b: PD units for PD scenarios, photons/s for the SPD
    /// beating scenario when spd.peak_counts_per_trigger is 0.
    double input_intensity = 1.0;
};

struct SimulationSection {
    double sample_hz = 4e6;
    bool field_mode = false;
    /// trace.csv keeps the mean of every `trace_decimation` detector samples.
    int trace_decimation = 1;
};

struct SpdSection {
    SpdModel model;
    /// When > 0, the input photon rate is set so that the fringe maximum
    /// gives this click probability per trigger (dark counts included).
    double peak_counts_per_trigger = 0.0;
};

struct LockSection {
    LockConfig config;
    ActuatorMode actuator = ActuatorMode::pzt;
    double target_phase = 0.0;
};

struct ScanSection {
    double ramp_hz = 30.0;      // triangle frequency of the PZT scan
    double ramp_span_v = 8.0;   // peak-to-peak, centred on the bias
    double scan_s = 0.1;        // scan segment; a lock-to-max segment follows
    double lock_max_s = 0.05;   // the rest of duration_s is locked to minimum
};

struct ChopSection {
    double repetition_hz = 100.0;
    double duty = 0.3;
    /// Photon flux per unit of input intensity, for the counting isolation.
    double photon_flux = 7.8e12;
    double attenuation_db = 60.0;  // inserted for the RF-on measurement
    double isolation_exposure_s = 1.0;
};

struct TunerSection {
    double lr_duty = 0.3;
    double lr_hz = 5.0;
    double spde_duty = 0.5;
    double lr_intensity = 1.0;    // PD units at port b while LR is on
    double coh_photon_rate = 1e6;  // photons/s at port b while Coh is on
    double counts_window_s = 20e-3;
};

struct FitSection {
    FitMode mode = FitMode::fixed_frequency;
    int phase_grid = 8;
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    ScenarioKind kind = ScenarioKind::beating_pd;
    double duration_s = 2e-4;
    std::uint64_t seed = 1;

    SimulationSection simulation;
    OpticsSection optics;
    RfDrive rf1;
    RfDrive rf2;
    double diffusion = 0.0;
    PztModel pzt;
    double pzt_bias_v = 0.0;
    PdModel pd;
    SpdSection spd;
    LockSection lock;
    ScanSection scan;
    ChopSection chop;
    TunerSection tuner;
    FitSection fit;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    AbiConfig abi_config() const;
    PlantConfig plant_config() const;
};

/// Defaults reproducing the corresponding experiment.
ScenarioConfig default_config(ScenarioKind kind);

struct ScenarioResult {
    std::optional<TimeSeries> trace;
    std::optional<CountSeries> counts;
    nlohmann::json summary;
    /// Scalar metrics for tables and sweeps, in insertion order.
    std::vector<std::pair<std::string, double>> headline;
    bool failed = false;
    std::string failure;
};

/// Deterministic for a fixed config: same config gives bit-identical output.
ScenarioResult run_scenario(const ScenarioConfig &cfg);

/// Writes trace.csv, counts.csv and summary.json into `dir`, creating it.
/// Throws IoError if a file exists and `force` is false.
void write_artifacts(const ScenarioResult &result, const std::filesystem::path &dir, bool force);

std::string summary_text(const ScenarioResult &result);

nlohmann::json fit_to_json(const FitResult &fit);
nlohmann::json lock_to_json(const LockReport &report);

}  // namespace abisim
