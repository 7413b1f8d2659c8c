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
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "abisim/detectors.hpp"
#include "abisim/drive.hpp"
#include "abisim/plant.hpp"

namespace abisim {

struct DemodConfig {
    double dither_hz = 200e3;
    double lowpass_cutoff_hz = 10e3;
    double reference_phase = 0.0;

    void validate() const;
};

/// Streaming lock-in: mixes with sin(2π·f_d·t + ψ), integrates over each
/// dither period and smooths the period averages with a single-pole IIR.
class Demodulator {
   public:
    Demodulator(const DemodConfig &cfg, double sample_dt);

    /// Feeds one sample; true when a period completed and output() changed.
    bool push(double t, double value);
    double output() const { return state_; }
    double update_interval() const { return period_samples_ * dt_; }
    void set_reference_phase(double psi) { cfg_.reference_phase = psi; }
    const DemodConfig &config() const { return cfg_; }
    void reset();

   private:
    DemodConfig cfg_;
    double dt_;
    std::size_t period_samples_;
    double alpha_;
    double acc_ = 0.0;
    std::size_t count_ = 0;
    double state_ = 0.0;
};

/// Offline demodulation of a recorded trace. Output is sampled like the
/// input, holding the filter value between updates. Throws ConfigError when
/// the trace has fewer than 10 samples per dither period.
TimeSeries demodulate(const TimeSeries &signal, const DemodConfig &cfg);

/// Reference phase in (−π/2, π/2] aligning the mixer with the dither
/// component of `values`, estimated over whole dither periods. `magnitude`
/// receives the amplitude of that component.
double calibrate_reference_phase(std::span<const double> times, std::span<const double> values,
                                 double dither_hz, double *magnitude = nullptr);

struct PidConfig {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double setpoint = 0.0;
    double output_min = -std::numeric_limits<double>::infinity();
    double output_max = std::numeric_limits<double>::infinity();

    void validate() const;
};

/// Fixed-capacity ring of recent error values.
class ErrorHistory {
   public:
    explicit ErrorHistory(std::size_t capacity = 1024) : buf_(capacity) {}

    void push(double e);
    /// Oldest first.
    std::vector<double> snapshot() const;
    std::size_t size() const { return size_; }

   private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

struct LockState {
    bool engaged = false;
    bool held = false;
    double last_output_v = 0.0;
    double integrator = 0.0;
    double prev_error = 0.0;
    bool has_prev_error = false;
    bool railed = false;
    int rail_events = 0;
    ErrorHistory error_history;
};

/// Positional PID with clamped integrator. While `state.held` the previous
/// output is returned and no state changes.
double pid_step(double error, const PidConfig &cfg, LockState &state, double dt);

struct LockConfig {
    DemodConfig demod;  // dither_hz is taken from the plant
    PidConfig pid;      // output limits are taken from the actuator
    Port detector_port = Port::e;
    bool auto_reference_phase = true;
    int calibration_periods = 20;
    double acquire_threshold_rad = 0.05;
    double settle_s = 20e-6;
    double acquisition_timeout_s = 5e-3;
    double loss_threshold_rad = 0.5;
    double loss_duration_s = 1e-3;

    void validate() const;
};

struct LockReport {
    enum class Status { locked, no_acquisition, lock_lost };

    Status status = Status::locked;
    bool acquired = false;
    double target_phase = 0.0;
    double acquisition_time_s = 0.0;  // worst engagement
    double mean_acquisition_time_s = 0.0;
    int engagements = 0;
    int failed_engagements = 0;
    double residual_phase_rms_rad = 0.0;  // enabled samples after first acquisition
    double locked_phase_rms_rad = 0.0;    // enabled samples after each engagement settled
    int rail_events = 0;
    double reference_phase = 0.0;
    double final_output_v = 0.0;
    std::vector<double> acquisition_times;
    std::string message;
};

const char *status_name(LockReport::Status s);

struct LockRun {
    double duration_s = 0.0;
    GateEnvelope feedback_enable;  // default: always on
    double input_intensity = 1.0;
    /// Optional time-dependent intensity at port b seen by the lock detector.
    std::function<double(double t)> input_level;
    PdModel detector;
    std::uint64_t detector_seed = 0;
    /// Called for every sample with the plant state and the detector reading.
    std::function<void(const PlantSample &, double detector_value, bool enabled)> observer;
};

/// Dither lock of the overall phase to `target_phi` on the plant's own
/// timeline. Extrema use the error zero crossing; other targets subtract the
/// expected error at the target. Never throws on lock failure: the outcome
/// is in the report.
LockReport lock_to_phase(double target_phi, Plant &plant, const LockConfig &cfg,
                         const LockRun &run);

}  // namespace abisim
