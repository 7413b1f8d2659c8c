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

#include "abisim/lock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t samples_per_period(double dither_hz, double dt) {
    return static_cast<std::size_t>(std::llround(1.0 / (dither_hz * dt)));
}

}  // namespace

void DemodConfig::validate() const {
    if (!(dither_hz > 0.0)) throw ConfigError("demodulation needs a positive dither frequency");
    if (!(lowpass_cutoff_hz > 0.0 && lowpass_cutoff_hz < dither_hz)) {
        throw ConfigError("low-pass cutoff must be positive and below the dither frequency");
    }
}

Demodulator::Demodulator(const DemodConfig &cfg, double sample_dt) : cfg_(cfg), dt_(sample_dt) {
    cfg_.validate();
    period_samples_ = samples_per_period(cfg_.dither_hz, dt_);
    if (period_samples_ < 10) {
        throw ConfigError("signal undersampled: " + std::to_string(period_samples_) +
                          " samples per dither period, need at least 10");
    }
    alpha_ = 1.0 - std::exp(-kTwoPi * cfg_.lowpass_cutoff_hz * update_interval());
}

bool Demodulator::push(double t, double value) {
    acc_ += value * std::sin(kTwoPi * cfg_.dither_hz * t + cfg_.reference_phase);
    if (++count_ < period_samples_) return false;
    const double avg = acc_ / static_cast<double>(period_samples_);
    state_ += alpha_ * (avg - state_);
    acc_ = 0.0;
    count_ = 0;
    return true;
}

void Demodulator::reset() {
    acc_ = 0.0;
    count_ = 0;
    state_ = 0.0;
}

TimeSeries demodulate(const TimeSeries &signal, const DemodConfig &cfg) {
    Demodulator demod(cfg, signal.dt);
    TimeSeries out{signal.t0, signal.dt, {}};
    out.samples.reserve(signal.size());
    for (std::size_t k = 0; k < signal.size(); ++k) {
        demod.push(signal.time(k), signal.samples[k]);
        out.samples.push_back(demod.output());
    }
    return out;
}

double calibrate_reference_phase(std::span<const double> times, std::span<const double> values,
                                 double dither_hz, double *magnitude) {
    if (times.size() != values.size() || times.size() < 2) {
        throw ConfigError("reference calibration needs at least two samples");
    }
    const std::size_t per = samples_per_period(dither_hz, times[1] - times[0]);
    const std::size_t n = per == 0 ? 0 : (values.size() / per) * per;
    if (n == 0) throw ConfigError("reference calibration needs at least one dither period");
    double in_phase = 0.0, quadrature = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double arg = kTwoPi * dither_hz * times[k];
        in_phase += values[k] * std::sin(arg);
        quadrature += values[k] * std::cos(arg);
    }
    if (magnitude != nullptr) {
        *magnitude = 2.0 * std::hypot(in_phase, quadrature) / static_cast<double>(n);
    }
    double psi = std::atan2(quadrature, in_phase);
    if (psi > std::numbers::pi / 2) psi -= std::numbers::pi;
    if (psi <= -std::numbers::pi / 2) psi += std::numbers::pi;
    return psi;
}

void PidConfig::validate() const {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
        throw ConfigError("PID gains must be finite");
    }
    if (!(output_min < output_max)) throw ConfigError("PID output range is empty");
}

void ErrorHistory::push(double e) {
    if (buf_.empty()) return;
    buf_[head_] = e;
    head_ = (head_ + 1) % buf_.size();
    size_ = std::min(size_ + 1, buf_.size());
}

std::vector<double> ErrorHistory::snapshot() const {
    std::vector<double> out;
    out.reserve(size_);
    const std::size_t start = (head_ + buf_.size() - size_) % std::max<std::size_t>(buf_.size(), 1);
    for (std::size_t k = 0; k < size_; ++k) out.push_back(buf_[(start + k) % buf_.size()]);
    return out;
}

double pid_step(double error, const PidConfig &cfg, LockState &state, double dt) {
    if (state.held) {
        state.has_prev_error = false;
        return state.last_output_v;
    }
    const double e = error - cfg.setpoint;
    state.error_history.push(e);
    state.integrator = std::clamp(state.integrator + cfg.ki * e * dt, cfg.output_min, cfg.output_max);
    const double derivative =
        (cfg.kd != 0.0 && state.has_prev_error) ? cfg.kd * (e - state.prev_error) / dt : 0.0;
    const double raw = state.integrator + cfg.kp * e + derivative;
    const double out = std::clamp(raw, cfg.output_min, cfg.output_max);
    const bool railed = out != raw;
    if (railed && !state.railed) ++state.rail_events;
    state.railed = railed;
    state.prev_error = e;
    state.has_prev_error = true;
    state.last_output_v = out;
    return out;
}

void LockConfig::validate() const {
    pid.validate();
    if (detector_port != Port::e && detector_port != Port::f) {
        throw ConfigError("lock detector must watch output port e or f");
    }
    if (!(acquire_threshold_rad > 0.0)) throw ConfigError("acquire threshold must be positive");
    if (!(settle_s >= 0.0)) throw ConfigError("settle time must be non-negative");
    if (!(acquisition_timeout_s > 0.0)) throw ConfigError("acquisition timeout must be positive");
    if (!(loss_threshold_rad > acquire_threshold_rad)) {
        throw ConfigError("loss threshold must exceed the acquire threshold");
    }
    if (calibration_periods < 1) throw ConfigError("calibration needs at least one period");
}

const char *status_name(LockReport::Status s) {
    switch (s) {
        case LockReport::Status::locked: return "locked";
        case LockReport::Status::no_acquisition: return "no_acquisition";
        case LockReport::Status::lock_lost: return "lock_lost";
    }
    return "?";
}

LockReport lock_to_phase(double target_phi, Plant &plant, const LockConfig &cfg,
                         const LockRun &run) {
    cfg.validate();
    run.detector.validate();
    const double dither_hz = plant.dither_hz();
    const double depth = plant.dither_depth();
    if (!(depth > 0.0 && dither_hz > 0.0)) {
        throw ConfigError("phase lock requires a dithered RF drive");
    }
    const double cos_t = std::cos(target_phi), sin_t = std::sin(target_phi);
    if (std::abs(cos_t) < 0.05) {
        throw ConfigError("target phase too close to quadrature: the dither error has no slope");
    }
    DemodConfig dcfg = cfg.demod;
    dcfg.dither_hz = dither_hz;
    Demodulator demod(dcfg, plant.dt());

    const PlantConfig &pc = plant.config();
    PidConfig pid = cfg.pid;
    if (pc.actuator == ActuatorMode::pzt) {
        pid.output_min = pc.pzt.v_min;
        pid.output_max = pc.pzt.v_max;
    }
    const double gain = pc.pzt.gain;
    const double port_sign = cfg.detector_port == Port::e ? 1.0 : -1.0;
    const SplitAmplitudes amps = SplitAmplitudes::from(pc.optics);
    const double cross = 2.0 * amps.t1 * amps.t2 * amps.r1 * amps.r2;

    LockState state;
    state.integrator = plant.actuator();
    state.last_output_v = plant.actuator();

    LockReport report;
    report.target_phase = target_phi;
    report.reference_phase = dcfg.reference_phase;

    Rng rng(run.detector_seed);
    const auto n_samples = static_cast<std::uint64_t>(std::llround(run.duration_s * pc.sample_hz));
    const std::size_t per = samples_per_period(dither_hz, plant.dt());
    const std::size_t cal_needed = per * static_cast<std::size_t>(cfg.calibration_periods);
    bool calibrating = cfg.auto_reference_phase;
    std::vector<double> cal_t, cal_x;

    bool prev_enabled = false;
    double engage_t = 0.0;
    bool engaged_acquired = false, engaged_failed = false;
    double band_since = kNaN, loss_since = kNaN;
    bool ever_acquired = false, lost = false;
    double residual_sum = 0.0, locked_sum = 0.0, acq_sum = 0.0;
    std::uint64_t residual_n = 0, locked_n = 0;

    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const PlantSample &s = plant.step();
        const bool enabled = gate_state(run.feedback_enable, s.t);
        const double level = run.input_level ? run.input_level(s.t) : run.input_intensity;
        const double x = pd_sample((port_sign > 0.0 ? s.e : s.f) * level, run.detector, rng);
        if (run.observer) run.observer(s, x, enabled);

        if (enabled && !prev_enabled) {
            ++report.engagements;
            engage_t = s.t;
            engaged_acquired = false;
            engaged_failed = false;
            band_since = kNaN;
            loss_since = kNaN;
        }
        if (!enabled && prev_enabled && !engaged_acquired && !engaged_failed) {
            ++report.failed_engagements;
        }

        const double err = std::remainder(s.control_phase - target_phi, kTwoPi);
        if (enabled) {
            if (!engaged_acquired) {
                if (std::abs(err) < cfg.acquire_threshold_rad) {
                    if (std::isnan(band_since)) band_since = s.t;
                    if (s.t - band_since >= cfg.settle_s) {
                        engaged_acquired = true;
                        ever_acquired = true;
                        const double acq = band_since - engage_t;
                        report.acquisition_times.push_back(acq);
                        acq_sum += acq;
                        report.acquisition_time_s = std::max(report.acquisition_time_s, acq);
                    }
                } else {
                    band_since = kNaN;
                }
                if (!engaged_acquired && !engaged_failed &&
                    s.t - engage_t > cfg.acquisition_timeout_s) {
                    engaged_failed = true;
                    ++report.failed_engagements;
                }
            } else {
                if (std::abs(err) > cfg.loss_threshold_rad) {
                    if (std::isnan(loss_since)) loss_since = s.t;
                    if (s.t - loss_since >= cfg.loss_duration_s) lost = true;
                } else {
                    loss_since = kNaN;
                }
                locked_sum += err * err;
                ++locked_n;
            }
            if (ever_acquired) {
                residual_sum += err * err;
                ++residual_n;
            }
        }
        prev_enabled = enabled;

        if (calibrating && enabled) {
            cal_t.push_back(s.t);
            cal_x.push_back(x);
            if (cal_t.size() >= cal_needed) {
                const double expected = std::abs(cross * pc.optics.efficiency * plant.current_visibility() *
                                                 level * depth * run.detector.responsivity);
                double magnitude = 0.0;
                const double psi = calibrate_reference_phase(cal_t, cal_x, dither_hz, &magnitude);
                // Too little slope at the current phase to see the axis: keep the default.
                if (magnitude >= 0.2 * expected) {
                    demod.set_reference_phase(psi);
                    report.reference_phase = psi;
                }
                demod.reset();
                calibrating = false;
            }
            continue;
        }

        if (demod.push(s.t, x)) {
            const double g = -port_sign * plant.dither_sign() * 0.5 * cross * pc.optics.efficiency *
                             plant.current_visibility() * level * depth *
                             run.detector.responsivity * std::cos(demod.config().reference_phase);
            const double slope = g * cos_t;
            const double phase_error =
                slope != 0.0 ? (demod.output() - g * sin_t) / slope : 0.0;
            state.held = !enabled || calibrating;
            const double u = pid_step(-phase_error / gain, pid, state, demod.update_interval());
            plant.set_actuator(u);
        }
    }

    report.rail_events = state.rail_events;
    report.final_output_v = plant.actuator();
    report.residual_phase_rms_rad =
        residual_n > 0 ? std::sqrt(residual_sum / static_cast<double>(residual_n)) : 0.0;
    report.locked_phase_rms_rad =
        locked_n > 0 ? std::sqrt(locked_sum / static_cast<double>(locked_n)) : 0.0;
    if (!report.acquisition_times.empty()) {
        report.mean_acquisition_time_s =
            acq_sum / static_cast<double>(report.acquisition_times.size());
    }
    if (lost) {
        report.status = LockReport::Status::lock_lost;
        report.message = "phase error exceeded the loss threshold while locked";
    } else if (!ever_acquired || report.failed_engagements > 0) {
        report.status = LockReport::Status::no_acquisition;
        report.message = std::to_string(report.failed_engagements) + " of " +
                         std::to_string(report.engagements) + " engagements did not acquire";
    } else {
        report.status = LockReport::Status::locked;
    }
    report.acquired = report.status == LockReport::Status::locked;
    return report;
}

}  // namespace abisim
