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

#include "abisim/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>

#include "abisim/csv.hpp"
#include "abisim/errors.hpp"
#include "abisim/isolation.hpp"
#include "abisim/random.hpp"

namespace abisim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using json = nlohmann::json;

struct KindName {
    ScenarioKind kind;
    const char *name;
};

constexpr KindName kKindNames[] = {
    {ScenarioKind::beating_pd, "beating_pd"},
    {ScenarioKind::beating_spd, "beating_spd"},
    {ScenarioKind::scan_and_lock, "scan_and_lock"},
    {ScenarioKind::chopped_switch, "chopped_switch"},
    {ScenarioKind::frequency_tuner, "frequency_tuner"},
};

// Block-averages detector samples into the trace written to trace.csv.
class TraceDecimator {
   public:
    TraceDecimator(int factor, double dt) : factor_(factor), dt_(dt) {
        out_.dt = dt * factor;
    }

    void push(double t, double x) {
        if (!started_) {
            out_.t0 = t + 0.5 * (factor_ - 1) * dt_;
            started_ = true;
        }
        sum_ += x;
        if (++n_ == factor_) {
            out_.samples.push_back(sum_ / factor_);
            sum_ = 0.0;
            n_ = 0;
        }
    }

    TimeSeries take() { return std::move(out_); }

   private:
    int factor_;
    double dt_;
    bool started_ = false;
    double sum_ = 0.0;
    int n_ = 0;
    TimeSeries out_;
};

// Tracks (e + f)/η per unit input, which must equal 1 for every sample.
class EnergyAudit {
   public:
    explicit EnergyAudit(double eta) : eta_(eta) {}

    void add(const PlantSample &s) {
        const double ratio = (s.e + s.f) / eta_;
        sum_ += ratio;
        max_dev_ = std::max(max_dev_, std::abs(ratio - 1.0));
        ++n_;
    }

    json to_json() const {
        return {{"samples", n_},
                {"mean_ratio", n_ ? sum_ / static_cast<double>(n_) : 0.0},
                {"max_deviation", max_dev_}};
    }

    double max_deviation() const { return max_dev_; }

   private:
    double eta_;
    double sum_ = 0.0;
    double max_dev_ = 0.0;
    std::uint64_t n_ = 0;
};

FitOptions fit_options(const ScenarioConfig &cfg) {
    FitOptions o;
    o.mode = cfg.fit.mode;
    o.phase_grid = cfg.fit.phase_grid;
    o.max_iterations = cfg.fit.max_iterations;
    o.gradient_tolerance = cfg.fit.gradient_tolerance;
    return o;
}

const char *fit_mode_name(FitMode m) {
    return m == FitMode::fixed_frequency ? "fixed_frequency" : "free_frequency";
}

void fail(ScenarioResult &r, const std::string &why) {
    if (!r.failed) {
        r.failed = true;
        r.failure = why;
    } else {
        r.failure += "; " + why;
    }
}

// Runs a fit and stores either its result or its error in the summary.
std::optional<FitResult> fit_into(ScenarioResult &r, const std::function<FitResult()> &fit) {
    try {
        FitResult f = fit();
        r.summary["fit"] = fit_to_json(f);
        return f;
    } catch (const FitError &e) {
        r.summary["fit"] = {
            {"error", e.what()},
            {"kind", e.kind() == FitError::Kind::IllConditioned ? "IllConditioned"
                                                                : "NonConvergence"}};
        fail(r, std::string("fit: ") + e.what());
        return std::nullopt;
    }
}

void add_lock(ScenarioResult &r, const std::string &key, const LockReport &rep) {
    r.summary[key] = lock_to_json(rep);
    if (rep.status != LockReport::Status::locked) {
        fail(r, fmt::format("{} {}: {}", key, status_name(rep.status), rep.message));
    }
}

double max_e_per_unit(const ScenarioConfig &cfg) {
    const AbiConfig abi = cfg.abi_config();
    return envelope_intensities(SplitAmplitudes::from(abi), 0.0, abi.visibility, abi.efficiency,
                                1.0)
        .e;
}

LockRun base_lock_run(const ScenarioConfig &cfg) {
    LockRun run;
    run.input_intensity = cfg.optics.input_intensity;
    run.detector = cfg.pd;
    run.detector.sample_hz = cfg.simulation.sample_hz;
    run.detector_seed = derive_seed(cfg.seed, streams::pd1);
    return run;
}

void run_beating_pd(const ScenarioConfig &cfg, ScenarioResult &r) {
    Plant plant(cfg.plant_config());
    Rng rng(derive_seed(cfg.seed, streams::pd1));
    PdModel pd = cfg.pd;
    pd.sample_hz = cfg.simulation.sample_hz;
    EnergyAudit audit(cfg.optics.efficiency);
    TraceDecimator trace(cfg.simulation.trace_decimation, plant.dt());

    const auto n = static_cast<std::uint64_t>(std::llround(cfg.duration_s * cfg.simulation.sample_hz));
    for (std::uint64_t i = 0; i < n; ++i) {
        const PlantSample &s = plant.step();
        audit.add(s);
        trace.push(s.t, pd_sample(s.e * cfg.optics.input_intensity, pd, rng));
    }
    r.trace = trace.take();
    r.summary["energy_audit"] = audit.to_json();

    const double i_in = cfg.pd.responsivity * cfg.optics.input_intensity;
    const double dw = beat_angular_frequency(cfg.rf1, cfg.rf2);
    const FitOptions opts = fit_options(cfg);
    r.summary["fit_inputs"] = {{"source", "trace.csv"},
                               {"i_in", i_in},
                               {"delta_omega", dw},
                               {"window_s", 0.0},
                               {"offset", 0.0},
                               {"mode", fit_mode_name(opts.mode)}};
    const auto fit = fit_into(r, [&] { return fit_fringe(*r.trace, i_in, dw, opts); });
    r.headline.emplace_back("beat_hz", dw / kTwoPi);
    if (fit) {
        r.headline.emplace_back("v_hat", fit->v_hat);
        r.headline.emplace_back("eta_hat", fit->eta_hat);
        r.headline.emplace_back("phi_hat", fit->phi_hat);
        r.headline.emplace_back("residual_rms", fit->residual_rms);
    }
    r.headline.emplace_back("energy_max_deviation", audit.max_deviation());
}

void run_beating_spd(const ScenarioConfig &cfg, ScenarioResult &r) {
    Plant plant(cfg.plant_config());
    Rng rng(derive_seed(cfg.seed, streams::spd));
    EnergyAudit audit(cfg.optics.efficiency);
    const SpdModel &spd = cfg.spd.model;

    double rate_in = cfg.optics.input_intensity;
    if (cfg.spd.peak_counts_per_trigger > 0.0) {
        rate_in = (cfg.spd.peak_counts_per_trigger - spd.dark_prob) * spd.trigger_hz /
                  (spd.efficiency * max_e_per_unit(cfg));
    }
    const auto n_win = static_cast<std::size_t>(std::floor(cfg.duration_s / spd.window_s + 1e-9));
    const auto per_win = static_cast<std::size_t>(std::llround(spd.window_s * cfg.simulation.sample_hz));
    if (per_win == 0) throw ConfigError("simulation.sample_hz too low for one sample per SPD window");

    CountSeries counts;
    counts.window_s = spd.window_s;
    counts.triggers_per_window = spd.triggers_per_window();
    std::vector<double> mean_e(n_win);
    bool saturated = false;
    for (std::size_t w = 0; w < n_win; ++w) {
        double sum = 0.0;
        for (std::size_t k = 0; k < per_win; ++k) {
            const PlantSample &s = plant.step();
            audit.add(s);
            sum += s.e;
        }
        mean_e[w] = sum / static_cast<double>(per_win);
        const SpdCount c = spd_count_window(rate_in * mean_e[w], spd, counts.window_start(w), rng);
        saturated = saturated || c.saturated;
        counts.counts.push_back(c.counts);
        counts.enabled_triggers.push_back(c.enabled_triggers);
    }
    r.counts = counts;
    r.summary["energy_audit"] = audit.to_json();

    const double n_trig = static_cast<double>(counts.triggers_per_window);
    const double i_in = n_trig * spd.efficiency * rate_in / spd.trigger_hz;
    const double offset = n_trig * spd.dark_prob;
    const double dw = beat_angular_frequency(cfg.rf1, cfg.rf2);
    FitOptions opts = fit_options(cfg);
    opts.offset = offset;
    r.summary["fit_inputs"] = {{"source", "counts.csv"},
                               {"i_in", i_in},
                               {"delta_omega", dw},
                               {"window_s", spd.window_s},
                               {"offset", offset},
                               {"mode", fit_mode_name(opts.mode)}};
    const auto fit = fit_into(r, [&] { return fit_fringe(counts, i_in, dw, opts); });

    // Dark-count contribution: fit the noiseless expectation with and
    // without the background term in the model.
    std::vector<double> t(n_win), expected(n_win);
    for (std::size_t w = 0; w < n_win; ++w) {
        t[w] = counts.window_start(w);
        expected[w] = offset + i_in * mean_e[w];
    }
    FitOptions ideal = opts;
    ideal.window_s = spd.window_s;
    ideal.poisson_weights = true;
    double dark_bias = std::numeric_limits<double>::quiet_NaN();
    try {
        const double v_model = fit_fringe(t, expected, i_in, dw, ideal).v_hat;
        ideal.offset = 0.0;
        const double v_ignored = fit_fringe(t, expected, i_in, dw, ideal).v_hat;
        dark_bias = v_model - v_ignored;
    } catch (const FitError &) {
    }

    const double peak = spd.efficiency * rate_in * max_e_per_unit(cfg) / spd.trigger_hz + spd.dark_prob;
    r.summary["counts"] = {{"input_photon_rate", rate_in},
                           {"peak_click_probability", peak},
                           {"windows", n_win},
                           {"triggers_per_window", counts.triggers_per_window},
                           {"saturated", saturated},
                           {"dark_count_v_bias", dark_bias}};
    r.headline.emplace_back("beat_hz", dw / kTwoPi);
    if (fit) {
        r.headline.emplace_back("v_hat", fit->v_hat);
        r.headline.emplace_back("eta_hat", fit->eta_hat);
        r.headline.emplace_back("phi_hat", fit->phi_hat);
    }
    r.headline.emplace_back("peak_click_probability", peak);
    r.headline.emplace_back("dark_count_v_bias", dark_bias);
}

// Mean detector level (per unit input) over samples taken after `from`.
double mean_after(const std::vector<std::pair<double, double>> &tx, double from, double scale) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &[t, x] : tx) {
        if (t >= from) {
            sum += x;
            ++n;
        }
    }
    return n ? sum / (static_cast<double>(n) * scale) : std::numeric_limits<double>::quiet_NaN();
}

void run_scan_and_lock(const ScenarioConfig &cfg, ScenarioResult &r) {
    Plant plant(cfg.plant_config());
    EnergyAudit audit(cfg.optics.efficiency);
    TraceDecimator trace(cfg.simulation.trace_decimation, plant.dt());
    const double scale = cfg.pd.responsivity * cfg.optics.input_intensity;

    // PZT scan: triangle around the bias, no feedback.
    {
        Rng rng(derive_seed(cfg.seed, streams::pd2));
        PdModel pd = cfg.pd;
        pd.sample_hz = cfg.simulation.sample_hz;
        TraceDecimator scan_trace(cfg.simulation.trace_decimation, plant.dt());
        const auto n = static_cast<std::uint64_t>(std::llround(cfg.scan.scan_s * cfg.simulation.sample_hz));
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = plant.next_time();
            const double x = cfg.scan.ramp_hz * t + 0.25;
            const double tri = 1.0 - 4.0 * std::abs(x - std::floor(x) - 0.5);
            plant.set_actuator(cfg.pzt_bias_v + 0.5 * cfg.scan.ramp_span_v * tri);
            const PlantSample &s = plant.step();
            audit.add(s);
            const double v = pd_sample(s.e * cfg.optics.input_intensity, pd, rng);
            trace.push(s.t, v);
            scan_trace.push(s.t, v);
        }
        const TimeSeries st = scan_trace.take();
        const auto [mn, mx] = std::minmax_element(st.samples.begin(), st.samples.end());
        const double vis = st.samples.empty() ? 0.0 : (*mx - *mn) / (*mx + *mn);
        r.summary["scan"] = {{"visibility", vis}, {"max_level", *mx / scale}, {"min_level", *mn / scale}};
        r.headline.emplace_back("scan_visibility", vis);
        plant.set_actuator(cfg.pzt_bias_v);
    }

    auto lock_segment = [&](double target, double duration, std::uint64_t stream,
                            std::vector<std::pair<double, double>> &tx) {
        LockRun run = base_lock_run(cfg);
        run.duration_s = duration;
        run.detector_seed = derive_seed(cfg.seed, stream);
        run.observer = [&](const PlantSample &s, double x, bool) {
            audit.add(s);
            trace.push(s.t, x);
            tx.emplace_back(s.t, x);
        };
        const double start = plant.next_time();
        LockReport rep = lock_to_phase(target, plant, cfg.lock.config, run);
        const double settled = start + (rep.acquisition_times.empty() ? duration : rep.acquisition_times.front()) +
                               cfg.lock.config.settle_s;
        return std::pair{rep, settled};
    };

    std::vector<std::pair<double, double>> max_tx, min_tx;
    const auto [rep_max, from_max] = lock_segment(0.0, cfg.scan.lock_max_s, streams::pd1, max_tx);
    const double lock_min_s = cfg.duration_s - cfg.scan.scan_s - cfg.scan.lock_max_s;
    const auto [rep_min, from_min] = lock_segment(std::numbers::pi, lock_min_s, streams::isolation, min_tx);
    add_lock(r, "lock_max", rep_max);
    add_lock(r, "lock_min", rep_min);
    r.trace = trace.take();
    r.summary["energy_audit"] = audit.to_json();

    const double hi = mean_after(max_tx, from_max, scale);
    const double lo = mean_after(min_tx, from_min, scale);
    const double vis = (hi - lo) / (hi + lo);
    r.summary["locked"] = {{"max_level", hi},
                           {"min_level", lo},
                           {"visibility", vis},
                           {"efficiency", hi + lo},
                           {"direct_pass_isolation_db", -10.0 * std::log10(lo)}};
    r.headline.emplace_back("locked_max_level", hi);
    r.headline.emplace_back("locked_min_level", lo);
    r.headline.emplace_back("locked_visibility", vis);
    r.headline.emplace_back("efficiency", hi + lo);
    r.headline.emplace_back("acquisition_time_s", std::max(rep_max.acquisition_time_s, rep_min.acquisition_time_s));
    r.headline.emplace_back("residual_phase_rms_max", rep_max.residual_phase_rms_rad);
    r.headline.emplace_back("residual_phase_rms_min", rep_min.residual_phase_rms_rad);
}

json isolation_json(const IsolationResult &iso) {
    json j = {{"on_rate", iso.on_rate},
              {"off_rate", iso.off_rate},
              {"attenuation_db", iso.attenuation_db}};
    j["isolation_db"] = iso.isolation_db ? json(*iso.isolation_db) : json(nullptr);
    j["lower_bound_db"] = iso.lower_bound_db ? json(*iso.lower_bound_db) : json(nullptr);
    return j;
}

void run_chopped_switch(const ScenarioConfig &cfg, ScenarioResult &r) {
    PlantConfig pc = cfg.plant_config();
    const GateEnvelope gate{cfg.chop.repetition_hz, cfg.chop.duty, 0.0, 0.0};
    pc.rf1.gate = gate;
    pc.rf2.gate = gate;
    Plant plant(pc);
    EnergyAudit audit(cfg.optics.efficiency);
    TraceDecimator trace(cfg.simulation.trace_decimation, plant.dt());
    const double scale = cfg.pd.responsivity * cfg.optics.input_intensity;
    const double target = cfg.lock.target_phase;
    const double band = cfg.lock.config.acquire_threshold_rad;

    double on_sum = 0.0, on_e = 0.0, on_f = 0.0, on_vis = 0.0, off_sum = 0.0;
    std::uint64_t on_n = 0, off_n = 0;
    LockRun run = base_lock_run(cfg);
    run.duration_s = cfg.duration_s;
    run.feedback_enable = gate;
    run.observer = [&](const PlantSample &s, double x, bool enabled) {
        audit.add(s);
        trace.push(s.t, x);
        if (enabled && std::abs(std::remainder(s.control_phase - target, kTwoPi)) < band) {
            on_sum += x;
            on_e += s.e;
            on_f += s.f;
            on_vis += s.visibility;
            ++on_n;
        } else if (!s.rf1_on && !s.rf2_on) {
            off_sum += x;
            ++off_n;
        }
    };
    const LockReport rep = lock_to_phase(target, plant, cfg.lock.config, run);
    add_lock(r, "lock", rep);
    r.trace = trace.take();
    r.summary["energy_audit"] = audit.to_json();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double on_level = on_n ? on_sum / (scale * static_cast<double>(on_n)) : nan;
    const double off_level = off_n ? off_sum / (scale * static_cast<double>(off_n)) : nan;
    const double p_on = on_n ? on_e / static_cast<double>(on_n) : nan;
    const double f_on = on_n ? on_f / static_cast<double>(on_n) : nan;
    const double vis_on = on_n ? on_vis / static_cast<double>(on_n) : nan;

    // Counting measurement of the switch isolation: RF-on output through a
    // calibrated attenuator against the RF-off double-diffraction leakage.
    const AbiConfig abi = cfg.abi_config();
    json iso_j;
    std::optional<double> counted_db;
    if (on_n) {
        Rng rng(derive_seed(cfg.seed, streams::isolation));
        SpdModel spd = cfg.spd.model;
        spd.enable_gate = {};
        spd.window_s = cfg.chop.isolation_exposure_s;
        const double p_off = cfg.optics.efficiency * double_diffraction_leakage(abi);
        const double att = std::pow(10.0, -cfg.chop.attenuation_db / 10.0);
        const SpdCount c_on = spd_count_window(cfg.chop.photon_flux * p_on * att, spd, 0.0, rng);
        const SpdCount c_off = spd_count_window(cfg.chop.photon_flux * p_off, spd, 0.0, rng);
        const IsolationResult iso = isolation_db(
            {static_cast<double>(c_on.counts), static_cast<double>(c_on.enabled_triggers)},
            {static_cast<double>(c_off.counts), static_cast<double>(c_off.enabled_triggers)},
            cfg.chop.attenuation_db);
        iso_j = isolation_json(iso);
        iso_j["on_counts"] = c_on.counts;
        iso_j["off_counts"] = c_off.counts;
        counted_db = iso.isolation_db;
    }
    r.summary["isolation"] = {
        {"counted", iso_j},
        {"double_diffraction_db", *double_diffraction_isolation(abi).isolation_db},
        {"direct_pass_db", on_n ? -10.0 * std::log10(f_on) : nan},
        {"direct_pass_model_db", on_n ? *direct_pass_isolation(cfg.optics.efficiency, vis_on).isolation_db : nan},
        {"locked_visibility", vis_on}};
    r.summary["levels"] = {{"on_level", on_level}, {"off_level", off_level}, {"on_samples", on_n}, {"off_samples", off_n}};

    r.headline.emplace_back("acquisition_time_s", rep.acquisition_time_s);
    r.headline.emplace_back("mean_acquisition_time_s", rep.mean_acquisition_time_s);
    r.headline.emplace_back("residual_phase_rms_rad", rep.residual_phase_rms_rad);
    r.headline.emplace_back("locked_phase_rms_rad", rep.locked_phase_rms_rad);
    r.headline.emplace_back("on_level", on_level);
    r.headline.emplace_back("off_level", off_level);
    r.headline.emplace_back("isolation_db", counted_db.value_or(nan));
    r.headline.emplace_back("direct_pass_isolation_db", on_n ? -10.0 * std::log10(f_on) : nan);
}

void run_frequency_tuner(const ScenarioConfig &cfg, ScenarioResult &r) {
    Plant plant(cfg.plant_config());
    EnergyAudit audit(cfg.optics.efficiency);
    TraceDecimator trace(cfg.simulation.trace_decimation, plant.dt());
    const TimingSequence seq = make_tuner_sequence(cfg.tuner.lr_duty, cfg.tuner.lr_hz, cfg.tuner.spde_duty);

    SpdModel spd = cfg.spd.model;
    spd.enable_gate = seq.spde_gate;
    const auto n_win = static_cast<std::size_t>(std::floor(cfg.duration_s / spd.window_s + 1e-9));
    std::vector<double> e_sum(n_win, 0.0);
    std::vector<std::uint64_t> e_n(n_win, 0);

    LockRun run = base_lock_run(cfg);
    run.duration_s = cfg.duration_s;
    run.feedback_enable = seq.feedback_enable;
    run.input_level = [&](double t) { return gate_state(seq.lr_gate, t) ? cfg.tuner.lr_intensity : 0.0; };
    run.observer = [&](const PlantSample &s, double x, bool) {
        audit.add(s);
        trace.push(s.t, x);
        const auto w = static_cast<std::size_t>(std::floor(s.t / spd.window_s));
        if (w < n_win && gate_state(seq.coh_gate, s.t) && gate_state(seq.spde_gate, s.t)) {
            e_sum[w] += s.e;
            ++e_n[w];
        }
    };
    const LockReport rep = lock_to_phase(cfg.lock.target_phase, plant, cfg.lock.config, run);
    add_lock(r, "lock", rep);
    r.trace = trace.take();
    r.summary["energy_audit"] = audit.to_json();

    Rng rng(derive_seed(cfg.seed, streams::spd));
    CountSeries counts;
    counts.window_s = spd.window_s;
    counts.triggers_per_window = spd.triggers_per_window();
    std::int64_t clicks_enabled = 0, triggers_enabled = 0, disabled_counts = 0;
    std::vector<double> full;
    for (std::size_t w = 0; w < n_win; ++w) {
        const double e = e_n[w] ? e_sum[w] / static_cast<double>(e_n[w]) : 0.0;
        const SpdCount c = spd_count_window(cfg.tuner.coh_photon_rate * e, spd, counts.window_start(w), rng);
        counts.counts.push_back(c.counts);
        counts.enabled_triggers.push_back(c.enabled_triggers);
        if (c.enabled_triggers == 0) {
            disabled_counts += c.counts;
        } else {
            clicks_enabled += c.counts;
            triggers_enabled += c.enabled_triggers;
        }
        if (c.enabled_triggers == counts.triggers_per_window) full.push_back(static_cast<double>(c.counts));
    }
    r.counts = counts;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double mean = nan, cv = nan;
    if (full.size() >= 2) {
        double s = 0.0, s2 = 0.0;
        for (double x : full) s += x;
        mean = s / static_cast<double>(full.size());
        for (double x : full) s2 += (x - mean) * (x - mean);
        cv = std::sqrt(s2 / static_cast<double>(full.size() - 1)) / mean;
    }
    const double p_enabled = triggers_enabled ? static_cast<double>(clicks_enabled) / static_cast<double>(triggers_enabled) : nan;
    const double p_ideal = spd.efficiency * cfg.tuner.coh_photon_rate * max_e_per_unit(cfg) / spd.trigger_hz + spd.dark_prob;
    r.summary["counts"] = {{"windows", n_win},
                           {"full_windows", full.size()},
                           {"click_probability_enabled", p_enabled},
                           {"click_probability_ideal", p_ideal},
                           {"full_window_mean_counts", mean},
                           {"full_window_cv", cv},
                           {"disabled_window_counts", disabled_counts}};
    r.headline.emplace_back("acquisition_time_s", rep.acquisition_time_s);
    r.headline.emplace_back("residual_phase_rms_rad", rep.residual_phase_rms_rad);
    r.headline.emplace_back("click_probability_enabled", p_enabled);
    r.headline.emplace_back("click_probability_ideal", p_ideal);
    r.headline.emplace_back("full_window_cv", cv);
    r.headline.emplace_back("disabled_window_counts", static_cast<double>(disabled_counts));
}

}  // namespace

const char *scenario_name(ScenarioKind k) {
    for (const auto &kn : kKindNames) {
        if (kn.kind == k) return kn.name;
    }
    return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view name) {
    for (const auto &kn : kKindNames) {
        if (name == kn.name) return kn.kind;
    }
    return std::nullopt;
}

const std::vector<ScenarioKind> &all_scenario_kinds() {
    static const std::vector<ScenarioKind> kinds = [] {
        std::vector<ScenarioKind> v;
        for (const auto &kn : kKindNames) v.push_back(kn.kind);
        return v;
    }();
    return kinds;
}

AbiConfig ScenarioConfig::abi_config() const {
    // Both AOMs share the nominal RF frequency for the frequency labels; any
    // RF₂ detuning is carried by its drive phase.
    const double omega = kTwoPi * rf1.carrier_hz;
    AbiConfig c;
    c.aom1 = AomConfig::with_efficiency(optics.aom1.diffraction_efficiency, omega);
    c.aom2 = AomConfig::with_efficiency(optics.aom2.diffraction_efficiency, omega);
    c.aom1.off_leakage_power = std::pow(10.0, optics.aom1.off_leakage_db / 10.0);
    c.aom2.off_leakage_power = std::pow(10.0, optics.aom2.off_leakage_db / 10.0);
    c.path_phase = optics.path_phase;
    c.visibility = optics.visibility;
    c.efficiency = optics.efficiency;
    return c;
}

PlantConfig ScenarioConfig::plant_config() const {
    PlantConfig p;
    p.optics = abi_config();
    p.rf1 = rf1;
    p.rf2 = rf2;
    p.diffusion = diffusion;
    p.drift_seed = derive_seed(seed, streams::drift);
    p.pzt = pzt;
    p.pzt.v0_visibility = optics.visibility;
    p.actuator_bias_v = pzt_bias_v;
    p.actuator = lock.actuator;
    p.sample_hz = simulation.sample_hz;
    p.field_mode = simulation.field_mode;
    return p;
}

void ScenarioConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw ConfigError(fmt::format("schema_version {} is not supported (expected {})",
                                      schema_version, kSchemaVersion));
    }
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("duration_s must be positive");
    if (simulation.trace_decimation < 1) throw ConfigError("simulation.trace_decimation must be >= 1");
    if (!(optics.input_intensity > 0.0)) throw ConfigError("optics.input_intensity must be positive");
    for (const AomSection *a : {&optics.aom1, &optics.aom2}) {
        if (!(a->off_leakage_db <= 0.0)) throw ConfigError("optics.aomN.off_leakage_db must be <= 0");
    }
    abi_config().validate();
    plant_config().validate();
    pd.validate();
    spd.model.validate();
    if (!(spd.peak_counts_per_trigger >= 0.0 && spd.peak_counts_per_trigger <= 1.0)) {
        throw ConfigError("spd.peak_counts_per_trigger must lie in [0, 1]");
    }
    if (spd.peak_counts_per_trigger > 0.0 && spd.peak_counts_per_trigger <= spd.model.dark_prob) {
        throw ConfigError("spd.peak_counts_per_trigger must exceed spd.dark_prob");
    }
    if (fit.phase_grid < 1 || fit.max_iterations < 1 || !(fit.gradient_tolerance > 0.0)) {
        throw ConfigError("fit: phase_grid and max_iterations must be >= 1, gradient_tolerance > 0");
    }

    const bool needs_lock = kind == ScenarioKind::scan_and_lock || kind == ScenarioKind::chopped_switch ||
                            kind == ScenarioKind::frequency_tuner;
    if (needs_lock) {
        lock.config.validate();
        if (!(rf1.dither_depth > 0.0 || rf2.dither_depth > 0.0)) {
            throw ConfigError("lock scenarios need a dither on rf1 or rf2");
        }
        if (std::abs(std::cos(lock.target_phase)) < 0.05) {
            throw ConfigError("lock.target_phase is too close to quadrature");
        }
    }
    switch (kind) {
        case ScenarioKind::beating_pd:
            if (rf1.carrier_hz == rf2.carrier_hz) throw ConfigError("beating_pd needs rf1 and rf2 detuned");
            break;
        case ScenarioKind::beating_spd:
            if (rf1.carrier_hz == rf2.carrier_hz) throw ConfigError("beating_spd needs rf1 and rf2 detuned");
            if (duration_s < spd.model.window_s) throw ConfigError("beating_spd: duration_s shorter than one SPD window");
            break;
        case ScenarioKind::scan_and_lock:
            if (!(scan.ramp_hz > 0.0 && scan.ramp_span_v > 0.0)) throw ConfigError("scan: ramp_hz and ramp_span_v must be positive");
            if (!(scan.scan_s > 0.0 && scan.lock_max_s > 0.0 && scan.scan_s + scan.lock_max_s < duration_s)) {
                throw ConfigError("scan: need 0 < scan_s, 0 < lock_max_s and scan_s + lock_max_s < duration_s");
            }
            break;
        case ScenarioKind::chopped_switch:
            GateEnvelope{chop.repetition_hz, chop.duty, 0.0, 0.0}.validate();
            if (!(chop.photon_flux > 0.0 && chop.isolation_exposure_s > 0.0)) {
                throw ConfigError("chop: photon_flux and isolation_exposure_s must be positive");
            }
            break;
        case ScenarioKind::frequency_tuner:
            make_tuner_sequence(tuner.lr_duty, tuner.lr_hz, tuner.spde_duty);
            if (!(tuner.lr_intensity > 0.0 && tuner.coh_photon_rate >= 0.0)) {
                throw ConfigError("tuner: lr_intensity must be positive and coh_photon_rate non-negative");
            }
            break;
    }
}

ScenarioConfig default_config(ScenarioKind kind) {
    ScenarioConfig c;
    c.kind = kind;
    c.pd.noise_sigma = 0.0095;
    c.lock.config.pid.kp = 0.3;
    c.lock.config.pid.ki = 2e4;

    auto with_lock = [&c] {
        c.rf1.dither_hz = 200e3;
        c.rf1.dither_depth = 0.1;
        c.diffusion = kDefaultDiffusion;
        c.pzt_bias_v = 10.0;
        c.optics.path_phase = 0.7;
        c.simulation.sample_hz = 4e6;
    };

    switch (kind) {
        case ScenarioKind::beating_pd:
            c.duration_s = 200e-6;
            c.simulation.sample_hz = 10e6;
            c.rf2.carrier_hz = 79.9e6;
            c.optics.path_phase = 1.08;
            break;
        case ScenarioKind::beating_spd:
            c.duration_s = 1.0;
            c.simulation.sample_hz = 1e5;
            c.rf2.carrier_hz = 80e6 - 5.0;
            c.optics.visibility = 0.992;
            c.optics.path_phase = 1.08;
            c.spd.peak_counts_per_trigger = 0.06;
            break;
        case ScenarioKind::scan_and_lock:
            with_lock();
            c.duration_s = 0.2;
            c.simulation.trace_decimation = 100;
            break;
        case ScenarioKind::chopped_switch:
            with_lock();
            c.duration_s = 0.1;
            c.simulation.trace_decimation = 100;
            break;
        case ScenarioKind::frequency_tuner:
            with_lock();
            c.duration_s = 1.0;
            c.simulation.trace_decimation = 400;
            c.spd.model.window_s = 20e-3;
            c.lock.config.detector_port = Port::f;
            break;
    }
    return c;
}

ScenarioResult run_scenario(const ScenarioConfig &cfg) {
    cfg.validate();
    ScenarioResult r;
    r.summary = {{"schema_version", cfg.schema_version},
                 {"scenario", scenario_name(cfg.kind)},
                 {"seed", cfg.seed},
                 {"duration_s", cfg.duration_s}};
    switch (cfg.kind) {
        case ScenarioKind::beating_pd: run_beating_pd(cfg, r); break;
        case ScenarioKind::beating_spd: run_beating_spd(cfg, r); break;
        case ScenarioKind::scan_and_lock: run_scan_and_lock(cfg, r); break;
        case ScenarioKind::chopped_switch: run_chopped_switch(cfg, r); break;
        case ScenarioKind::frequency_tuner: run_frequency_tuner(cfg, r); break;
    }
    json headline = json::object();
    for (const auto &[k, v] : r.headline) headline[k] = v;
    r.summary["headline"] = headline;
    r.summary["status"] = r.failed ? "failed" : "ok";
    if (r.failed) r.summary["failure"] = r.failure;
    return r;
}

namespace {

void write_file(const std::filesystem::path &path, bool force, const std::function<void(std::ostream &)> &body) {
    if (!force && std::filesystem::exists(path)) {
        throw IoError(path.string() + " exists; pass --force to overwrite");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_artifacts(const ScenarioResult &result, const std::filesystem::path &dir, bool force) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    // Check every target before writing any, so a refusal leaves no partial set.
    if (!force) {
        for (const char *name : {"trace.csv", "counts.csv", "summary.json"}) {
            if (std::filesystem::exists(dir / name)) {
                throw IoError((dir / name).string() + " exists; pass --force to overwrite");
            }
        }
    }
    if (result.trace) write_file(dir / "trace.csv", true, [&](std::ostream &os) { write_trace_csv(os, *result.trace); });
    if (result.counts) write_file(dir / "counts.csv", true, [&](std::ostream &os) { write_counts_csv(os, *result.counts); });
    write_file(dir / "summary.json", true, [&](std::ostream &os) { os << result.summary.dump(2) << '\n'; });
}

std::string summary_text(const ScenarioResult &result) {
    std::string out = fmt::format("scenario  {}\nstatus    {}\n", result.summary.value("scenario", "?"),
                                  result.failed ? "FAILED: " + result.failure : "ok");
    std::size_t width = 0;
    for (const auto &[k, v] : result.headline) width = std::max(width, k.size());
    for (const auto &[k, v] : result.headline) out += fmt::format("  {:<{}}  {:.6g}\n", k, width, v);
    return out;
}

json fit_to_json(const FitResult &f) {
    return {{"v_hat", f.v_hat},
            {"eta_hat", f.eta_hat},
            {"phi_hat", f.phi_hat},
            {"delta_omega_hat", f.delta_omega_hat},
            {"delta_omega_free", f.delta_omega_free},
            {"residual_rms", f.residual_rms},
            {"converged", f.converged},
            {"iterations", f.iterations},
            {"gradient_cosine", f.gradient_cosine},
            {"std_error", {{"v", f.std_error[0]}, {"eta", f.std_error[1]}, {"phi", f.std_error[2]}, {"delta_omega", f.std_error[3]}}}};
}

json lock_to_json(const LockReport &r) {
    return {{"status", status_name(r.status)},
            {"acquired", r.acquired},
            {"target_phase", r.target_phase},
            {"acquisition_time_s", r.acquisition_time_s},
            {"mean_acquisition_time_s", r.mean_acquisition_time_s},
            {"engagements", r.engagements},
            {"failed_engagements", r.failed_engagements},
            {"residual_phase_rms_rad", r.residual_phase_rms_rad},
            {"locked_phase_rms_rad", r.locked_phase_rms_rad},
            {"rail_events", r.rail_events},
            {"reference_phase", r.reference_phase},
            {"final_output_v", r.final_output_v},
            {"message", r.message}};
}

}  // namespace abisim
