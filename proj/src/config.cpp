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

#include "abisim/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "abisim/errors.hpp"

extern char **environ;

namespace abisim {

namespace {

struct Field {
    std::string path;
    std::string comment;
    std::function<void(ScenarioConfig &, const YAML::Node &)> read;
    std::function<std::string(const ScenarioConfig &)> write;
    std::function<double(const ScenarioConfig &)> number;
};

std::string format_double(double v) {
    if (std::isnan(v)) return ".nan";
    if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
    std::string s = fmt::format("{}", v);
    // Keep floats recognisable as such for a reader of the file.
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

template <class T>
T scalar_as(const YAML::Node &n, const std::string &path) {
    if (!n.IsScalar()) throw ConfigError(fmt::format("'{}' must be a scalar", path));
    try {
        return n.as<T>();
    } catch (const YAML::Exception &) {
        throw ConfigError(fmt::format("'{}': cannot parse '{}'", path, n.Scalar()));
    }
}

template <class Get>
Field num(std::string path, Get get, std::string comment) {
    return {path, std::move(comment),
            [get, path](ScenarioConfig &c, const YAML::Node &n) { get(c) = scalar_as<double>(n, path); },
            [get](const ScenarioConfig &c) { return format_double(get(const_cast<ScenarioConfig &>(c))); },
            [get](const ScenarioConfig &c) { return get(const_cast<ScenarioConfig &>(c)); }};
}

template <class Get>
Field integer(std::string path, Get get, std::string comment) {
    using T = std::remove_reference_t<decltype(get(std::declval<ScenarioConfig &>()))>;
    return {path, std::move(comment),
            [get, path](ScenarioConfig &c, const YAML::Node &n) {
                if (!n.IsScalar() || (std::is_unsigned_v<T> && n.Scalar().starts_with('-'))) {
                    throw ConfigError(fmt::format("'{}' must be a non-negative integer", path));
                }
                get(c) = scalar_as<T>(n, path);
            },
            [get](const ScenarioConfig &c) { return fmt::format("{}", get(const_cast<ScenarioConfig &>(c))); },
            [get](const ScenarioConfig &c) { return static_cast<double>(get(const_cast<ScenarioConfig &>(c))); }};
}

template <class Get>
Field boolean(std::string path, Get get, std::string comment) {
    return {path, std::move(comment),
            [get, path](ScenarioConfig &c, const YAML::Node &n) { get(c) = scalar_as<bool>(n, path); },
            [get](const ScenarioConfig &c) { return std::string(get(const_cast<ScenarioConfig &>(c)) ? "true" : "false"); },
            [get](const ScenarioConfig &c) { return get(const_cast<ScenarioConfig &>(c)) ? 1.0 : 0.0; }};
}

template <class E, class Get>
Field enumeration(std::string path, Get get, std::vector<std::pair<E, std::string>> names,
                  std::string comment) {
    std::string choices;
    for (const auto &[e, s] : names) choices += (choices.empty() ? "" : " | ") + s;
    comment += " (" + choices + ")";
    return {path, std::move(comment),
            [get, path, names](ScenarioConfig &c, const YAML::Node &n) {
                const std::string s = scalar_as<std::string>(n, path);
                for (const auto &[e, name] : names) {
                    if (s == name) {
                        get(c) = e;
                        return;
                    }
                }
                throw ConfigError(fmt::format("'{}': unknown value '{}'", path, s));
            },
            [get, names](const ScenarioConfig &c) {
                const E v = get(const_cast<ScenarioConfig &>(c));
                for (const auto &[e, name] : names) {
                    if (e == v) return name;
                }
                return std::string("?");
            },
            [get, names](const ScenarioConfig &c) {
                const E v = get(const_cast<ScenarioConfig &>(c));
                for (std::size_t i = 0; i < names.size(); ++i) {
                    if (names[i].first == v) return static_cast<double>(i);
                }
                return -1.0;
            }};
}

#define REF(T, expr) [](ScenarioConfig &c) -> T & { return c.expr; }

std::vector<Field> make_fields() {
    std::vector<std::pair<ScenarioKind, std::string>> kinds;
    for (ScenarioKind k : all_scenario_kinds()) kinds.emplace_back(k, scenario_name(k));

    std::vector<Field> f;
    f.push_back(integer("schema_version", REF(int, schema_version), "config schema version"));
    f.push_back(enumeration("scenario", REF(ScenarioKind, kind), kinds, "experiment to simulate"));
    f.push_back(num("duration_s", REF(double, duration_s), "simulated time, s"));
    f.push_back(integer("seed", REF(std::uint64_t, seed), "master seed; every random stream derives from it"));

    f.push_back(num("simulation.sample_hz", REF(double, simulation.sample_hz), "plant and detector sample rate, Hz"));
    f.push_back(boolean("simulation.field_mode", REF(bool, simulation.field_mode), "propagate complex fields instead of closed-form intensities"));
    f.push_back(integer("simulation.trace_decimation", REF(int, simulation.trace_decimation), "trace.csv keeps block means of this many samples"));

    for (const char *aom : {"aom1", "aom2"}) {
        const bool first = std::string(aom) == "aom1";
        const std::string p = std::string("optics.") + aom + ".";
        f.push_back(num(p + "diffraction_efficiency",
                        [first](ScenarioConfig &c) -> double & { return (first ? c.optics.aom1 : c.optics.aom2).diffraction_efficiency; },
                        "diffracted power fraction r^2 with RF on"));
        f.push_back(num(p + "off_leakage_db",
                        [first](ScenarioConfig &c) -> double & { return (first ? c.optics.aom1 : c.optics.aom2).off_leakage_db; },
                        "diffracted power with RF off, dB"));
    }
    f.push_back(num("optics.path_phase", REF(double, optics.path_phase), "static path phase, rad"));
    f.push_back(num("optics.visibility", REF(double, optics.visibility), "mode-overlap visibility V"));
    f.push_back(num("optics.efficiency", REF(double, optics.efficiency), "lumped transmission eta"));
    f.push_back(num("optics.input_intensity", REF(double, optics.input_intensity), "intensity at port b (PD units, or photons/s for SPD beating without a peak target)"));

    for (const char *rf : {"rf1", "rf2"}) {
        const bool first = std::string(rf) == "rf1";
        const std::string p = std::string(rf) + ".";
        auto drive = [first](ScenarioConfig &c) -> RfDrive & { return first ? c.rf1 : c.rf2; };
        f.push_back(num(p + "carrier_hz", [drive](ScenarioConfig &c) -> double & { return drive(c).carrier_hz; }, "RF frequency, Hz"));
        f.push_back(num(p + "phase0", [drive](ScenarioConfig &c) -> double & { return drive(c).phase0; }, "static RF phase, rad"));
        f.push_back(num(p + "dither_hz", [drive](ScenarioConfig &c) -> double & { return drive(c).dither_hz; }, "phase dither frequency, Hz"));
        f.push_back(num(p + "dither_depth", [drive](ScenarioConfig &c) -> double & { return drive(c).dither_depth; }, "phase dither amplitude, rad (0 = off)"));
    }

    f.push_back(num("drift.diffusion", REF(double, diffusion), "phase random-walk diffusion, rad^2/s"));

    f.push_back(num("pzt.gain", REF(double, pzt.gain), "phase per volt, rad/V"));
    f.push_back(num("pzt.v_min", REF(double, pzt.v_min), "actuator lower limit, V"));
    f.push_back(num("pzt.v_max", REF(double, pzt.v_max), "actuator upper limit, V"));
    f.push_back(num("pzt.walkoff_scale_v", REF(double, pzt.walkoff_scale_v), "visibility factor is exp(-(v/scale)^2)"));
    f.push_back(num("pzt.bias_v", REF(double, pzt_bias_v), "initial actuator voltage, V"));

    f.push_back(num("pd.responsivity", REF(double, pd.responsivity), "PD output per unit intensity"));
    f.push_back(num("pd.noise_sigma", REF(double, pd.noise_sigma), "additive Gaussian noise per sample"));

    f.push_back(num("spd.efficiency", REF(double, spd.model.efficiency), "detection efficiency"));
    f.push_back(num("spd.dark_prob", REF(double, spd.model.dark_prob), "dark counts per trigger"));
    f.push_back(num("spd.trigger_hz", REF(double, spd.model.trigger_hz), "trigger rate, Hz"));
    f.push_back(num("spd.window_s", REF(double, spd.model.window_s), "counting window, s"));
    f.push_back(num("spd.peak_counts_per_trigger", REF(double, spd.peak_counts_per_trigger), "SPD beating: input rate giving this click probability at the fringe maximum (0 = use optics.input_intensity)"));

    f.push_back(num("lock.target_phase", REF(double, lock.target_phase), "overall phase to hold, rad (0 = port e maximum)"));
    f.push_back(enumeration<ActuatorMode>("lock.actuator", REF(ActuatorMode, lock.actuator),
                            {{ActuatorMode::pzt, "pzt"}, {ActuatorMode::rf2, "rf2"}}, "feedback actuator"));
    f.push_back(enumeration<Port>("lock.detector_port", REF(Port, lock.config.detector_port),
                            {{Port::e, "e"}, {Port::f, "f"}}, "port seen by the lock detector"));
    f.push_back(num("lock.kp", REF(double, lock.config.pid.kp), "proportional gain"));
    f.push_back(num("lock.ki", REF(double, lock.config.pid.ki), "integral gain, 1/s"));
    f.push_back(num("lock.kd", REF(double, lock.config.pid.kd), "derivative gain, s"));
    f.push_back(num("lock.lowpass_cutoff_hz", REF(double, lock.config.demod.lowpass_cutoff_hz), "demodulator low-pass cutoff, Hz"));
    f.push_back(boolean("lock.auto_reference_phase", REF(bool, lock.config.auto_reference_phase), "calibrate the demodulation phase at start"));
    f.push_back(num("lock.reference_phase", REF(double, lock.config.demod.reference_phase), "demodulation phase when not calibrated, rad"));
    f.push_back(integer("lock.calibration_periods", REF(int, lock.config.calibration_periods), "dither periods used for the phase calibration"));
    f.push_back(num("lock.acquire_threshold_rad", REF(double, lock.config.acquire_threshold_rad), "phase error counted as acquired, rad"));
    f.push_back(num("lock.settle_s", REF(double, lock.config.settle_s), "time inside the threshold before acquisition is declared, s"));
    f.push_back(num("lock.acquisition_timeout_s", REF(double, lock.config.acquisition_timeout_s), "engagement without acquisition counts as failed, s"));
    f.push_back(num("lock.loss_threshold_rad", REF(double, lock.config.loss_threshold_rad), "phase error counted as out of lock, rad"));
    f.push_back(num("lock.loss_duration_s", REF(double, lock.config.loss_duration_s), "sustained excursion declared lock loss, s"));

    f.push_back(num("scan.ramp_hz", REF(double, scan.ramp_hz), "PZT triangle scan frequency, Hz"));
    f.push_back(num("scan.ramp_span_v", REF(double, scan.ramp_span_v), "scan peak-to-peak around the bias, V"));
    f.push_back(num("scan.scan_s", REF(double, scan.scan_s), "scan segment, s"));
    f.push_back(num("scan.lock_max_s", REF(double, scan.lock_max_s), "lock-to-maximum segment, s; the rest locks to minimum"));

    f.push_back(num("chop.repetition_hz", REF(double, chop.repetition_hz), "RF and feedback gate rate, Hz"));
    f.push_back(num("chop.duty", REF(double, chop.duty), "RF-on fraction"));
    f.push_back(num("chop.photon_flux", REF(double, chop.photon_flux), "photons/s per unit input for the counted isolation"));
    f.push_back(num("chop.attenuation_db", REF(double, chop.attenuation_db), "attenuator inserted for the RF-on count, dB"));
    f.push_back(num("chop.isolation_exposure_s", REF(double, chop.isolation_exposure_s), "counting time per isolation measurement, s"));

    f.push_back(num("tuner.lr_duty", REF(double, tuner.lr_duty), "locking-reference fraction of the period"));
    f.push_back(num("tuner.lr_hz", REF(double, tuner.lr_hz), "LR/Coh multiplexing rate, Hz"));
    f.push_back(num("tuner.spde_duty", REF(double, tuner.spde_duty), "SPD enable fraction, centred in the Coh window"));
    f.push_back(num("tuner.lr_intensity", REF(double, tuner.lr_intensity), "LR intensity at port b, PD units"));
    f.push_back(num("tuner.coh_photon_rate", REF(double, tuner.coh_photon_rate), "Coh photon rate at port b, photons/s"));

    f.push_back(enumeration<FitMode>("fit.mode", REF(FitMode, fit.mode),
                            {{FitMode::fixed_frequency, "fixed_frequency"}, {FitMode::free_frequency, "free_frequency"}},
                            "beat frequency known or fitted"));
    f.push_back(integer("fit.phase_grid", REF(int, fit.phase_grid), "phase starting points"));
    f.push_back(integer("fit.max_iterations", REF(int, fit.max_iterations), "per start"));
    f.push_back(num("fit.gradient_tolerance", REF(double, fit.gradient_tolerance), "convergence on the residual-Jacobian cosine"));
    return f;
}

#undef REF

const std::vector<Field> &fields() {
    static const std::vector<Field> f = make_fields();
    return f;
}

const Field &find_field(std::string_view path) {
    for (const Field &f : fields()) {
        if (f.path == path) return f;
    }
    throw ConfigError(fmt::format("unknown config key '{}'", path));
}

void collect_leaves(const YAML::Node &node, const std::string &prefix,
                    std::vector<std::pair<std::string, YAML::Node>> &out) {
    if (node.IsMap()) {
        for (const auto &kv : node) {
            const std::string key = kv.first.as<std::string>();
            collect_leaves(kv.second, prefix.empty() ? key : prefix + "." + key, out);
        }
    } else if (node.IsScalar()) {
        out.emplace_back(prefix, node);
    } else if (node.IsNull()) {
        throw ConfigError(fmt::format("'{}' has no value", prefix));
    } else {
        throw ConfigError(fmt::format("'{}' must be a scalar or a section", prefix));
    }
}

const std::map<std::string, std::string> &section_comments() {
    static const std::map<std::string, std::string> m = {
        {"simulation", "time stepping and output"},
        {"optics", "interferometer: two AOMs, visibility and lumped efficiency"},
        {"rf1", "RF drive of AOM1 (the lock dither goes here)"},
        {"rf2", "RF drive of AOM2"},
        {"drift", "interferometer phase drift"},
        {"pzt", "mirror actuator"},
        {"pd", "photodiode"},
        {"spd", "single-photon detector"},
        {"lock", "dither lock and PID"},
        {"scan", "scan_and_lock only"},
        {"chop", "chopped_switch only"},
        {"tuner", "frequency_tuner only"},
        {"fit", "fringe fitter"},
    };
    return m;
}

std::vector<std::string> split_path(const std::string &p) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t dot; (dot = p.find('.', start)) != std::string::npos; start = dot + 1) {
        parts.push_back(p.substr(start, dot - start));
    }
    parts.push_back(p.substr(start));
    return parts;
}

}  // namespace

ScenarioConfig parse_config(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config must be a YAML mapping");
    if (!root["scenario"]) throw ConfigError("config lacks the 'scenario' key");
    const std::string kind_name = scalar_as<std::string>(root["scenario"], "scenario");
    const auto kind = parse_scenario_kind(kind_name);
    if (!kind) throw ConfigError(fmt::format("unknown scenario '{}'", kind_name));

    ScenarioConfig cfg = default_config(*kind);
    std::vector<std::pair<std::string, YAML::Node>> leaves;
    collect_leaves(root, "", leaves);
    for (const auto &[path, node] : leaves) find_field(path).read(cfg, node);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ScenarioConfig cfg;
    try {
        cfg = parse_config(ss.str());
    } catch (const ConfigError &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    apply_env_overrides(cfg, process_env_overrides());
    return cfg;
}

std::string emit_config(const ScenarioConfig &cfg, bool with_comments) {
    std::string out;
    if (with_comments) {
        out += fmt::format("# abisim scenario configuration, {} defaults.\n", scenario_name(cfg.kind));
        out += fmt::format("# Override any key from the environment: {}SECTION__KEY=value.\n", kEnvPrefix);
    }
    std::vector<std::string> open;
    for (const Field &f : fields()) {
        const auto parts = split_path(f.path);
        std::size_t common = 0;
        while (common < open.size() && common + 1 < parts.size() && open[common] == parts[common]) ++common;
        open.resize(common);
        for (std::size_t d = common; d + 1 < parts.size(); ++d) {
            const std::string indent(2 * d, ' ');
            if (d == 0) out += '\n';
            out += indent + parts[d] + ":";
            if (with_comments && d == 0) {
                const auto it = section_comments().find(parts[d]);
                if (it != section_comments().end()) out += "  # " + it->second;
            }
            out += '\n';
            open.push_back(parts[d]);
        }
        out += std::string(2 * (parts.size() - 1), ' ') + parts.back() + ": " + f.write(cfg);
        if (with_comments) out += "  # " + f.comment;
        out += '\n';
    }
    if (!with_comments && !out.empty() && out.front() == '\n') out.erase(0, 1);
    return out;
}

std::vector<std::string> config_paths() {
    std::vector<std::string> p;
    for (const Field &f : fields()) p.push_back(f.path);
    return p;
}

void set_config_value(ScenarioConfig &cfg, std::string_view path, std::string_view value) {
    const Field &f = find_field(path);
    YAML::Node n;
    try {
        n = YAML::Load(std::string(value));
    } catch (const YAML::Exception &) {
        throw ConfigError(fmt::format("'{}': cannot parse '{}'", path, value));
    }
    f.read(cfg, n);
}

double get_config_number(const ScenarioConfig &cfg, std::string_view path) {
    return find_field(path).number(cfg);
}

std::vector<std::string> apply_env_overrides(ScenarioConfig &cfg,
                                             const std::map<std::string, std::string> &env) {
    const std::string prefix = kEnvPrefix;
    std::vector<std::string> applied;
    for (const auto &[name, value] : env) {
        if (!name.starts_with(prefix)) continue;
        std::string path = name.substr(prefix.size());
        std::transform(path.begin(), path.end(), path.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        for (std::size_t pos; (pos = path.find("__")) != std::string::npos;) path.replace(pos, 2, ".");
        try {
            set_config_value(cfg, path, value);
        } catch (const ConfigError &e) {
            throw ConfigError(fmt::format("environment {}: {}", name, e.what()));
        }
        applied.push_back(path);
    }
    return applied;
}

std::map<std::string, std::string> process_env_overrides() {
    std::map<std::string, std::string> env;
    for (char **e = environ; e && *e; ++e) {
        const std::string_view kv(*e);
        if (!kv.starts_with(kEnvPrefix)) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    return env;
}

}  // namespace abisim
