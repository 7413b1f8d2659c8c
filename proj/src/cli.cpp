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

#include "abisim/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "abisim/config.hpp"
#include "abisim/csv.hpp"
#include "abisim/errors.hpp"
#include "abisim/fit.hpp"
#include "abisim/scenario.hpp"

namespace abisim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    bool force = false;
    bool verbose = false;
    unsigned jobs = 0;

    // fit
    std::string csv;
    std::optional<double> i_in;
    std::optional<double> delta_omega;
    std::optional<double> window_s;
    double offset = 0.0;
    bool free_frequency = false;
    std::string from_summary;

    // sweep
    std::string param;
    std::string values;
    std::string range;
    std::string seeds;

    // init-config
    std::string scenario;
    std::string file;
};

class Log {
   public:
    Log(std::ostream &err, bool verbose) : err_(err), verbose_(verbose) {}

    void info(const std::string &msg) const {
        if (verbose_) err_ << "abisim: " << msg << '\n';
    }
    void error(const std::string &msg) const { err_ << "abisim: error: " << msg << '\n'; }
    std::ostream &stream() const { return err_; }

   private:
    std::ostream &err_;
    bool verbose_;
};

ScenarioConfig load_checked(const Options &o, const Log &log) {
    if (o.config.empty()) throw ConfigError("--config is required");
    ScenarioConfig cfg = load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    log.info(fmt::format("loaded {} ({} scenario, seed {})", o.config, scenario_name(cfg.kind), cfg.seed));
    return cfg;
}

int cmd_run(const Options &o, std::ostream &out, const Log &log) {
    const ScenarioConfig cfg = load_checked(o, log);
    const fs::path dir(o.out);
    if (!o.force) {
        for (const char *name : {"trace.csv", "counts.csv", "summary.json"}) {
            if (fs::exists(dir / name)) {
                throw IoError((dir / name).string() + " exists; pass --force to overwrite");
            }
        }
    }
    const ScenarioResult r = run_scenario(cfg);
    write_artifacts(r, dir, o.force);
    log.info("wrote artifacts to " + dir.string());
    log.stream() << summary_text(r);
    out << r.summary.dump(2) << '\n';
    return r.failed ? kExitScenario : kExitOk;
}

int cmd_validate(const Options &o, std::ostream &out, const Log &log) {
    const ScenarioConfig cfg = load_checked(o, log);
    out << json{{"valid", true}, {"scenario", scenario_name(cfg.kind)}, {"seed", cfg.seed}}.dump() << '\n';
    return kExitOk;
}

int cmd_init_config(const Options &o, std::ostream &out, const Log &log) {
    const auto kind = parse_scenario_kind(o.scenario);
    if (!kind) throw ConfigError(fmt::format("unknown scenario '{}'", o.scenario));
    const std::string text = emit_config(default_config(*kind), true);
    if (o.file.empty()) {
        out << text;
        return kExitOk;
    }
    if (!o.force && fs::exists(o.file)) throw IoError(o.file + " exists; pass --force to overwrite");
    std::ofstream f(o.file, std::ios::trunc);
    if (!f || !(f << text)) throw IoError("cannot write " + o.file);
    log.info("wrote " + o.file);
    return kExitOk;
}

int cmd_fit(const Options &o, std::ostream &out, const Log &log) {
    double i_in = 0.0, dw = 0.0, window = 0.0, offset = o.offset;
    bool free_freq = o.free_frequency;
    bool have_i = false, have_dw = false, have_window = false;
    if (!o.from_summary.empty()) {
        std::ifstream in(o.from_summary);
        if (!in) throw ConfigError("cannot read " + o.from_summary);
        json s;
        try {
            s = json::parse(in);
        } catch (const json::exception &e) {
            throw ConfigError(o.from_summary + ": " + e.what());
        }
        if (!s.contains("fit_inputs")) throw ConfigError(o.from_summary + " has no fit_inputs");
        const json &fi = s["fit_inputs"];
        i_in = fi.at("i_in").get<double>();
        dw = fi.at("delta_omega").get<double>();
        window = fi.at("window_s").get<double>();
        offset = fi.at("offset").get<double>();
        free_freq = fi.at("mode").get<std::string>() == "free_frequency";
        have_i = have_dw = have_window = true;
    }
    if (o.i_in) i_in = *o.i_in, have_i = true;
    if (o.delta_omega) dw = *o.delta_omega, have_dw = true;
    if (o.window_s) window = *o.window_s, have_window = true;
    if (!have_i || !have_dw) throw ConfigError("fit needs --i-in and --delta-omega (or --from-summary)");

    const CsvData data = read_csv(o.csv);
    FitOptions opts;
    opts.mode = free_freq ? FitMode::free_frequency : FitMode::fixed_frequency;
    opts.offset = offset;
    std::vector<double> t = data.x;
    if (data.kind == CsvKind::counts) {
        if (!have_window || !(window > 0.0)) throw ConfigError("counts CSV needs --window (seconds)");
        for (double &x : t) x *= window;
        opts.window_s = window;
        opts.poisson_weights = true;
    } else if (have_window) {
        opts.window_s = window;
    }
    log.info(fmt::format("fitting {} rows from {}", data.x.size(), o.csv));
    try {
        const FitResult f = fit_fringe(t, data.y, i_in, dw, opts);
        out << fit_to_json(f).dump(2) << '\n';
        return kExitOk;
    } catch (const FitError &e) {
        const char *kind = e.kind() == FitError::Kind::IllConditioned ? "IllConditioned" : "NonConvergence";
        log.error(fmt::format("{}: {}", kind, e.what()));
        out << json{{"error", e.what()}, {"kind", kind}}.dump(2) << '\n';
        return kExitScenario;
    }
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::vector<std::string> sweep_values(const Options &o) {
    if (!o.values.empty() == !o.range.empty()) throw ConfigError("sweep needs exactly one of --values or --range");
    if (!o.values.empty()) return split(o.values, ',');
    const auto p = split(o.range, ':');
    if (p.size() != 3) throw ConfigError("--range must be start:stop:count");
    double a = 0.0, b = 0.0;
    long n = 0;
    try {
        a = std::stod(p[0]);
        b = std::stod(p[1]);
        n = std::stol(p[2]);
    } catch (const std::exception &) {
        throw ConfigError("--range must be start:stop:count");
    }
    if (n < 1) throw ConfigError("--range count must be >= 1");
    std::vector<std::string> v;
    for (long k = 0; k < n; ++k) {
        const double x = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
        v.push_back(fmt::format("{}", x));
    }
    return v;
}

struct SweepRow {
    std::string value;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::pair<std::string, double>> headline;
};

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

int cmd_sweep(const Options &o, std::ostream &out, const Log &log) {
    const ScenarioConfig base = load_checked(o, log);
    if (o.param.empty()) throw ConfigError("sweep needs --param");
    (void)get_config_number(base, o.param);  // unknown path → ConfigError
    const auto values = sweep_values(o);
    std::vector<std::uint64_t> seeds;
    if (o.seeds.empty()) {
        seeds.push_back(base.seed);
    } else {
        for (const auto &s : split(o.seeds, ',')) {
            try {
                seeds.push_back(std::stoull(s));
            } catch (const std::exception &) {
                throw ConfigError("--seeds must be a comma-separated list of integers");
            }
        }
    }
    // Every point must at least parse before anything runs.
    std::vector<ScenarioConfig> points;
    std::vector<SweepRow> rows;
    for (const auto &v : values) {
        for (std::uint64_t s : seeds) {
            ScenarioConfig c = base;
            set_config_value(c, o.param, v);
            c.seed = s;
            points.push_back(c);
            rows.push_back({v, s, false, {}, {}});
        }
    }

    const fs::path dir(o.out);
    const fs::path path = dir / "sweep.csv";
    if (!o.force && fs::exists(path)) throw IoError(path.string() + " exists; pass --force to overwrite");

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned jobs = std::min<unsigned>(o.jobs ? o.jobs : hw, static_cast<unsigned>(points.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
            try {
                const ScenarioResult r = run_scenario(points[i]);
                rows[i].ok = !r.failed;
                rows[i].error = r.failure;
                rows[i].headline = r.headline;
            } catch (const std::exception &e) {
                rows[i].error = e.what();
            }
        }
    };
    log.info(fmt::format("sweeping {} over {} points with {} jobs", o.param, points.size(), jobs));
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto &t : pool) t.join();

    std::vector<std::string> metrics;
    for (const auto &r : rows) {
        for (const auto &[k, v] : r.headline) {
            if (std::find(metrics.begin(), metrics.end(), k) == metrics.end()) metrics.push_back(k);
        }
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << csv_field(o.param) << ",seed,status";
    for (const auto &m : metrics) f << ',' << m;
    f << ",error\n";
    std::size_t failed = 0;
    for (const auto &r : rows) {
        failed += !r.ok;
        f << csv_field(r.value) << ',' << r.seed << ',' << (r.ok ? "ok" : "failed");
        for (const auto &m : metrics) {
            const auto it = std::find_if(r.headline.begin(), r.headline.end(), [&](const auto &kv) { return kv.first == m; });
            f << ',' << (it == r.headline.end() ? std::string() : fmt::format("{}", it->second));
        }
        f << ',' << csv_field(r.error) << '\n';
    }
    if (!f.flush()) throw IoError("write failed: " + path.string());
    out << json{{"points", rows.size()}, {"failed", failed}, {"path", path.string()}}.dump() << '\n';
    return failed ? kExitScenario : kExitOk;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    Options o;
    CLI::App app{"abisim: bi-frequency interferometer simulator"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", o.verbose, "log progress to stderr");

    auto *run = app.add_subcommand("run", "run a scenario and write trace.csv, counts.csv, summary.json");
    run->add_option("-c,--config", o.config, "scenario config (YAML)")->required();
    run->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    run->add_option("--seed", o.seed, "override the master seed");
    run->add_flag("-f,--force", o.force, "overwrite existing artifacts");
    run->add_flag("-v,--verbose", o.verbose, "log progress to stderr");

    auto *fit = app.add_subcommand("fit", "fit the fringe model to a trace.csv or counts.csv");
    fit->add_option("csv", o.csv, "CSV file")->required();
    fit->add_option("--i-in", o.i_in, "input intensity in sample units (counts per window for counts)");
    fit->add_option("--delta-omega", o.delta_omega, "beat angular frequency, rad/s");
    fit->add_option("--window", o.window_s, "counting window, s (counts CSV)");
    fit->add_option("--offset", o.offset, "known background per sample");
    fit->add_flag("--free-frequency", o.free_frequency, "fit the beat frequency as well");
    fit->add_option("--from-summary", o.from_summary, "take fit inputs from a run's summary.json");
    fit->add_flag("-v,--verbose", o.verbose, "log progress to stderr");

    auto *sweep = app.add_subcommand("sweep", "run a scenario over a grid of one config value");
    sweep->add_option("-c,--config", o.config, "scenario config (YAML)")->required();
    sweep->add_option("-p,--param", o.param, "dotted config path, e.g. chop.duty")->required();
    sweep->add_option("--values", o.values, "comma-separated values");
    sweep->add_option("--range", o.range, "start:stop:count, inclusive");
    sweep->add_option("--seeds", o.seeds, "comma-separated seeds; one row per value and seed");
    sweep->add_option("-o,--out", o.out, "output directory for sweep.csv")->capture_default_str();
    sweep->add_option("-j,--jobs", o.jobs, "parallel points (default: hardware threads)");
    sweep->add_option("--seed", o.seed, "override the master seed");
    sweep->add_flag("-f,--force", o.force, "overwrite sweep.csv");
    sweep->add_flag("-v,--verbose", o.verbose, "log progress to stderr");

    auto *init = app.add_subcommand("init-config", "print a commented default config");
    init->add_option("scenario", o.scenario, "beating_pd | beating_spd | scan_and_lock | chopped_switch | frequency_tuner")->required();
    init->add_option("-o,--out", o.file, "write to this file instead of stdout");
    init->add_flag("-f,--force", o.force, "overwrite the file");

    auto *val = app.add_subcommand("validate", "check a config without running it");
    val->add_option("-c,--config", o.config, "scenario config (YAML)")->required();
    val->add_option("--seed", o.seed, "override the master seed");
    val->add_flag("-v,--verbose", o.verbose, "log progress to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const Log log(err, o.verbose);
    try {
        if (*run) return cmd_run(o, out, log);
        if (*fit) return cmd_fit(o, out, log);
        if (*sweep) return cmd_sweep(o, out, log);
        if (*init) return cmd_init_config(o, out, log);
        if (*val) return cmd_validate(o, out, log);
    } catch (const ConfigError &e) {
        log.error(e.what());
        return kExitConfig;
    } catch (const IoError &e) {
        log.error(e.what());
        return kExitIo;
    } catch (const FitError &e) {
        log.error(e.what());
        return kExitScenario;
    } catch (const fs::filesystem_error &e) {
        log.error(e.what());
        return kExitIo;
    }
    return kExitConfig;
}

}  // namespace abisim
