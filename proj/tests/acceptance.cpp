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

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// criterion fails.

#include <fmt/format.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "abisim/isolation.hpp"
#include "abisim/optics.hpp"
#include "abisim/scenario.hpp"

using namespace abisim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOmega = 2.0 * kPi * 80e6;

struct Outcome {
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;
    std::function<Outcome()> check;
};

AbiConfig abi(double r1, double r2, double th1, double th2, double path, double v = 1.0, double eta = 1.0) {
    AbiConfig c;
    c.aom1 = AomConfig::with_efficiency(r1 * r1, kOmega, th1);
    c.aom2 = AomConfig::with_efficiency(r2 * r2, kOmega, th2);
    c.path_phase = path;
    c.visibility = v;
    c.efficiency = eta;
    return c;
}

double e_out(const AbiConfig &c) {
    return abi_transfer({Port::a, {1, kOmega}, 0.0}, {Port::b, {0, kOmega}, 1.0}, c).e_intensity();
}

Outcome unitarity() {
    std::mt19937_64 g(20260101);
    std::uniform_real_distribution<double> u(0.0, 1.0), ang(-10.0, 10.0);
    double worst = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const EffectiveCoeffs k = effective_coeffs(abi(u(g), u(g), ang(g), ang(g), ang(g)));
        worst = std::max({worst, std::abs(std::norm(k.t1p) + std::norm(k.r1p) - 1.0),
                          std::abs(std::norm(k.t2p) + std::norm(k.r2p) - 1.0)});
    }
    return {worst <= 1e-12, fmt::format("max | |t'|^2+|r'|^2 - 1 | = {:.2e} over {} draws (tol 1e-12)", worst, n)};
}

Outcome degeneration() {
    const double h = std::sqrt(0.5);
    double worst_deg = 0.0, worst_phase = 0.0;
    int points = 0;
    for (double phi = -2 * kPi; phi <= 2 * kPi; phi += 0.01) {
        // With eta = V = 1 and no beat the model reduces to the ideal form, both in closed
        // form and through field propagation.
        worst_deg = std::max(worst_deg, std::abs(observed_intensity(1.0, 1.0, 0.0, 0.0, phi, 1.0) - ideal_intensity(phi, 1.0)));
        worst_deg = std::max(worst_deg, std::abs(e_out(abi(h, h, 0.0, 0.0, phi)) - ideal_intensity(phi, 1.0)));
        const double ref = e_out(abi(h, h, 0.0, 0.0, phi, 0.9, 0.8));
        for (double th1 : {-2.0, 0.3, 1.7}) {
            for (double th2 : {-0.9, 0.0, 2.4}) {
                const AbiConfig c = abi(h, h, th1, th2, phi + th1 - th2, 0.9, 0.8);
                worst_phase = std::max(worst_phase, std::abs(e_out(c) - ref));
                ++points;
            }
        }
    }
    return {worst_deg <= 1e-12 && worst_phase <= 1e-12,
            fmt::format("ideal-limit max dev {:.2e}, overall-phase max dev {:.2e} over {} configs (tol 1e-12)",
                        worst_deg, worst_phase, points)};
}

Outcome beating_calibration() {
    const ScenarioResult r = run_scenario(default_config(ScenarioKind::beating_pd));
    if (r.failed) return {false, r.failure};
    const auto &f = r.summary["fit"];
    const double v = f["v_hat"], eta = f["eta_hat"], phi = f["phi_hat"];
    const bool ok = std::abs(v - 0.995) <= 0.002 && std::abs(eta - 0.95) <= 0.01 && std::abs(phi - 1.08) <= 0.01;
    return {ok, fmt::format("V={:.5f} (0.995+-0.002) eta={:.5f} (0.95+-0.01) phi={:.5f} (1.08+-0.01), beat {} Hz",
                            v, eta, phi, r.summary["headline"]["beat_hz"].get<double>())};
}

Outcome single_photon_beating() {
    double worst_v = 0.0, worst_dark = 0.0;
    std::string vs;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ScenarioConfig c = default_config(ScenarioKind::beating_spd);
        c.seed = seed;
        const ScenarioResult r = run_scenario(c);
        if (r.failed) return {false, r.failure};
        const double v = r.summary["fit"]["v_hat"];
        const double dark = std::abs(r.summary["counts"]["dark_count_v_bias"].get<double>());
        worst_v = std::max(worst_v, std::abs(v - 0.992));
        worst_dark = std::max(worst_dark, dark);
        ok = ok && std::abs(v - 0.992) <= 0.003 && dark < 0.001;
    }
    return {ok, fmt::format("10 replicas: max |V-0.992| = {:.5f} (tol 0.003), max dark-count V shift = {:.2e} (tol 1e-3)",
                            worst_v, worst_dark)};
}

Outcome lock_acquisition() {
    ScenarioConfig c = default_config(ScenarioKind::chopped_switch);
    c.duration_s = 10.0;
    const ScenarioResult r = run_scenario(c);
    const auto &l = r.summary["lock"];
    const double acq = l["acquisition_time_s"], rms = l["residual_phase_rms_rad"];
    const int eng = l["engagements"], failed = l["failed_engagements"];
    const bool ok = !r.failed && failed == 0 && acq < 1e-3 && rms < 0.05;
    return {ok, fmt::format("100 Hz/30%, 10 s: {} engagements, {} failed, worst acquisition {:.1f} us (< 1000), "
                            "residual RMS {:.4f} rad (< 0.05), status {}",
                            eng, failed, acq * 1e6, rms, l["status"].get<std::string>())};
}

Outcome isolation() {
    const AbiConfig c = default_config(ScenarioKind::chopped_switch).abi_config();
    const double dd = *double_diffraction_isolation(c).isolation_db;
    const double dp = *direct_pass_isolation(0.95, 0.937).isolation_db;
    const bool ok = std::abs(dd - 74.0) <= 0.1 && std::abs(dp - 15.2) <= 0.1;
    return {ok, fmt::format("-37 dB x2 -> {:.3f} dB (74+-0.1); direct pass V=0.937 eta=0.95 -> {:.3f} dB (15.2+-0.1)", dd, dp)};
}

Outcome stability_monotonicity() {
    const std::vector<double> duties{0.3, 0.5, 0.7, 0.9, 1.0};
    bool ok = true;
    std::string rows;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::vector<double> rms;
        for (double d : duties) {
            ScenarioConfig c = default_config(ScenarioKind::chopped_switch);
            c.duration_s = 2.0;
            c.chop.duty = d;
            c.seed = seed;
            const ScenarioResult r = run_scenario(c);
            ok = ok && !r.failed;
            rms.push_back(r.summary["lock"]["residual_phase_rms_rad"]);
        }
        for (std::size_t i = 1; i < rms.size(); ++i) ok = ok && rms[i] <= rms[i - 1];
        rows += fmt::format(" seed{}:[{:.4f}]", seed, fmt::join(rms, ","));
    }
    return {ok, "duty 0.3,0.5,0.7,0.9,1.0, residual RMS non-increasing per seed;" + rows};
}

std::string artifacts_bytes(const ScenarioResult &r, const fs::path &dir) {
    write_artifacts(r, dir, true);
    std::string all;
    for (const char *name : {"trace.csv", "counts.csv", "summary.json"}) {
        std::ifstream in(dir / name, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        all += std::string(name) + "\n" + ss.str();
    }
    return all;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("abisim_acceptance_" + std::to_string(::getpid()));
    bool ok = true;
    std::size_t bytes = 0;
    for (ScenarioKind k : all_scenario_kinds()) {
        ScenarioConfig c = default_config(k);
        c.seed = 20260415;
        const std::string a = artifacts_bytes(run_scenario(c), root / "a" / scenario_name(k));
        const std::string b = artifacts_bytes(run_scenario(c), root / "b" / scenario_name(k));
        ok = ok && a == b;
        bytes += a.size();
    }
    fs::remove_all(root);
    return {ok, fmt::format("5 scenarios run twice, {} artifact bytes compared", bytes)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "unitarity", 5.0, unitarity},
        {2, "degeneration to the ideal interferometer and overall-phase equivalence", 1e9, degeneration},
        {3, "beating calibration regeneration", 10.0, beating_calibration},
        {4, "single-photon beating", 30.0, single_photon_beating},
        {5, "lock acquisition in chopped mode", 60.0, lock_acquisition},
        {6, "isolation arithmetic", 1.0, isolation},
        {7, "stability monotonicity in duty cycle", 1e9, stability_monotonicity},
        {8, "determinism", 1e9, determinism},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = dt < c.time_limit_s;
        const bool pass = o.ok && in_time;
        failed += !pass;
        const std::string limit = c.time_limit_s < 1e8 ? fmt::format(" (limit {} s)", c.time_limit_s) : "";
        fmt::print("[{}] {}. {}: {}; runtime {:.2f} s{}\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, dt,
                   in_time ? limit : limit + " EXCEEDED");
        std::fflush(stdout);
    }
    fmt::print("{} of {} acceptance criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
