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

#include <algorithm>

#include "abisim/config.hpp"
#include "abisim/errors.hpp"

using namespace abisim;

TEST_CASE("commented defaults parse back to the same config") {
    for (ScenarioKind k : all_scenario_kinds()) {
        CAPTURE(scenario_name(k));
        const ScenarioConfig d = default_config(k);
        const std::string text = emit_config(d, true);
        const ScenarioConfig back = parse_config(text);
        CHECK(emit_config(back) == emit_config(d));
        CHECK_NOTHROW(back.validate());
    }
}

TEST_CASE("doubles survive the round trip bit for bit") {
    ScenarioConfig c = default_config(ScenarioKind::chopped_switch);
    c.chop.duty = 0.1 + 0.2;
    c.optics.path_phase = 1.0 / 3.0;
    c.diffusion = 9.869604401089358;
    c.seed = 18446744073709551615ULL;
    c.lock.config.acquire_threshold_rad = 4.9406564584124654e-324;
    const ScenarioConfig back = parse_config(emit_config(c));
    CHECK(back.chop.duty == c.chop.duty);
    CHECK(back.optics.path_phase == c.optics.path_phase);
    CHECK(back.diffusion == c.diffusion);
    CHECK(back.seed == c.seed);
    CHECK(back.lock.config.acquire_threshold_rad == c.lock.config.acquire_threshold_rad);
}

TEST_CASE("missing keys keep the defaults of the scenario kind") {
    const ScenarioConfig c = parse_config("scenario: frequency_tuner\nchop:\n  duty: 0.5\n");
    CHECK(c.kind == ScenarioKind::frequency_tuner);
    CHECK(c.chop.duty == 0.5);
    CHECK(c.spd.model.window_s == default_config(ScenarioKind::frequency_tuner).spd.model.window_s);
    CHECK(c.lock.config.detector_port == Port::f);
}

TEST_CASE("malformed configs are rejected with the key in the message") {
    auto message = [](const char *text) {
        try {
            parse_config(text);
        } catch (const ConfigError &e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("scenario: beating_pd\noptics:\n  visibilty: 0.9\n").find("optics.visibilty") != std::string::npos);
    CHECK(message("scenario: beating_pd\nduration_s: fast\n").find("duration_s") != std::string::npos);
    CHECK(message("scenario: warp_drive\n").find("warp_drive") != std::string::npos);
    CHECK(message("duration_s: 1.0\n").find("scenario") != std::string::npos);
    CHECK_FALSE(message("scenario: beating_pd\nseed: -3\n").empty());
    CHECK_FALSE(message("scenario: beating_pd\nlock:\n  actuator: magnet\n").empty());
    CHECK_FALSE(message("[1, 2]").empty());
    CHECK_FALSE(message("scenario: beating_pd\noptics: [1]\n").empty());
    CHECK_FALSE(message("scenario: [").empty());
}

TEST_CASE("environment overrides use the prefix and double underscores") {
    ScenarioConfig c = default_config(ScenarioKind::chopped_switch);
    const auto applied = apply_env_overrides(c, {{"ABISIM_CHOP__DUTY", "0.5"},
                                                  {"ABISIM_LOCK__ACTUATOR", "rf2"},
                                                  {"ABISIM_SEED", "42"},
                                                  {"PATH", "/usr/bin"}});
    CHECK(applied.size() == 3);
    CHECK(c.chop.duty == 0.5);
    CHECK(c.lock.actuator == ActuatorMode::rf2);
    CHECK(c.seed == 42);
    CHECK_THROWS_AS(apply_env_overrides(c, {{"ABISIM_CHOP__DUTYY", "0.5"}}), ConfigError);
    CHECK_THROWS_AS(apply_env_overrides(c, {{"ABISIM_CHOP__DUTY", "half"}}), ConfigError);
}

TEST_CASE("set and get by dotted path") {
    ScenarioConfig c = default_config(ScenarioKind::beating_spd);
    set_config_value(c, "optics.aom2.off_leakage_db", "-40");
    CHECK(c.optics.aom2.off_leakage_db == -40.0);
    set_config_value(c, "fit.mode", "free_frequency");
    CHECK(c.fit.mode == FitMode::free_frequency);
    CHECK(get_config_number(c, "fit.mode") == 1.0);
    CHECK(get_config_number(c, "spd.peak_counts_per_trigger") == 0.06);
    CHECK_THROWS_AS(set_config_value(c, "optics", "1"), ConfigError);
    CHECK_THROWS_AS(get_config_number(c, "nope"), ConfigError);
    const auto paths = config_paths();
    CHECK(std::find(paths.begin(), paths.end(), "chop.duty") != paths.end());
}
