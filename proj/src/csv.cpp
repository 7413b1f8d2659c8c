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

#include "abisim/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

double parse_number(std::string_view field, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ConfigError(fmt::format("CSV line {}: '{}' is not a number", line, field));
    }
    return v;
}

}  // namespace

void write_trace_csv(std::ostream &os, const TimeSeries &series) {
    os << kTraceHeader << '\n';
    for (std::size_t k = 0; k < series.size(); ++k) {
        os << fmt::format("{},{}\n", series.time(k), series.samples[k]);
    }
}

void write_counts_csv(std::ostream &os, const CountSeries &series) {
    os << kCountsHeader << '\n';
    for (std::size_t k = 0; k < series.size(); ++k) {
        os << k << ',' << series.counts[k] << '\n';
    }
}

CsvData parse_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    CsvData data;
    if (line == kTraceHeader) {
        data.kind = CsvKind::trace;
    } else if (line == kCountsHeader) {
        data.kind = CsvKind::counts;
    } else {
        throw ConfigError(fmt::format("CSV header '{}' matches neither '{}' nor '{}'", line,
                                      kTraceHeader, kCountsHeader));
    }
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ConfigError(fmt::format("CSV line {}: expected two columns", lineno));
        }
        const std::string_view sv(line);
        data.x.push_back(parse_number(sv.substr(0, comma), lineno));
        data.y.push_back(parse_number(sv.substr(comma + 1), lineno));
    }
    if (data.x.empty()) throw ConfigError("CSV has a header but no rows");
    return data;
}

CsvData read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_csv(in);
}

}  // namespace abisim
