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

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "abisim/detectors.hpp"

namespace abisim {

inline constexpr const char *kTraceHeader = "time_s,value";
inline constexpr const char *kCountsHeader = "window_index,counts";

/// Values are written in shortest round-trip form, so reading a file back
/// reproduces every double exactly.
void write_trace_csv(std::ostream &os, const TimeSeries &series);
void write_counts_csv(std::ostream &os, const CountSeries &series);

enum class CsvKind { trace, counts };

struct CsvData {
    CsvKind kind = CsvKind::trace;
    std::vector<double> x;  // time_s, or window index
    std::vector<double> y;
};

/// Reads either schema, chosen by the header. Throws IoError when the file
/// cannot be read and ConfigError on a schema mismatch or an empty table.
CsvData read_csv(const std::filesystem::path &path);
CsvData parse_csv(std::istream &is);

}  // namespace abisim
