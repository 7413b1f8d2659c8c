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

#include <iosfwd>

namespace abisim {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,    // config, schema or usage error
    kExitScenario = 2,  // lock failure, fit non-convergence
    kExitIo = 3,
};

/// Entry point of the `abisim` tool. Machine-readable output goes to `out`,
/// logs and tables to `err`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace abisim
