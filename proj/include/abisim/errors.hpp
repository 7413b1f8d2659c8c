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

#include <stdexcept>
#include <string>

namespace abisim {

/// Invalid or inconsistent configuration (bad ranges, missing sub-configs).
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Failure of the fringe fitter. `kind()` distinguishes the two failure modes.
class FitError : public std::runtime_error {
   public:
    enum class Kind { NonConvergence, IllConditioned };

    FitError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

   private:
    Kind kind_;
};

/// Filesystem / CSV problems.
class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace abisim
