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

#include <cstdint>
#include <random>

namespace abisim {

using Rng = std::mt19937_64;

/// Independent seed for a named sub-stream of a master seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream ids, one per stochastic element of a simulation.
namespace streams {
inline constexpr std::uint64_t drift = 1;
inline constexpr std::uint64_t pd1 = 2;
inline constexpr std::uint64_t pd2 = 3;
inline constexpr std::uint64_t spd = 4;
inline constexpr std::uint64_t isolation = 5;
}  // namespace streams

}  // namespace abisim
