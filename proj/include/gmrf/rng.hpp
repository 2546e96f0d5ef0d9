/*
 * Copyright (c) 2026, the gmrflogdet authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

namespace gmrf {

/// Stateless counter-based randomness: every draw is a pure function of
/// (seed, stream, index), so parallel consumers see identical values no
/// matter how work is scheduled.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(seed ^ (0xD6E8FEB86659FD93ull * (stream + 1))) + index);
}

/// +1 or -1 with equal probability.
inline double rademacher(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return (mix_seed(seed, stream, index) & 1ull) ? 1.0 : -1.0;
}

/// Uniform in (-1, 1), used for deterministic start vectors.
inline double uniform_pm1(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t bits = mix_seed(seed, stream, index) >> 11;  // 53 bits
    return 2.0 * (static_cast<double>(bits) * 0x1.0p-53) - 1.0;
}

}  // namespace gmrf
