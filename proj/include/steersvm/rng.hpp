// Copyright 2026 The steersvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace steersvm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for (stream, index) under a parent seed. Streams keep unrelated
// consumers (measurement draws, state draws, fold shuffles) from overlapping.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
    return mix_seed(mix_seed(mix_seed(parent) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

// Stream tags.
namespace streams {
inline constexpr std::uint64_t kStateDraw = 0x5354415445ULL;
inline constexpr std::uint64_t kMeasurement = 0x4d45415355ULL;
inline constexpr std::uint64_t kFolds = 0x464f4c4453ULL;
inline constexpr std::uint64_t kCandidates = 0x43414e44ULL;
inline constexpr std::uint64_t kLabeledSet = 0x4c41424cULL;
inline constexpr std::uint64_t kUnlabeledSet = 0x554e4c42ULL;
inline constexpr std::uint64_t kExperiment = 0x45585052ULL;
}  // namespace streams

}  // namespace steersvm
