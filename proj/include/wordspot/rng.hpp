/* Copyright (c) 2026 The wordspot Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace wordspot {

using Rng = std::mt19937_64;

// Independent streams derived from one master seed. Each subsystem draws from
// its own stream so that, e.g., enabling augmentation does not shift the
// dropout masks.
enum class RngStream : std::uint32_t {
  kInit = 1,
  kDropout = 2,
  kAugment = 3,
  kBatching = 4,
  kPermutation = 5,
  kSynth = 6,
  kFolds = 7,
};

inline Rng make_rng(std::uint64_t master_seed, RngStream stream,
                    std::uint64_t worker = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(worker & 0xffffffffu),
                    static_cast<std::uint32_t>(worker >> 32)};
  return Rng(seq);
}

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

}  // namespace wordspot
