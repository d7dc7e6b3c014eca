// Copyright 2026 The opshadow Authors
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

#ifndef OPSHADOW_RNG_H
#define OPSHADOW_RNG_H

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace opshadow {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream labels. Every random draw in the library is keyed by
/// (master seed, label, indices...), so any record can be regenerated alone.
enum class StreamTag : std::uint64_t {
    kCircuitChoice = 0x43495243ULL,
    kSettings = 0x53455454ULL,
    kShot = 0x53484f54ULL,
    kCalibration = 0x43414c49ULL,
    kBootstrap = 0x424f4f54ULL,
    kTest = 0x54455354ULL,
};

/// Counter-based generator: the i-th output is mix64(key + i * golden), so the
/// stream is random-access and child streams are derived by hashing labels
/// into the key rather than by sharing state.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(key) {}

    /// Key derived from a master seed and a path of labels.
    static CounterRng stream(std::uint64_t master, StreamTag tag, std::initializer_list<std::uint64_t> path = {});

    CounterRng split(std::uint64_t label) const;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, n), unbiased. n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Box-Muller, no cached second value).
    double normal();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace opshadow

#endif
