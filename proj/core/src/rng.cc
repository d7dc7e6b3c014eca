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

#include "opshadow/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace opshadow {

namespace {

std::uint64_t absorb(std::uint64_t key, std::uint64_t label) {
    return mix64(key ^ mix64(label + 0x632BE59BD9B4E019ULL));
}

}  // namespace

CounterRng CounterRng::stream(std::uint64_t master, StreamTag tag, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = absorb(mix64(master), static_cast<std::uint64_t>(tag));
    for (std::uint64_t label : path) {
        key = absorb(key, label);
    }
    return CounterRng(key);
}

CounterRng CounterRng::split(std::uint64_t label) const {
    return CounterRng(absorb(key_, label));
}

std::uint64_t CounterRng::uniform_int(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_int needs a positive bound");
    }
    // Lemire's multiply-and-reject.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>((*this)()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
    double u1 = 0;
    while (u1 <= 0) {
        u1 = uniform();
    }
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace opshadow
