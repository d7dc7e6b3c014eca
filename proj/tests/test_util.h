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

#ifndef OPSHADOW_TESTS_TEST_UTIL_H
#define OPSHADOW_TESTS_TEST_UTIL_H

#include <cmath>
#include <cstdint>
#include <vector>

#include "opshadow/channel.h"
#include "opshadow/estimators.h"
#include "opshadow/oracle.h"
#include "opshadow/qsim.h"
#include "opshadow/rng.h"
#include "opshadow/shadow.h"

namespace opshadow::testing {

/// Layers of Haar two-qubit gates on random neighbouring pairs, with an
/// optional depolarizing channel after each gate.
inline Channel random_channel(int n, int gates, std::uint64_t seed, double noise = 0) {
    auto rng = CounterRng::stream(seed, StreamTag::kTest, {0x5243, static_cast<std::uint64_t>(n)});
    Channel ch(n);
    for (int g = 0; g < gates; ++g) {
        if (n == 1) {
            ch.append({KrausChannel::unitary(1, haar_random_unitary(2, rng)), {0}});
            continue;
        }
        int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
        ch.append({KrausChannel::unitary(2, haar_random_unitary(4, rng)), {q, q + 1}});
        if (noise > 0) {
            ch.append({KrausChannel::depolarizing(2, noise), {q, q + 1}});
        }
    }
    return ch;
}

inline Channel cnot_channel(int n, int control = 0, int target = 1) {
    Matrix cx = Matrix::Zero(4, 4);
    cx(0, 0) = cx(2, 2) = 1;
    cx(3, 1) = cx(1, 3) = 1;
    Channel ch(n);
    ch.append({KrausChannel::unitary(2, cx), {control, target}});
    return ch;
}

/// Independent single-qubit channels. Qubit 0 gets an entanglement-breaking
/// channel (complete dephasing or depolarizing at p = 0.7 between Haar
/// unitaries), so input qubit 0 is separable from everything else.
inline Channel separable_product_channel(int n, std::uint64_t seed) {
    auto rng = CounterRng::stream(seed, StreamTag::kTest, {0x5052, static_cast<std::uint64_t>(n)});
    Channel ch(n);
    ch.append({KrausChannel::unitary(1, haar_random_unitary(2, rng)), {0}});
    if (seed % 2 == 0) {
        Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
        p0(0, 0) = 1;
        p1(1, 1) = 1;
        ch.append({KrausChannel(1, {p0, p1}), {0}});
    } else {
        ch.append({KrausChannel::depolarizing(1, 0.7), {0}});
    }
    for (int q = 0; q < n; ++q) {
        ch.append({KrausChannel::unitary(1, haar_random_unitary(2, rng)), {q}});
    }
    return ch;
}

/// Choi state assembled entry by entry: (1/2^n) sum_ij |i><j| (x) N(|i><j|),
/// inputs on the low bits.
inline Matrix brute_choi(const Channel &channel) {
    const int n = channel.n_qubits();
    const auto d = Eigen::Index{1} << n;
    Matrix out = Matrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1;
            Matrix image = channel.apply_to_operator(e);
            for (Eigen::Index r = 0; r < d; ++r) {
                for (Eigen::Index c = 0; c < d; ++c) {
                    out(i + d * r, j + d * c) = image(r, c);
                }
            }
        }
    }
    return out / static_cast<double>(d);
}

/// Qubit list of a region inside the full Choi register (outputs offset by n).
inline QubitList choi_qubits(const Region &region, int n) {
    QubitList keep = region.inputs;
    for (int q : region.outputs) {
        keep.push_back(q + n);
    }
    return keep;
}

/// Reduced state from brute_choi, optionally partially transposed on inputs.
inline Matrix brute_reduced(const Channel &channel, const Region &region, const QubitList &transposed = {}) {
    const int n = channel.n_qubits();
    DensityOperator full(2 * n, brute_choi(channel));
    DensityOperator red = partial_trace(full, choi_qubits(region, n));
    if (!transposed.empty()) {
        QubitList local;
        for (int q : transposed) {
            for (std::size_t i = 0; i < region.inputs.size(); ++i) {
                if (region.inputs[i] == q) {
                    local.push_back(static_cast<int>(i));
                }
            }
        }
        red = partial_transpose(red, local);
    }
    return red.matrix();
}

inline double trace_power(const Matrix &m, int k) {
    Matrix p = m;
    for (int i = 1; i < k; ++i) {
        p = p * m;
    }
    return p.trace().real();
}

/// Per-circuit shot-averaged snapshots summed from reduced_snapshot, then
/// the moment averaged over every ordered tuple of distinct circuits.
inline double brute_moment(const ShadowDataset &ds, const Region &region, int m, const QubitList &transposed = {}) {
    std::vector<Matrix> avg;
    for (int c = 0; c < ds.m_u; ++c) {
        Matrix acc;
        for (int s = 0; s < ds.m_s; ++s) {
            Matrix snap = reduced_snapshot(ds.records[static_cast<std::size_t>(c * ds.m_s + s)], region);
            acc = s == 0 ? snap : Matrix(acc + snap);
        }
        acc /= ds.m_s;
        if (!transposed.empty()) {
            QubitList local;
            for (int q : transposed) {
                for (std::size_t i = 0; i < region.inputs.size(); ++i) {
                    if (region.inputs[i] == q) {
                        local.push_back(static_cast<int>(i));
                    }
                }
            }
            acc = partial_transpose(DensityOperator(region.size(), acc), local).matrix();
        }
        avg.push_back(acc);
    }
    double sum = 0;
    long long count = 0;
    const auto n = avg.size();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) {
                continue;
            }
            if (m == 2) {
                sum += (avg[a] * avg[b]).trace().real();
                ++count;
                continue;
            }
            Matrix ab = avg[a] * avg[b];
            for (std::size_t c = 0; c < n; ++c) {
                if (c == a || c == b) {
                    continue;
                }
                sum += (ab * avg[c]).trace().real();
                ++count;
            }
        }
    }
    return sum / static_cast<double>(count);
}

}  // namespace opshadow::testing

#endif
