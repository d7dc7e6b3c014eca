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

#include "opshadow/estimators.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "opshadow/parallel.h"
#include "opshadow/rng.h"

namespace opshadow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Matrix2cd pauli2(Pauli p) { return pauli_matrix(p); }

/// I/2 + 1.5 sign P, the snapshot factor of a signed Pauli eigenstate.
Eigen::Matrix2cd factor_matrix(Pauli p, int sign) {
    return Eigen::Matrix2cd::Identity() * 0.5 + 1.5 * sign * pauli2(p);
}

/// Per region qubit: axis, sign for bit 0, and whether the axis matrix is transposed.
struct QubitFactor {
    Pauli axis = Pauli::Z;
    int sign0 = 1;
    bool transpose = false;

    Eigen::Matrix2cd matrix(int bit) const {
        int s = bit ? -sign0 : sign0;
        Eigen::Matrix2cd m = factor_matrix(axis, s);
        return transpose ? Eigen::Matrix2cd(m.transpose()) : m;
    }
};

void check_qubits(const QubitList &qs, int n, const char *what) {
    std::uint64_t seen = 0;
    for (int q : qs) {
        if (q < 0 || q >= n) {
            throw std::invalid_argument(std::string(what) + " qubit " + std::to_string(q + 1) + " out of range");
        }
        if (seen & (std::uint64_t{1} << q)) {
            throw std::invalid_argument(std::string(what) + " qubit " + std::to_string(q + 1) + " repeated");
        }
        seen |= std::uint64_t{1} << q;
    }
}

std::string join_labels(const QubitList &qs) {
    std::string s;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (i) {
            s += ',';
        }
        s += std::to_string(qs[i] + 1);
    }
    return s;
}

/// Dense sum_x w(x) kron_q F_q(x_q); qubit q of the region is bit q.
Matrix dense_from_weights(const std::vector<double> &w, const std::vector<std::array<Eigen::Matrix2cd, 2>> &factors) {
    const auto r = factors.size();
    std::vector<Complex> cur(w.begin(), w.end());
    std::size_t low = 1;
    for (std::size_t q = 0; q < r; ++q) {
        std::size_t high = std::size_t{1} << (r - q);
        std::vector<Complex> next(low * 4 * (high / 2), Complex(0));
        const auto &f = factors[q];
        for (std::size_t hi = 0; hi < high; ++hi) {
            std::size_t bit = hi & 1, rest = hi >> 1;
            for (std::size_t lo = 0; lo < low; ++lo) {
                Complex v = cur[lo + low * hi];
                if (v == Complex(0)) {
                    continue;
                }
                for (std::size_t p = 0; p < 4; ++p) {
                    next[lo + low * (p + 4 * rest)] += v * f[bit](static_cast<Eigen::Index>(p & 1),
                                                                  static_cast<Eigen::Index>(p >> 1));
                }
            }
        }
        cur = std::move(next);
        low *= 4;
    }
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << r);
    Matrix out(d, d);
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
        std::size_t row = 0, col = 0;
        for (std::size_t q = 0; q < r; ++q) {
            row |= ((idx >> (2 * q)) & 1) << q;
            col |= ((idx >> (2 * q + 1)) & 1) << q;
        }
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = cur[idx];
    }
    return out;
}

void summarize(const std::vector<double> &replicates, double &std_error, double &lo, double &hi) {
    std::vector<double> finite;
    for (double v : replicates) {
        if (std::isfinite(v)) {
            finite.push_back(v);
        }
    }
    if (finite.size() < 2) {
        std_error = lo = hi = kNaN;
        return;
    }
    double mean = std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
    double ss = 0;
    for (double v : finite) {
        ss += (v - mean) * (v - mean);
    }
    std_error = std::sqrt(ss / static_cast<double>(finite.size() - 1));
    std::sort(finite.begin(), finite.end());
    auto pick = [&](double q) {
        auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(finite.size() - 1) + 0.5));
        return finite[std::min(i, finite.size() - 1)];
    };
    lo = pick(0.025);
    hi = pick(0.975);
}

}  // namespace

void Region::validate(int n_qubits) const {
    check_qubits(inputs, n_qubits, "input");
    check_qubits(outputs, n_qubits, "output");
    if (size() > 2 * kMaxQubits) {
        throw std::invalid_argument("region too large");
    }
}

std::string Region::str() const { return "in{" + join_labels(inputs) + "}out{" + join_labels(outputs) + "}"; }

Region join(const QubitList &inputs, const QubitList &outputs) { return Region{inputs, outputs}; }

QubitList complement(const QubitList &a, int n_qubits) {
    QubitList out;
    for (int q = 0; q < n_qubits; ++q) {
        if (std::find(a.begin(), a.end(), q) == a.end()) {
            out.push_back(q);
        }
    }
    return out;
}

Matrix snapshot_factor(const SnapshotRecord &record, int qubit, Side side) {
    auto n = static_cast<int>(record.settings.input.size());
    if (qubit < 0 || qubit >= n) {
        throw std::invalid_argument("snapshot qubit out of range");
    }
    const auto q = static_cast<std::size_t>(qubit);
    if (side == Side::kInput) {
        InputLabel label = flip_label(record.settings.input[q], (record.a_bits >> qubit) & 1);
        Vector psi = input_state(label);
        Matrix proj = psi * psi.adjoint();
        return 3.0 * Matrix(proj.transpose()) - Matrix::Identity(2, 2);
    }
    Matrix v = meas_rotation(record.settings.meas[q]);
    Vector b = Vector::Zero(2);
    b((record.b_bits >> qubit) & 1) = 1;
    Vector state = v.adjoint() * b;
    return 3.0 * Matrix(state * state.adjoint()) - Matrix::Identity(2, 2);
}

Matrix reduced_snapshot(const SnapshotRecord &record, const Region &region) {
    region.validate(static_cast<int>(record.settings.input.size()));
    Matrix out = Matrix::Identity(1, 1);
    for (int q : region.inputs) {
        out = kron(snapshot_factor(record, q, Side::kInput), out);
    }
    for (int q : region.outputs) {
        out = kron(snapshot_factor(record, q, Side::kOutput), out);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ShadowEstimator

ShadowEstimator::ShadowEstimator(const ShadowDataset &dataset, EstimatorOptions options)
    : n_qubits_(dataset.n_qubits), timestep_(dataset.timestep), options_(options) {
    dataset.validate();
    if (options_.bootstrap < 0) {
        throw std::invalid_argument("bootstrap resample count must be non-negative");
    }
    if (options_.mitigate) {
        if (dataset.confusion.empty()) {
            throw std::invalid_argument("mitigation requested but the dataset carries no confusion matrices");
        }
        for (std::size_t i = 0; i < dataset.confusion.size(); ++i) {
            if (dataset.confusion[i].singular()) {
                throw SingularConfusionError("confusion matrix of qubit " + std::to_string(i + 1) + " is singular");
            }
        }
        confusion_ = dataset.confusion;
    }
    const auto shift = static_cast<unsigned>(n_qubits_);
    for (int c = 0; c < dataset.m_u; ++c) {
        Group g;
        g.shots = dataset.m_s;
        std::vector<std::uint64_t> keys;
        for (int s = 0; s < dataset.m_s; ++s) {
            const auto &r = dataset.records[static_cast<std::size_t>(c) * static_cast<std::size_t>(dataset.m_s) +
                                            static_cast<std::size_t>(s)];
            if (s == 0) {
                g.settings = r.settings;
            }
            keys.push_back(r.a_bits | (r.b_bits << shift));
        }
        std::sort(keys.begin(), keys.end());
        for (auto k : keys) {
            if (!g.counts.empty() && g.counts.back().first == k) {
                ++g.counts.back().second;
            } else {
                g.counts.emplace_back(k, 1);
            }
        }
        groups_.push_back(std::move(g));
    }
    // Canonical order: estimates depend only on the multiset of circuits.
    std::sort(groups_.begin(), groups_.end(), [](const Group &x, const Group &y) {
        if (x.settings.input != y.settings.input) {
            return x.settings.input < y.settings.input;
        }
        if (x.settings.meas != y.settings.meas) {
            return x.settings.meas < y.settings.meas;
        }
        return x.counts < y.counts;
    });

    const auto m = static_cast<Eigen::Index>(groups_.size());
    multiplicity_ = Eigen::MatrixXd::Zero(m, options_.bootstrap + 1);
    multiplicity_.col(0).setOnes();
    for (int r = 0; r < options_.bootstrap && m > 0; ++r) {
        auto rng = CounterRng::stream(options_.seed, StreamTag::kBootstrap,
                                      {static_cast<std::uint64_t>(timestep_), static_cast<std::uint64_t>(r)});
        for (Eigen::Index i = 0; i < m; ++i) {
            multiplicity_(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(m))), r + 1) += 1;
        }
    }
}

std::vector<double> ShadowEstimator::region_weights(int c, const Region &region) const {
    const auto &g = groups_.at(static_cast<std::size_t>(c));
    const auto r = static_cast<std::size_t>(region.size());
    std::vector<double> w(std::size_t{1} << r, 0.0);
    const double norm = 1.0 / g.shots;
    for (const auto &[key, count] : g.counts) {
        std::uint64_t a = key & ((std::uint64_t{1} << n_qubits_) - 1);
        std::uint64_t b = key >> n_qubits_;
        std::size_t x = 0, pos = 0;
        for (int q : region.inputs) {
            x |= static_cast<std::size_t>((a >> q) & 1) << pos++;
        }
        for (int q : region.outputs) {
            x |= static_cast<std::size_t>((b >> q) & 1) << pos++;
        }
        w[x] += count * norm;
    }
    if (!confusion_.empty()) {
        for (std::size_t k = 0; k < region.outputs.size(); ++k) {
            Eigen::Matrix2d inv = confusion_[static_cast<std::size_t>(region.outputs[k])].m.inverse();
            std::size_t stride = std::size_t{1} << (region.inputs.size() + k);
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (i & stride) {
                    continue;
                }
                double x0 = w[i], x1 = w[i | stride];
                w[i] = inv(0, 0) * x0 + inv(0, 1) * x1;
                w[i | stride] = inv(1, 0) * x0 + inv(1, 1) * x1;
            }
        }
    }
    return w;
}

namespace {

std::vector<QubitFactor> factors_for(const SettingPair &settings, const Region &region, const QubitList &transposed) {
    std::vector<QubitFactor> out;
    for (int q : region.inputs) {
        auto label = settings.input[static_cast<std::size_t>(q)];
        bool pt = std::find(transposed.begin(), transposed.end(), q) != transposed.end();
        // Input factors carry (|psi><psi|)^T; a partial transpose undoes it.
        out.push_back({input_axis(label), input_sign(label), !pt});
    }
    for (int q : region.outputs) {
        out.push_back({meas_axis(settings.meas[static_cast<std::size_t>(q)]), 1, false});
    }
    return out;
}

}  // namespace

Matrix ShadowEstimator::circuit_snapshot(int c, const Region &region, const QubitList &transposed_inputs) const {
    auto w = region_weights(c, region);
    auto fs = factors_for(groups_.at(static_cast<std::size_t>(c)).settings, region, transposed_inputs);
    std::vector<std::array<Eigen::Matrix2cd, 2>> mats;
    for (const auto &f : fs) {
        mats.push_back({f.matrix(0), f.matrix(1)});
    }
    return dense_from_weights(w, mats);
}

namespace {

/// In-place Pauli expansion of a dense operator stored with row bit q at
/// position 2q and column bit q at 2q + 1; afterwards entry
/// sum_q code_q << 2q holds the coefficient of that Pauli string.
void to_pauli_basis(std::vector<Complex> &a, int r) {
    const Complex i_half(0, 0.5);
    for (int q = 0; q < r; ++q) {
        const std::size_t row = std::size_t{1} << (2 * q), col = row << 1;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i & (row | col)) {
                continue;
            }
            Complex m00 = a[i], m10 = a[i | row], m01 = a[i | col], m11 = a[i | row | col];
            a[i] = 0.5 * (m00 + m11);
            a[i | row] = 0.5 * (m01 + m10);
            a[i | col] = i_half * (m01 - m10);
            a[i | row | col] = 0.5 * (m00 - m11);
        }
    }
}

/// Inverse of to_pauli_basis.
void from_pauli_basis(std::vector<Complex> &a, int r) {
    const Complex i(0, 1);
    for (int q = 0; q < r; ++q) {
        const std::size_t row = std::size_t{1} << (2 * q), col = row << 1;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (k & (row | col)) {
                continue;
            }
            Complex ci = a[k], cx = a[k | row], cy = a[k | col], cz = a[k | row | col];
            a[k] = ci + cz;
            a[k | row | col] = ci - cz;
            a[k | col] = cx - i * cy;
            a[k | row] = cx + i * cy;
        }
    }
}

std::size_t interleave(std::size_t row, std::size_t col, int r) {
    std::size_t idx = 0;
    for (int q = 0; q < r; ++q) {
        idx |= ((row >> q) & 1) << (2 * q);
        idx |= ((col >> q) & 1) << (2 * q + 1);
    }
    return idx;
}

/// Snapshot as sum_m coef[m] P_m: 2^r Pauli strings with I or the qubit's axis.
struct SparsePauli {
    std::vector<std::uint32_t> keys;
    std::vector<double> coef;
};

SparsePauli sparse_pauli(std::vector<double> w, const std::vector<QubitFactor> &fs) {
    const auto r = fs.size();
    for (std::size_t q = 0; q < r; ++q) {
        double s0 = fs[q].sign0;
        if (fs[q].transpose && fs[q].axis == Pauli::Y) {
            s0 = -s0;
        }
        std::size_t stride = std::size_t{1} << q;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i & stride) {
                continue;
            }
            double w0 = w[i], w1 = w[i | stride];
            w[i] = 0.5 * (w0 + w1);
            w[i | stride] = 1.5 * s0 * (w0 - w1);
        }
    }
    SparsePauli out;
    out.coef = std::move(w);
    out.keys.resize(out.coef.size());
    for (std::size_t m = 0; m < out.coef.size(); ++m) {
        std::uint32_t key = 0;
        for (std::size_t q = 0; q < r; ++q) {
            if ((m >> q) & 1) {
                key |= static_cast<std::uint32_t>(fs[q].axis) << (2 * q);
            }
        }
        out.keys[m] = key;
    }
    return out;
}

}  // namespace

Eigen::MatrixXd ShadowEstimator::gram(const Region &region) const {
    const auto m = static_cast<std::size_t>(groups_.size());
    const auto r = static_cast<std::size_t>(region.size());
    const double d = std::ldexp(1.0, static_cast<int>(r));
    std::vector<SparsePauli> sp(m);
    // Per circuit and qubit: 2-bit axis code.
    std::vector<std::vector<std::uint8_t>> axes(m);
    for (std::size_t c = 0; c < m; ++c) {
        auto fs = factors_for(groups_[c].settings, region, {});
        sp[c] = sparse_pauli(region_weights(static_cast<int>(c), region), fs);
        for (const auto &f : fs) {
            axes[c].push_back(static_cast<std::uint8_t>(f.axis));
        }
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    parallel_for(
        m,
        [&](std::size_t a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                // Only strings supported where both circuits share an axis overlap.
                std::size_t agree = 0;
                for (std::size_t q = 0; q < r; ++q) {
                    if (axes[a][q] == axes[b][q]) {
                        agree |= std::size_t{1} << q;
                    }
                }
                double dot = 0;
                for (std::size_t sub = agree;; sub = (sub - 1) & agree) {
                    dot += sp[a].coef[sub] * sp[b].coef[sub];
                    if (sub == 0) {
                        break;
                    }
                }
                g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d * dot;
            }
        },
        options_.workers);
    g.triangularView<Eigen::StrictlyLower>() = g.transpose();
    return g;
}

void ShadowEstimator::finish(MomentEstimate &est, const std::vector<double> &num, const std::vector<double> &den) const {
    auto ratio = [](double n, double d) { return d > 0 ? n / d : kNaN; };
    est.value = ratio(num[0], den[0]);
    est.replicates.clear();
    for (std::size_t r = 1; r < num.size(); ++r) {
        est.replicates.push_back(ratio(num[r], den[r]));
    }
    summarize(est.replicates, est.std_error, est.ci_low, est.ci_high);
}

MomentEstimate ShadowEstimator::moment(const Region &region, int m, const QubitList &transposed_inputs) const {
    region.validate(n_qubits_);
    if (m != 2 && m != 3) {
        throw std::invalid_argument("moment order must be 2 or 3");
    }
    for (int q : transposed_inputs) {
        if (std::find(region.inputs.begin(), region.inputs.end(), q) == region.inputs.end()) {
            throw std::invalid_argument("transposed qubit " + std::to_string(q + 1) + " is not a region input");
        }
    }
    if (circuits() < m) {
        throw std::invalid_argument("need at least " + std::to_string(m) + " circuits, have " +
                                    std::to_string(circuits()));
    }
    if (m == 3) {
        return third_moment(region, transposed_inputs);
    }
    MomentEstimate est;
    est.m = 2;
    est.transposed = !transposed_inputs.empty();
    est.region = region;
    est.transposed_inputs = transposed_inputs;
    // Tr[A^T B^T] = Tr[A B]: the second moment ignores partial transposes.
    Eigen::MatrixXd g = gram(region);
    Eigen::MatrixXd gn = g * multiplicity_;
    std::vector<double> num, den;
    for (Eigen::Index r = 0; r < multiplicity_.cols(); ++r) {
        auto n = multiplicity_.col(r);
        num.push_back(n.dot(gn.col(r)));
        double total = n.sum();
        den.push_back(total * total - n.squaredNorm());
    }
    finish(est, num, den);
    return est;
}


MomentEstimate ShadowEstimator::third_moment(const Region &region, const QubitList &transposed_inputs) const {
    MomentEstimate est;
    est.m = 3;
    est.transposed = !transposed_inputs.empty();
    est.region = region;
    est.transposed_inputs = transposed_inputs;

    const auto m = static_cast<Eigen::Index>(groups_.size());
    const int rs = region.size();
    const auto d = Eigen::Index{1} << rs;
    const auto dd = static_cast<std::size_t>(d * d);
    const Eigen::Index cols = multiplicity_.cols();

    std::vector<SparsePauli> sparse(static_cast<std::size_t>(m));
    parallel_for(
        static_cast<std::size_t>(m),
        [&](std::size_t a) {
            sparse[a] = sparse_pauli(region_weights(static_cast<int>(a), region),
                                     factors_for(groups_[a].settings, region, transposed_inputs));
        },
        options_.workers);

    // t(a, b) = Tr[rho_a^2 rho_b] = d sum_P (rho_a^2)_P (rho_b)_P.
    Eigen::MatrixXd t(m, m);
    parallel_for(
        static_cast<std::size_t>(m),
        [&](std::size_t a) {
            Matrix rho = circuit_snapshot(static_cast<int>(a), region, transposed_inputs);
            Matrix sq = rho * rho;
            std::vector<Complex> flat(dd);
            for (Eigen::Index col = 0; col < d; ++col) {
                for (Eigen::Index row = 0; row < d; ++row) {
                    flat[interleave(static_cast<std::size_t>(row), static_cast<std::size_t>(col), rs)] = sq(row, col);
                }
            }
            to_pauli_basis(flat, rs);
            for (Eigen::Index b = 0; b < m; ++b) {
                const auto &sp = sparse[static_cast<std::size_t>(b)];
                double acc = 0;
                for (std::size_t k = 0; k < sp.keys.size(); ++k) {
                    acc += flat[sp.keys[k]].real() * sp.coef[k];
                }
                t(static_cast<Eigen::Index>(a), b) = static_cast<double>(d) * acc;
            }
        },
        options_.workers);
    // u(a, r) = Tr[rho_a^2 S_r] with S_r = sum_b n_{b,r} rho_b.
    Eigen::MatrixXd u = t * multiplicity_;
    Eigen::VectorXd cubes = t.diagonal();

    std::vector<double> tr3(static_cast<std::size_t>(cols));
    parallel_for(
        static_cast<std::size_t>(cols),
        [&](std::size_t rr) {
            auto r = static_cast<Eigen::Index>(rr);
            std::vector<Complex> flat(dd, Complex(0));
            for (Eigen::Index a = 0; a < m; ++a) {
                double na = multiplicity_(a, r);
                if (na == 0) {
                    continue;
                }
                const auto &sp = sparse[static_cast<std::size_t>(a)];
                for (std::size_t k = 0; k < sp.keys.size(); ++k) {
                    flat[sp.keys[k]] += na * sp.coef[k];
                }
            }
            from_pauli_basis(flat, rs);
            Matrix s(d, d);
            for (Eigen::Index col = 0; col < d; ++col) {
                for (Eigen::Index row = 0; row < d; ++row) {
                    s(row, col) = flat[interleave(static_cast<std::size_t>(row), static_cast<std::size_t>(col), rs)];
                }
            }
            Matrix s2 = s * s;
            tr3[rr] = (s2.transpose().cwiseProduct(s)).sum().real();
        },
        options_.workers);

    std::vector<double> num(static_cast<std::size_t>(cols)), den(static_cast<std::size_t>(cols));
    parallel_for(
        static_cast<std::size_t>(cols),
        [&](std::size_t rr) {
            auto r = static_cast<Eigen::Index>(rr);
            auto n = multiplicity_.col(r);
            double total = n.sum();
            double pair_terms = 0, triple_terms = 0, n2 = 0, n3 = 0;
            for (Eigen::Index a = 0; a < m; ++a) {
                double na = n(a);
                pair_terms += na * na * u(a, r);
                triple_terms += na * na * na * cubes(a);
                n2 += na * na;
                n3 += na * na * na;
            }
            num[rr] = tr3[rr] - 3 * pair_terms + 2 * triple_terms;
            den[rr] = total * total * total - 3 * total * n2 + 2 * n3;
        },
        options_.workers);
    finish(est, num, den);
    return est;
}

MomentEstimate estimate_moment(const ShadowDataset &dataset, const Region &region, int m,
                               const QubitList &transposed_inputs, const EstimatorOptions &options) {
    return ShadowEstimator(dataset, options).moment(region, m, transposed_inputs);
}

// ---------------------------------------------------------------------------
// Derived quantities

namespace {

DerivedEstimate combine(const std::vector<const MomentEstimate *> &parts,
                        const std::function<double(const std::vector<double> &)> &f) {
    DerivedEstimate out;
    std::vector<double> args;
    for (const auto *p : parts) {
        args.push_back(p->value);
    }
    out.value = f(args);
    out.defined = std::isfinite(out.value);
    std::size_t reps = parts.empty() ? 0 : parts.front()->replicates.size();
    for (std::size_t r = 0; r < reps; ++r) {
        args.clear();
        for (const auto *p : parts) {
            args.push_back(p->replicates[r]);
        }
        out.replicates.push_back(f(args));
    }
    summarize(out.replicates, out.std_error, out.ci_low, out.ci_high);
    return out;
}

double safe_log2(double x) { return x > 0 ? std::log2(x) : kNaN; }

}  // namespace

DerivedEstimate renyi_mi(const ShadowEstimator &est, const QubitList &a, const QubitList &c) {
    const int n = est.n_qubits();
    auto bc = join(complement(a, n), c);
    auto abc = join(complement({}, n), c);
    auto p_bc = est.moment(bc, 2);
    auto p_abc = est.moment(abc, 2);
    const double size_a = static_cast<double>(a.size());
    auto out = combine({&p_bc, &p_abc},
                       [&](const std::vector<double> &p) { return size_a - safe_log2(p[0]) + safe_log2(p[1]); });
    out.above_threshold = out.defined && out.value > size_a;
    return out;
}

DerivedEstimate negativity_ratio(const ShadowEstimator &est, const QubitList &a, const QubitList &c) {
    const int n = est.n_qubits();
    auto abc = join(complement({}, n), c);
    auto p2 = est.moment(abc, 2, a);
    auto p3 = est.moment(abc, 3, a);
    auto out = combine({&p2, &p3}, [](const std::vector<double> &p) { return safe_log2(p[0] * p[0] / p[1]); });
    out.above_threshold = out.defined && out.value > 0;
    return out;
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

std::int64_t binomial_inversion_sum(int i, int j) {
    std::int64_t s = 0;
    for (int m = i; m <= j; ++m) {
        std::int64_t term = binomial(j, m) * binomial(m, i);
        s += ((j + m) % 2 == 0) ? term : -term;
    }
    return s;
}

std::vector<double> dk_weights(int n_qubits, int c_size, const std::vector<double> &purity_by_mask, int k_max) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count out of range");
    }
    if (c_size < 1) {
        throw std::invalid_argument("output region C must be non-empty");
    }
    if (purity_by_mask.size() != (std::size_t{1} << n_qubits)) {
        throw std::invalid_argument("purity table needs one entry per input subset");
    }
    if (k_max < 0 || k_max > n_qubits) {
        k_max = n_qubits;
    }
    // q[j] = sum_{|A| = j} (2^{|A|+|C|} Tr[rho_AC^2] - 1)
    std::vector<double> q(static_cast<std::size_t>(k_max + 1), 0.0);
    for (std::size_t mask = 0; mask < purity_by_mask.size(); ++mask) {
        int j = std::popcount(mask);
        if (j > k_max) {
            continue;
        }
        double p = purity_by_mask[mask];
        if (!std::isfinite(p)) {
            QubitList a;
            for (int b = 0; b < n_qubits; ++b) {
                if (mask & (std::size_t{1} << b)) {
                    a.push_back(b);
                }
            }
            throw std::invalid_argument("missing purity for input subset {" + join_labels(a) + "}");
        }
        q[static_cast<std::size_t>(j)] += std::ldexp(p, j + c_size) - 1.0;
    }
    const double norm = std::ldexp(1.0, 2 * c_size) - 1.0;
    std::vector<double> dk(static_cast<std::size_t>(n_qubits + 1), kNaN);
    for (int k = 0; k <= k_max; ++k) {
        double e = 0;
        for (int j = 0; j <= k; ++j) {
            double coeff = static_cast<double>(binomial(n_qubits - j, n_qubits - k));
            e += ((k - j) % 2 == 0 ? coeff : -coeff) * q[static_cast<std::size_t>(j)];
        }
        dk[static_cast<std::size_t>(k)] = e / norm;
    }
    return dk;
}

std::vector<double> cumulative(const std::vector<double> &dk) {
    std::vector<double> out(dk.size());
    std::partial_sum(dk.begin(), dk.end(), out.begin());
    return out;
}

std::vector<DerivedEstimate> dk_estimates(const ShadowEstimator &est, const QubitList &c, bool cumulative_sums) {
    const int n = est.n_qubits();
    const std::size_t masks = std::size_t{1} << n;
    std::vector<MomentEstimate> purities;
    purities.reserve(masks);
    for (std::size_t mask = 0; mask < masks; ++mask) {
        QubitList a;
        for (int b = 0; b < n; ++b) {
            if (mask & (std::size_t{1} << b)) {
                a.push_back(b);
            }
        }
        purities.push_back(est.moment(join(a, c), 2));
    }
    std::vector<const MomentEstimate *> parts;
    for (const auto &p : purities) {
        parts.push_back(&p);
    }
    const int c_size = static_cast<int>(c.size());
    std::vector<DerivedEstimate> out;
    for (int k = 0; k <= n; ++k) {
        out.push_back(combine(parts, [&](const std::vector<double> &p) {
            auto dk = dk_weights(n, c_size, p);
            return cumulative_sums ? cumulative(dk)[static_cast<std::size_t>(k)] : dk[static_cast<std::size_t>(k)];
        }));
    }
    return out;
}

}  // namespace opshadow
