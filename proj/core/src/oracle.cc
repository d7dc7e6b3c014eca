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

#include "opshadow/oracle.h"

#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "opshadow/parallel.h"

namespace opshadow {

namespace {

QubitList range_list(int n) {
    QubitList out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

QubitList positions(int start, int count) {
    QubitList out(static_cast<std::size_t>(count));
    std::iota(out.begin(), out.end(), start);
    return out;
}

double purity(const DensityOperator &rho) { return rho.matrix().cwiseAbs2().sum(); }

double entropy(const DensityOperator &rho, int m) {
    auto f = spectral_functionals(rho);
    switch (m) {
        case 1:
            return f.von_neumann;
        case 2:
            return f.renyi2;
        case 3:
            return f.renyi3;
        default:
            throw std::invalid_argument("entropy order must be 1, 2 or 3");
    }
}

}  // namespace

DensityOperator exact_reduced_operator_state(const Channel &channel, const Region &region) {
    const int n = channel.n_qubits();
    region.validate(n);
    const int r = region.size();
    if (r > kMaxOracleRegion) {
        throw std::invalid_argument("region of " + std::to_string(r) + " qubits exceeds the oracle limit of " +
                                    std::to_string(kMaxOracleRegion));
    }
    const auto d = Eigen::Index{1} << r;
    const auto in_size = region.inputs.size();
    auto in_strings = paulis_supported_on(n, region.inputs);
    auto out_strings = paulis_supported_on(n, region.outputs);
    const double norm = std::ldexp(1.0, -n - r);

    std::optional<Matrix> u;
    if (channel.is_unitary()) {
        u = channel.unitary();
    }
    // c(P, Q) = 2^{-N} Tr[P^T N^dag(Q)] = 2^{-N} Tr[Q N(P^T)]; evolve whichever side has fewer strings.
    const bool heisenberg = out_strings.size() <= in_strings.size();
    const auto &evolved_side = heisenberg ? out_strings : in_strings;
    const auto &traced_side = heisenberg ? in_strings : out_strings;

    std::vector<Matrix> partial(evolved_side.size(), Matrix::Zero(d, d));
    parallel_for(evolved_side.size(), [&](std::size_t ei) {
        const auto &e = evolved_side[ei];
        Matrix m = e.to_matrix();
        Matrix evolved;
        if (heisenberg) {
            evolved = u ? Matrix(u->adjoint() * m * *u) : channel.apply_adjoint(m);
        } else {
            // P^T = (-1)^{#Y} P, applied to the coefficient below.
            evolved = u ? Matrix(*u * m * u->adjoint()) : channel.apply_to_operator(m);
        }
        std::vector<Pauli> word(static_cast<std::size_t>(r), Pauli::I);
        for (const auto &t : traced_side) {
            const auto &p = heisenberg ? t : e;
            const auto &q = heisenberg ? e : t;
            Complex c = pauli_trace(t, evolved) * norm;
            if (p.y_count() % 2) {
                c = -c;
            }
            if (std::abs(c) < 1e-15) {
                continue;
            }
            for (std::size_t i = 0; i < in_size; ++i) {
                word[i] = p[region.inputs[i]];
            }
            for (std::size_t k = 0; k < region.outputs.size(); ++k) {
                word[in_size + k] = q[region.outputs[k]];
            }
            add_pauli(partial[ei], PauliString(word), c);
        }
    });
    Matrix rho = Matrix::Zero(d, d);
    for (const auto &m : partial) {
        rho += m;
    }
    rho = (rho + rho.adjoint()) / 2.0;
    return DensityOperator(r, std::move(rho));
}

DensityOperator choi_state(const Channel &channel) {
    const int n = channel.n_qubits();
    if (2 * n > kMaxOracleRegion) {
        throw std::invalid_argument("full Choi state too large");
    }
    const auto d = Eigen::Index{1} << n;
    Matrix choi = Matrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1;
            Matrix out = channel.apply_to_operator(e);
            // index = input + d * output
            for (Eigen::Index a = 0; a < d; ++a) {
                for (Eigen::Index b = 0; b < d; ++b) {
                    choi(i + d * a, j + d * b) = out(a, b) / static_cast<double>(d);
                }
            }
        }
    }
    return DensityOperator(2 * n, std::move(choi));
}

double mutual_information(const DensityOperator &joint, int x_size, int m) {
    const int total = joint.n_qubits();
    if (x_size < 0 || x_size > total) {
        throw std::invalid_argument("split point out of range");
    }
    auto x = partial_trace(joint, positions(0, x_size));
    auto y = partial_trace(joint, positions(x_size, total - x_size));
    return entropy(x, m) + entropy(y, m) - entropy(joint, m);
}

ExactQuantities exact_quantities(const Channel &channel, const QubitList &a, const QubitList &c) {
    const int n = channel.n_qubits();
    const QubitList b = complement(a, n);
    const QubitList d_out = complement(c, n);
    const auto size_a = static_cast<int>(a.size());
    ExactQuantities q;

    // A then B C on the bits of one block.
    QubitList abc_inputs = a;
    abc_inputs.insert(abc_inputs.end(), b.begin(), b.end());
    auto abc = exact_reduced_operator_state(channel, join(abc_inputs, c));
    auto bc = partial_trace(abc, positions(size_a, abc.n_qubits() - size_a));
    q.purity_abc = purity(abc);
    q.purity_bc = purity(bc);
    q.renyi2_mi = mutual_information(abc, size_a, 2);
    q.renyi3_mi = mutual_information(abc, size_a, 3);
    q.von_neumann_mi = mutual_information(abc, size_a, 1);

    auto pt = partial_transpose(abc, positions(0, size_a));
    Matrix sq = pt.matrix() * pt.matrix();
    q.p2 = sq.trace().real();
    q.p3 = (sq * pt.matrix()).trace().real();
    q.log2_ratio = std::log2(q.p2 * q.p2 / q.p3);
    q.log_negativity = log_trace_norm(pt);

    // A on the low bits, then C, then D.
    QubitList outs = c;
    outs.insert(outs.end(), d_out.begin(), d_out.end());
    auto acd = exact_reduced_operator_state(channel, join(a, outs));
    const auto size_c = static_cast<int>(c.size());
    const auto size_d = static_cast<int>(d_out.size());
    QubitList keep_ac = positions(0, size_a + size_c);
    QubitList keep_ad = positions(0, size_a);
    auto tail = positions(size_a + size_c, size_d);
    keep_ad.insert(keep_ad.end(), tail.begin(), tail.end());
    auto ac = partial_trace(acd, keep_ac);
    auto ad = partial_trace(acd, keep_ad);
    q.tripartite2 = mutual_information(ac, size_a, 2) + mutual_information(ad, size_a, 2) -
                    mutual_information(acd, size_a, 2);
    return q;
}

std::vector<double> exact_purity_table(const Channel &channel, const QubitList &c) {
    const int n = channel.n_qubits();
    auto full = exact_reduced_operator_state(channel, join(range_list(n), c));
    const auto c_size = static_cast<int>(c.size());
    std::vector<double> table(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < table.size(); ++mask) {
        QubitList keep;
        for (int q = 0; q < n; ++q) {
            if (mask & (std::size_t{1} << q)) {
                keep.push_back(q);
            }
        }
        auto tail = positions(n, c_size);
        keep.insert(keep.end(), tail.begin(), tail.end());
        table[mask] = purity(partial_trace(full, keep));
    }
    return table;
}

SpreadingTable spreading_coefficients(const Channel &channel, const PauliString &mu) {
    const int n = channel.n_qubits();
    if (mu.n_qubits() != n) {
        throw std::invalid_argument("Pauli string length does not match the channel");
    }
    Matrix heis = channel.apply_adjoint(mu.to_matrix());
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    const double norm = std::ldexp(1.0, -n);
    SpreadingTable table{mu, std::vector<double>(count)};
    for (std::uint64_t i = 0; i < count; ++i) {
        table.coefficients[i] = norm * pauli_trace(PauliString::from_index(n, i), heis).real();
    }
    return table;
}

std::vector<double> dk_direct(const Channel &channel, const QubitList &c) {
    const int n = channel.n_qubits();
    if (c.empty()) {
        throw std::invalid_argument("output region C must be non-empty");
    }
    auto mus = paulis_supported_on(n, c);
    std::vector<int> weight(std::size_t{1} << (2 * n));
    for (std::size_t i = 0; i < weight.size(); ++i) {
        weight[i] = PauliString::from_index(n, i).weight();
    }
    std::vector<std::vector<double>> per_mu(mus.size(), std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
    parallel_for(mus.size(), [&](std::size_t i) {
        if (mus[i].weight() == 0) {
            return;
        }
        auto table = spreading_coefficients(channel, mus[i]);
        for (std::size_t v = 0; v < table.coefficients.size(); ++v) {
            per_mu[i][static_cast<std::size_t>(weight[v])] += table.coefficients[v] * table.coefficients[v];
        }
    });
    std::vector<double> dk(static_cast<std::size_t>(n + 1), 0.0);
    for (const auto &row : per_mu) {
        for (std::size_t k = 0; k < dk.size(); ++k) {
            dk[k] += row[k];
        }
    }
    const double norm = static_cast<double>(mus.size() - 1);
    for (double &v : dk) {
        v /= norm;
    }
    return dk;
}

// ---------------------------------------------------------------------------
// Haar baselines

namespace {

double haar_purity(int n, double q, int a, int b, int c, int d) {
    const double qn = std::pow(q, n);
    return (qn * (std::pow(q, b + d) + std::pow(q, a + c)) - (std::pow(q, a + d) + std::pow(q, b + c))) /
           (qn * (qn * qn - 1));
}

}  // namespace

HaarBaseline haar_baselines(int n, double q, const HaarSizes &s) {
    if (n < 1 || q < 2 || s.a < 0 || s.b < 0 || s.c < 0 || s.d < 0 || s.a + s.b != n || s.c + s.d != n) {
        throw std::invalid_argument("Haar region sizes must partition the N sites on each side");
    }
    HaarBaseline out;
    out.purity_ac = haar_purity(n, q, s.a, s.b, s.c, s.d);
    // Pure operator state: S(BC) = S(AD) and S(ABC) = S(D) = |D| log q.
    const double purity_ad = haar_purity(n, q, s.a, s.b, s.d, s.c);
    const double lq = std::log2(q);
    out.renyi2_mi = s.a * lq - std::log2(purity_ad) - s.d * lq;
    return out;
}

Matrix haar_random_unitary(int dim, CounterRng &rng) {
    if (dim < 1) {
        throw std::invalid_argument("unitary dimension must be positive");
    }
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            double re = rng.normal(), im = rng.normal();
            g(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix qm = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        Complex diag = r(j, j);
        double mag = std::abs(diag);
        qm.col(j) *= mag > 0 ? diag / mag : Complex(1);
    }
    return qm;
}

HaarSample haar_monte_carlo(int n, int a_size, int c_size, int samples, std::uint64_t seed) {
    if (samples < 2) {
        throw std::invalid_argument("Haar Monte Carlo needs at least two samples");
    }
    if (a_size < 0 || a_size > n || c_size < 0 || c_size > n) {
        throw std::invalid_argument("region sizes out of range");
    }
    std::vector<double> purities(static_cast<std::size_t>(samples)), mi(static_cast<std::size_t>(samples));
    const QubitList a = positions(0, a_size);
    const QubitList c = positions(0, c_size);
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
        auto rng = CounterRng::stream(seed, StreamTag::kTest, {0x4841u, s});
        Matrix u = haar_random_unitary(1 << n, rng);
        Channel ch(n, {LocalOp{KrausChannel::unitary(n, u), range_list(n)}});
        purities[s] = purity(exact_reduced_operator_state(ch, join(a, c)));
        mi[s] = exact_quantities(ch, a, c).renyi2_mi;
    });
    auto stats = [](const std::vector<double> &v, double &mean, double &sd) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    HaarSample out;
    out.samples = samples;
    stats(purities, out.mean_purity, out.std_purity);
    stats(mi, out.mean_renyi2_mi, out.std_renyi2_mi);
    return out;
}

// ---------------------------------------------------------------------------
// Variance bounds

SpectrumSummary SpectrumSummary::from_state(const DensityOperator &rho, int max_power) {
    SpectrumSummary s;
    s.region_size = rho.n_qubits();
    auto eig = rho.eigenvalues();
    s.norm_inf = eig.back();
    s.power_traces.assign(static_cast<std::size_t>(max_power + 1), 0.0);
    s.power_traces[0] = std::ldexp(1.0, s.region_size);
    for (int k = 1; k <= max_power; ++k) {
        double acc = 0;
        for (double l : eig) {
            acc += std::pow(std::max(l, 0.0), k);
        }
        s.power_traces[static_cast<std::size_t>(k)] = acc;
    }
    return s;
}

namespace {

double log_binomial(double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

}  // namespace

VarianceBound variance_bounds(int m, const SpectrumSummary &spectrum, std::int64_t circuits) {
    if (m < 1) {
        throw std::invalid_argument("moment order must be positive");
    }
    if (circuits < m) {
        throw std::invalid_argument("need at least m circuits");
    }
    if (static_cast<int>(spectrum.power_traces.size()) < 2 * m - 1) {
        throw std::invalid_argument("spectrum summary lacks Tr[rho^k] up to k = 2m - 2");
    }
    const double ac = spectrum.region_size;
    const auto big_m = static_cast<double>(circuits);
    VarianceBound out;
    for (int c = 1; c <= m; ++c) {
        double fact = std::tgamma(c);
        double tr = spectrum.power_traces[static_cast<std::size_t>(2 * m - 2 * c)];
        double s3 = std::pow(std::ldexp(1.0, c - 1) * std::pow(3.0, c), ac) * std::pow(spectrum.norm_inf, c) * tr /
                    (fact * fact);
        double s2 = std::ldexp(1.0, static_cast<int>((2 * c - 1) * spectrum.region_size)) * tr / (fact * fact);
        out.sigma2_3k.push_back(s3);
        out.sigma2_2k.push_back(s2);
        double weight = 0;
        if (big_m - m >= m - c) {
            weight = std::exp(log_binomial(m, c) + log_binomial(big_m - m, m - c) - log_binomial(big_m, m));
        }
        out.bound_3k += weight * s3;
        out.bound_2k += weight * s2;
    }
    out.bound = std::min(out.bound_3k, out.bound_2k);
    return out;
}

std::int64_t sample_complexity(int m, const SpectrumSummary &spectrum, double epsilon) {
    if (!(epsilon > 0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    const double target = epsilon * epsilon;
    std::int64_t hi = std::max<std::int64_t>(m, 2 * m - 1);
    while (variance_bounds(m, spectrum, hi).bound > target) {
        if (hi > (std::int64_t{1} << 52)) {
            throw std::overflow_error("sample complexity exceeds 2^52");
        }
        hi *= 2;
    }
    std::int64_t lo = std::max<std::int64_t>(m, hi / 2);
    if (variance_bounds(m, spectrum, lo).bound <= target) {
        return lo;
    }
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (variance_bounds(m, spectrum, mid).bound <= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double recovery_fidelity(double i2, int size_a) {
    if (!std::isfinite(i2)) {
        throw std::invalid_argument("I2 must be finite");
    }
    if (size_a < 0) {
        throw std::invalid_argument("|A| must be non-negative");
    }
    return std::exp2(i2 - 2.0 * size_a);
}

}  // namespace opshadow
