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

#include "opshadow/qsim.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace opshadow {

namespace {

std::size_t dim_of(int n_qubits) {
    return std::size_t{1} << n_qubits;
}

void check_qubit_count(int n_qubits) {
    if (n_qubits < 0 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count " + std::to_string(n_qubits) + " outside [0, " +
                                    std::to_string(kMaxQubits) + "]");
    }
}

std::uint64_t target_mask(std::span<const int> targets, int n_qubits) {
    std::uint64_t mask = 0;
    for (int q : targets) {
        if (q < 0 || q >= n_qubits) {
            throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for " +
                                        std::to_string(n_qubits) + " qubits");
        }
        std::uint64_t bit = std::uint64_t{1} << q;
        if (mask & bit) {
            throw std::invalid_argument("repeated qubit index " + std::to_string(q));
        }
        mask |= bit;
    }
    return mask;
}

// Offsets of the 2^k local basis states relative to a base index with all
// target bits cleared.
std::vector<std::uint64_t> local_offsets(std::span<const int> targets) {
    std::size_t k = targets.size();
    std::vector<std::uint64_t> offsets(std::size_t{1} << k, 0);
    for (std::size_t l = 0; l < offsets.size(); ++l) {
        for (std::size_t b = 0; b < k; ++b) {
            if ((l >> b) & 1) {
                offsets[l] |= std::uint64_t{1} << targets[b];
            }
        }
    }
    return offsets;
}

// Applies `op` to the index group of every base, reading and writing through
// `at(index) -> Complex&`.
template <typename At>
void for_each_group(std::size_t dim, std::uint64_t mask, const std::vector<std::uint64_t> &offsets,
                    const Matrix &op, At &&at) {
    std::size_t local = offsets.size();
    std::vector<Complex> in(local);
    for (std::uint64_t base = 0; base < dim; ++base) {
        if (base & mask) {
            continue;
        }
        for (std::size_t l = 0; l < local; ++l) {
            in[l] = at(base | offsets[l]);
        }
        for (std::size_t r = 0; r < local; ++r) {
            Complex acc = 0;
            for (std::size_t c = 0; c < local; ++c) {
                acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
            }
            at(base | offsets[r]) = acc;
        }
    }
}

void check_local_op(const Matrix &op, std::span<const int> targets) {
    Eigen::Index expect = Eigen::Index{1} << targets.size();
    if (op.rows() != expect || op.cols() != expect) {
        throw std::invalid_argument("operator of size " + std::to_string(op.rows()) + " does not act on " +
                                    std::to_string(targets.size()) + " qubits");
    }
}

int qubits_for_dim(Eigen::Index dim) {
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) {
        ++n;
    }
    if ((Eigen::Index{1} << n) != dim) {
        throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return n;
}

Matrix pauli2(int which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 0:
            m(0, 0) = 1;
            m(1, 1) = 1;
            break;
        case 1:
            m(0, 1) = 1;
            m(1, 0) = 1;
            break;
        case 2:
            m(0, 1) = Complex(0, -1);
            m(1, 0) = Complex(0, 1);
            break;
        default:
            m(0, 0) = 1;
            m(1, 1) = -1;
            break;
    }
    return m;
}

}  // namespace

bool is_unitary(const Matrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    return ((m.adjoint() * m) - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Matrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    if (m.size() == 0) {
        return true;
    }
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix kron(const Matrix &high, const Matrix &low) {
    Matrix out(high.rows() * low.rows(), high.cols() * low.cols());
    for (Eigen::Index i = 0; i < high.rows(); ++i) {
        for (Eigen::Index j = 0; j < high.cols(); ++j) {
            out.block(i * low.rows(), j * low.cols(), low.rows(), low.cols()) = high(i, j) * low;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubit_count(n_qubits);
    amplitudes_ = Vector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
    amplitudes_[0] = 1;
}

StateVector::StateVector(int n_qubits, Vector amplitudes) : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubit_count(n_qubits);
    if (static_cast<std::size_t>(amplitudes_.size()) != dim_of(n_qubits)) {
        throw std::invalid_argument("state vector length does not match 2^" + std::to_string(n_qubits));
    }
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
        throw std::domain_error("state vector is not normalized");
    }
}

StateVector StateVector::basis_state(int n_qubits, std::uint64_t index) {
    check_qubit_count(n_qubits);
    if (index >= dim_of(n_qubits)) {
        throw std::invalid_argument("basis index out of range");
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
    v[static_cast<Eigen::Index>(index)] = 1;
    return StateVector(n_qubits, std::move(v));
}

// ---------------------------------------------------------------------------
// GateMatrix

GateMatrix::GateMatrix(int arity, Matrix matrix) : arity_(arity), matrix_(std::move(matrix)) {
    if (arity != 1 && arity != 2) {
        throw std::invalid_argument("gate arity must be 1 or 2");
    }
    Eigen::Index d = Eigen::Index{1} << arity;
    if (matrix_.rows() != d || matrix_.cols() != d) {
        throw std::invalid_argument("gate matrix size does not match arity");
    }
    if (!is_unitary(matrix_)) {
        throw std::domain_error("gate matrix is not unitary");
    }
}

// ---------------------------------------------------------------------------
// KrausChannel

KrausChannel::KrausChannel(int n_qubits, std::vector<Matrix> operators)
    : n_qubits_(n_qubits), operators_(std::move(operators)) {
    check_qubit_count(n_qubits);
    if (operators_.empty()) {
        throw std::invalid_argument("Kraus channel needs at least one operator");
    }
    Eigen::Index d = static_cast<Eigen::Index>(dim_of(n_qubits));
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix &k : operators_) {
        if (k.rows() != d || k.cols() != d) {
            throw std::invalid_argument("Kraus operator size does not match 2^" + std::to_string(n_qubits));
        }
        sum += k.adjoint() * k;
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kKrausTolerance) {
        throw std::domain_error("Kraus operators violate completeness (sum K^dag K != I)");
    }
}

KrausChannel KrausChannel::unitary(int n_qubits, Matrix u) {
    return KrausChannel(n_qubits, {std::move(u)});
}

KrausChannel KrausChannel::identity(int n_qubits) {
    check_qubit_count(n_qubits);
    Eigen::Index d = static_cast<Eigen::Index>(dim_of(n_qubits));
    return KrausChannel(n_qubits, {Matrix::Identity(d, d)});
}

KrausChannel KrausChannel::depolarizing(int n_qubits, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("depolarizing probability must lie in [0, 1]");
    }
    if (n_qubits != 1 && n_qubits != 2) {
        throw std::invalid_argument("depolarizing channel supports 1 or 2 qubits");
    }
    std::vector<Matrix> ops;
    if (n_qubits == 1) {
        ops.push_back(std::sqrt(1.0 - 0.75 * p) * pauli2(0));
        if (p > 0) {
            for (int a = 1; a < 4; ++a) {
                ops.push_back(std::sqrt(p / 4.0) * pauli2(a));
            }
        }
    } else {
        ops.push_back(std::sqrt(1.0 - 15.0 * p / 16.0) * Matrix::Identity(4, 4));
        if (p > 0) {
            for (int hi = 0; hi < 4; ++hi) {
                for (int lo = 0; lo < 4; ++lo) {
                    if (hi == 0 && lo == 0) {
                        continue;
                    }
                    ops.push_back(std::sqrt(p / 16.0) * kron(pauli2(hi), pauli2(lo)));
                }
            }
        }
    }
    return KrausChannel(n_qubits, std::move(ops));
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(int n_qubits, Matrix matrix) : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
    check_qubit_count(n_qubits);
    Eigen::Index d = static_cast<Eigen::Index>(dim_of(n_qubits));
    if (matrix_.rows() != d || matrix_.cols() != d) {
        throw std::invalid_argument("density matrix size does not match 2^" + std::to_string(n_qubits));
    }
    if (!is_hermitian(matrix_)) {
        throw std::domain_error("density operator is not Hermitian");
    }
}

DensityOperator DensityOperator::from_state(const StateVector &state) {
    const Vector &v = state.amplitudes();
    return DensityOperator(state.n_qubits(), v * v.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int n_qubits) {
    check_qubit_count(n_qubits);
    Eigen::Index d = static_cast<Eigen::Index>(dim_of(n_qubits));
    return DensityOperator(n_qubits, Matrix::Identity(d, d) / static_cast<double>(d));
}

std::vector<double> DensityOperator::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
    const auto &ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

bool DensityOperator::is_physical() const {
    if (std::abs(trace() - 1.0) > 1e-10) {
        return false;
    }
    auto ev = eigenvalues();
    return ev.empty() || ev.front() >= -kPsdTolerance;
}

// ---------------------------------------------------------------------------
// Local application

void apply_local(Vector &v, const Matrix &op, std::span<const int> targets) {
    int n = qubits_for_dim(v.size());
    check_local_op(op, targets);
    std::uint64_t mask = target_mask(targets, n);
    auto offsets = local_offsets(targets);
    for_each_group(static_cast<std::size_t>(v.size()), mask, offsets, op,
                   [&](std::uint64_t i) -> Complex & { return v[static_cast<Eigen::Index>(i)]; });
}

void apply_local_left(Matrix &m, const Matrix &op, std::span<const int> targets) {
    int n = qubits_for_dim(m.rows());
    check_local_op(op, targets);
    std::uint64_t mask = target_mask(targets, n);
    auto offsets = local_offsets(targets);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for_each_group(static_cast<std::size_t>(m.rows()), mask, offsets, op,
                       [&](std::uint64_t i) -> Complex & { return m(static_cast<Eigen::Index>(i), c); });
    }
}

void apply_local_right_adjoint(Matrix &m, const Matrix &op, std::span<const int> targets) {
    int n = qubits_for_dim(m.cols());
    check_local_op(op, targets);
    std::uint64_t mask = target_mask(targets, n);
    auto offsets = local_offsets(targets);
    Matrix conj_op = op.conjugate();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for_each_group(static_cast<std::size_t>(m.cols()), mask, offsets, conj_op,
                       [&](std::uint64_t i) -> Complex & { return m(r, static_cast<Eigen::Index>(i)); });
    }
}

StateVector apply_gate(const StateVector &state, const GateMatrix &gate, std::span<const int> targets) {
    if (static_cast<int>(targets.size()) != gate.arity()) {
        throw std::invalid_argument("gate arity " + std::to_string(gate.arity()) + " does not match " +
                                    std::to_string(targets.size()) + " targets");
    }
    Vector v = state.amplitudes();
    target_mask(targets, state.n_qubits());
    apply_local(v, gate.matrix(), targets);
    // Renormalize away accumulated rounding so the norm invariant holds after
    // long gate sequences.
    v /= v.norm();
    return StateVector(state.n_qubits(), std::move(v));
}

DensityOperator evolve_density(const DensityOperator &rho, const KrausChannel &channel) {
    if (channel.n_qubits() != rho.n_qubits()) {
        throw std::invalid_argument("channel acts on " + std::to_string(channel.n_qubits()) +
                                    " qubits, density operator has " + std::to_string(rho.n_qubits()));
    }
    Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    for (const Matrix &k : channel.operators()) {
        out += k * rho.matrix() * k.adjoint();
    }
    out = (out + out.adjoint()) / 2.0;
    return DensityOperator(rho.n_qubits(), std::move(out));
}

DensityOperator evolve_density(const DensityOperator &rho, const KrausChannel &channel, std::span<const int> targets) {
    if (static_cast<int>(targets.size()) != channel.n_qubits()) {
        throw std::invalid_argument("channel arity does not match target count");
    }
    target_mask(targets, rho.n_qubits());
    Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    for (const Matrix &k : channel.operators()) {
        Matrix term = rho.matrix();
        apply_local_left(term, k, targets);
        apply_local_right_adjoint(term, k, targets);
        out += term;
    }
    out = (out + out.adjoint()) / 2.0;
    return DensityOperator(rho.n_qubits(), std::move(out));
}

// ---------------------------------------------------------------------------
// Partial operations

DensityOperator partial_trace(const DensityOperator &rho, std::span<const int> keep) {
    int n = rho.n_qubits();
    std::uint64_t keep_mask = target_mask(keep, n);
    std::size_t k = keep.size();
    Eigen::Index dk = Eigen::Index{1} << k;
    std::size_t d = rho.dim();
    // Compress the kept bits of an index into a k-bit local index.
    auto local = [&](std::uint64_t i) {
        std::uint64_t out = 0;
        for (std::size_t b = 0; b < k; ++b) {
            out |= ((i >> keep[b]) & 1) << b;
        }
        return static_cast<Eigen::Index>(out);
    };
    Matrix out = Matrix::Zero(dk, dk);
    const Matrix &m = rho.matrix();
    for (std::uint64_t i = 0; i < d; ++i) {
        Eigen::Index li = local(i);
        std::uint64_t rest = i & ~keep_mask;
        for (std::uint64_t j = 0; j < d; ++j) {
            if ((j & ~keep_mask) != rest) {
                continue;
            }
            out(li, local(j)) += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return DensityOperator(static_cast<int>(k), std::move(out));
}

DensityOperator partial_transpose(const DensityOperator &rho, std::span<const int> subset) {
    std::uint64_t mask = target_mask(subset, rho.n_qubits());
    const Matrix &m = rho.matrix();
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            auto ui = static_cast<std::uint64_t>(i);
            auto uj = static_cast<std::uint64_t>(j);
            std::uint64_t ti = (ui & ~mask) | (uj & mask);
            std::uint64_t tj = (uj & ~mask) | (ui & mask);
            out(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(tj)) = m(i, j);
        }
    }
    return DensityOperator(rho.n_qubits(), std::move(out));
}

// ---------------------------------------------------------------------------
// Spectra

double log_trace_norm(const DensityOperator &op) {
    double sum = 0;
    for (double ev : op.eigenvalues()) {
        sum += std::abs(ev);
    }
    return std::log2(sum);
}

double log_negativity(const DensityOperator &rho, std::span<const int> subset) {
    return log_trace_norm(partial_transpose(rho, subset));
}

SpectralFunctionals spectral_functionals(const DensityOperator &rho) {
    std::vector<double> ev = rho.eigenvalues();
    SpectralFunctionals out;
    double abs_sum = 0;
    for (double x : ev) {
        abs_sum += std::abs(x);
    }
    out.log_trace_norm = std::log2(abs_sum);
    for (double &x : ev) {
        if (x < -kPsdTolerance) {
            throw std::domain_error("operator has eigenvalue " + std::to_string(x) + " below -1e-9");
        }
        x = std::max(x, 0.0);
    }
    double p2 = 0, p3 = 0, vn = 0, top = 0;
    for (double x : ev) {
        p2 += x * x;
        p3 += x * x * x;
        top = std::max(top, x);
        if (x > 0) {
            vn -= x * std::log2(x);
        }
    }
    out.renyi2 = -std::log2(p2);
    out.renyi3 = -0.5 * std::log2(p3);
    out.renyi_inf = -std::log2(top);
    out.von_neumann = vn;
    return out;
}

}  // namespace opshadow
