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

#include "opshadow/channel.h"

#include <stdexcept>
#include <string>

#include "opshadow/pauli.h"

namespace opshadow {

Channel::Channel(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 0 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("channel qubit count out of range");
    }
}

Channel::Channel(int n_qubits, std::vector<LocalOp> ops) : Channel(n_qubits) {
    for (auto &op : ops) {
        append(std::move(op));
    }
}

void Channel::append(LocalOp op) {
    if (static_cast<int>(op.targets.size()) != op.channel.n_qubits()) {
        throw std::invalid_argument("local op arity does not match its target list");
    }
    std::uint64_t seen = 0;
    for (int q : op.targets) {
        if (q < 0 || q >= n_qubits_) {
            throw std::invalid_argument("local op target " + std::to_string(q) + " out of range");
        }
        if (seen & (std::uint64_t{1} << q)) {
            throw std::invalid_argument("local op targets repeat a qubit");
        }
        seen |= std::uint64_t{1} << q;
    }
    ops_.push_back(std::move(op));
}

void Channel::append(const Channel &later) {
    if (later.n_qubits_ != n_qubits_) {
        throw std::invalid_argument("cannot concatenate channels on different registers");
    }
    ops_.insert(ops_.end(), later.ops_.begin(), later.ops_.end());
}

bool Channel::is_unitary() const {
    for (const auto &op : ops_) {
        if (!op.channel.is_unitary()) {
            return false;
        }
    }
    return true;
}

Matrix Channel::apply_to_operator(const Matrix &in) const {
    Matrix rho = in;
    for (const auto &op : ops_) {
        const auto &kraus = op.channel.operators();
        if (kraus.size() == 1) {
            apply_local_left(rho, kraus[0], op.targets);
            apply_local_right_adjoint(rho, kraus[0], op.targets);
            continue;
        }
        Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
        for (const Matrix &k : kraus) {
            Matrix term = rho;
            apply_local_left(term, k, op.targets);
            apply_local_right_adjoint(term, k, op.targets);
            acc += term;
        }
        rho = std::move(acc);
    }
    return rho;
}

DensityOperator Channel::apply(const DensityOperator &rho) const {
    if (rho.n_qubits() != n_qubits_) {
        throw std::invalid_argument("density operator register does not match channel");
    }
    Matrix out = apply_to_operator(rho.matrix());
    out = (out + out.adjoint()) / 2.0;
    return DensityOperator(n_qubits_, std::move(out));
}

StateVector Channel::apply(const StateVector &state) const {
    if (state.n_qubits() != n_qubits_) {
        throw std::invalid_argument("state register does not match channel");
    }
    if (!is_unitary()) {
        throw std::logic_error("state-vector evolution requires a unitary channel");
    }
    Vector v = state.amplitudes();
    for (const auto &op : ops_) {
        apply_local(v, op.channel.operators()[0], op.targets);
    }
    v /= v.norm();
    return StateVector(n_qubits_, std::move(v));
}

Matrix Channel::apply_adjoint(const Matrix &in) const {
    Matrix o = in;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        const auto &kraus = it->channel.operators();
        Matrix acc = Matrix::Zero(o.rows(), o.cols());
        for (const Matrix &k : kraus) {
            // term = K^dag o K
            Matrix kd = k.adjoint();
            Matrix term = o;
            apply_local_left(term, kd, it->targets);
            apply_local_right_adjoint(term, kd, it->targets);
            acc += term;
        }
        o = std::move(acc);
    }
    return o;
}

Matrix Channel::unitary() const {
    if (!is_unitary()) {
        throw std::logic_error("channel is not unitary");
    }
    Eigen::Index d = Eigen::Index{1} << n_qubits_;
    Matrix u = Matrix::Identity(d, d);
    for (const auto &op : ops_) {
        apply_local_left(u, op.channel.operators()[0], op.targets);
    }
    return u;
}

KrausChannel Channel::to_kraus(std::size_t max_operators) const {
    Eigen::Index d = Eigen::Index{1} << n_qubits_;
    std::vector<Matrix> current{Matrix::Identity(d, d)};
    for (const auto &op : ops_) {
        const auto &kraus = op.channel.operators();
        if (current.size() * kraus.size() > max_operators) {
            throw std::length_error("Kraus expansion exceeds " + std::to_string(max_operators) + " operators");
        }
        std::vector<Matrix> next;
        next.reserve(current.size() * kraus.size());
        for (const Matrix &k : kraus) {
            for (const Matrix &c : current) {
                Matrix m = c;
                apply_local_left(m, k, op.targets);
                next.push_back(std::move(m));
            }
        }
        current = std::move(next);
    }
    return KrausChannel(n_qubits_, std::move(current));
}

Eigen::MatrixXd pauli_transfer_matrix(const KrausChannel &channel) {
    int n = channel.n_qubits();
    std::uint64_t count = std::uint64_t{1} << (2 * n);
    double norm = 1.0 / static_cast<double>(std::uint64_t{1} << n);
    Eigen::MatrixXd ptm(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
    std::vector<PauliString> basis;
    basis.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        basis.push_back(PauliString::from_index(n, i));
    }
    for (std::uint64_t q = 0; q < count; ++q) {
        Matrix in = basis[q].to_matrix();
        Matrix evolved = Matrix::Zero(in.rows(), in.cols());
        for (const Matrix &k : channel.operators()) {
            evolved += k * in * k.adjoint();
        }
        for (std::uint64_t p = 0; p < count; ++p) {
            ptm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                norm * pauli_trace(basis[p], evolved).real();
        }
    }
    return ptm;
}

void compose_pauli_transfer(Eigen::MatrixXd &ptm, const Channel &later) {
    int n = later.n_qubits();
    auto count = static_cast<Eigen::Index>(std::uint64_t{1} << (2 * n));
    if (ptm.rows() != count) {
        throw std::invalid_argument("transfer matrix does not match the channel register");
    }
    for (const auto &op : later.ops()) {
        Eigen::MatrixXd local = pauli_transfer_matrix(op.channel);
        auto k = static_cast<int>(op.targets.size());
        auto block = static_cast<std::uint64_t>(local.rows());
        std::uint64_t target_digits = 0;
        std::vector<std::uint64_t> offset(block, 0);
        for (int i = 0; i < k; ++i) {
            target_digits |= std::uint64_t{3} << (2 * op.targets[static_cast<std::size_t>(i)]);
        }
        for (std::uint64_t p = 0; p < block; ++p) {
            for (int i = 0; i < k; ++i) {
                offset[p] |= ((p >> (2 * i)) & 3) << (2 * op.targets[static_cast<std::size_t>(i)]);
            }
        }
        Eigen::MatrixXd gathered(static_cast<Eigen::Index>(block), ptm.cols());
        for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(count); ++base) {
            if (base & target_digits) {
                continue;
            }
            for (std::uint64_t p = 0; p < block; ++p) {
                gathered.row(static_cast<Eigen::Index>(p)) = ptm.row(static_cast<Eigen::Index>(base | offset[p]));
            }
            Eigen::MatrixXd mixed = local * gathered;
            for (std::uint64_t p = 0; p < block; ++p) {
                ptm.row(static_cast<Eigen::Index>(base | offset[p])) = mixed.row(static_cast<Eigen::Index>(p));
            }
        }
    }
}

Eigen::MatrixXd pauli_transfer_matrix(const Channel &channel) {
    auto count = static_cast<Eigen::Index>(std::uint64_t{1} << (2 * channel.n_qubits()));
    Eigen::MatrixXd ptm = Eigen::MatrixXd::Identity(count, count);
    compose_pauli_transfer(ptm, channel);
    return ptm;
}

}  // namespace opshadow
