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

#ifndef OPSHADOW_CHANNEL_H
#define OPSHADOW_CHANNEL_H

#include <vector>

#include <Eigen/Dense>

#include "opshadow/qsim.h"

namespace opshadow {

/// A Kraus channel placed on specific qubits of a larger register.
struct LocalOp {
    KrausChannel channel;
    QubitList targets;
};

/// Time-ordered product of local channels; ops()[0] acts first.
class Channel {
  public:
    explicit Channel(int n_qubits);
    Channel(int n_qubits, std::vector<LocalOp> ops);

    void append(LocalOp op);
    /// Appends every op of `later` so that it acts after this channel.
    void append(const Channel &later);

    int n_qubits() const { return n_qubits_; }
    const std::vector<LocalOp> &ops() const { return ops_; }
    /// True when every op has a single Kraus operator.
    bool is_unitary() const;

    DensityOperator apply(const DensityOperator &rho) const;
    /// Only for unitary channels.
    StateVector apply(const StateVector &state) const;
    /// N applied to an arbitrary (not necessarily physical) operator.
    Matrix apply_to_operator(const Matrix &op) const;
    /// Heisenberg picture: N^dag[op] = sum_k K^dag op K, ops in reverse order.
    Matrix apply_adjoint(const Matrix &op) const;

    /// Full 2^n x 2^n unitary; throws std::logic_error for noisy channels.
    Matrix unitary() const;
    /// Full-register Kraus form. Unitary channels give a single operator; noisy
    /// ones multiply out every local Kraus set (guarded against blow-up).
    KrausChannel to_kraus(std::size_t max_operators = 4096) const;

  private:
    int n_qubits_;
    std::vector<LocalOp> ops_;
};

/// R(P, Q) = 2^{-n} Tr[P N(Q)] with rows/columns indexed by PauliString::index().
Eigen::MatrixXd pauli_transfer_matrix(const Channel &channel);

/// Transfer matrix of a k-qubit Kraus channel (4^k x 4^k).
Eigen::MatrixXd pauli_transfer_matrix(const KrausChannel &channel);

/// ptm <- R(later) ptm, applying the local transfer matrices of `later` one by one.
void compose_pauli_transfer(Eigen::MatrixXd &ptm, const Channel &later);

}  // namespace opshadow

#endif
