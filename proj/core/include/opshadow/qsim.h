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

#ifndef OPSHADOW_QSIM_H
#define OPSHADOW_QSIM_H

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace opshadow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Qubits are 0-based and little-endian: qubit j is bit j of a basis index.
using QubitList = std::vector<int>;

/// Largest register the dense simulator accepts.
inline constexpr int kMaxQubits = 16;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kKrausTolerance = 1e-8;
/// Eigenvalues in [-kPsdTolerance, 0] are treated as zero.
inline constexpr double kPsdTolerance = 1e-9;

class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(int n_qubits);
    /// Throws std::invalid_argument on a length mismatch and std::domain_error
    /// if the amplitudes are not normalized.
    StateVector(int n_qubits, Vector amplitudes);

    static StateVector basis_state(int n_qubits, std::uint64_t index);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    const Vector &amplitudes() const { return amplitudes_; }
    Complex operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }

  private:
    int n_qubits_;
    Vector amplitudes_;
};

/// A unitary acting on one or two qubits.
class GateMatrix {
  public:
    GateMatrix(int arity, Matrix matrix);

    int arity() const { return arity_; }
    const Matrix &matrix() const { return matrix_; }

  private:
    int arity_;
    Matrix matrix_;
};

/// Completely positive trace-preserving map in Kraus form.
class KrausChannel {
  public:
    /// Validates sizes and completeness (sum K^dag K = I within kKrausTolerance).
    KrausChannel(int n_qubits, std::vector<Matrix> operators);

    static KrausChannel unitary(int n_qubits, Matrix u);
    static KrausChannel identity(int n_qubits);
    /// rho -> (1-p) rho + p I/2^n, on n = 1 or 2 qubits.
    static KrausChannel depolarizing(int n_qubits, double p);

    int n_qubits() const { return n_qubits_; }
    const std::vector<Matrix> &operators() const { return operators_; }
    bool is_unitary() const { return operators_.size() == 1; }

  private:
    int n_qubits_;
    std::vector<Matrix> operators_;
};

class DensityOperator {
  public:
    /// Checks the dimension and Hermiticity. Trace and positivity are not
    /// enforced here (snapshot operators are not positive); see is_physical().
    DensityOperator(int n_qubits, Matrix matrix);

    static DensityOperator from_state(const StateVector &state);
    static DensityOperator maximally_mixed(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix &matrix() const { return matrix_; }
    double trace() const { return matrix_.trace().real(); }

    /// Trace one within 1e-10 and no eigenvalue below -kPsdTolerance.
    bool is_physical() const;
    /// Sorted ascending.
    std::vector<double> eigenvalues() const;

  private:
    int n_qubits_;
    Matrix matrix_;
};

StateVector apply_gate(const StateVector &state, const GateMatrix &gate, std::span<const int> targets);

/// rho -> sum_k K rho K^dag for a channel on the full register.
DensityOperator evolve_density(const DensityOperator &rho, const KrausChannel &channel);
/// Same, with the channel acting on `targets` (local bit k is qubit targets[k]).
DensityOperator evolve_density(const DensityOperator &rho, const KrausChannel &channel, std::span<const int> targets);

/// Reduced operator on `keep`; qubit keep[i] becomes bit i of the result.
/// An empty `keep` yields the 1x1 matrix holding the trace.
DensityOperator partial_trace(const DensityOperator &rho, std::span<const int> keep);

/// Transpose in the computational basis on the qubits in `subset`.
DensityOperator partial_transpose(const DensityOperator &rho, std::span<const int> subset);

struct SpectralFunctionals {
    double renyi2 = 0;
    double renyi3 = 0;
    double renyi_inf = 0;
    double von_neumann = 0;
    /// log2 of sum |lambda|; the log-negativity when the input was partially transposed.
    double log_trace_norm = 0;
};

/// Base-2 entropies. Throws std::domain_error for inputs with an eigenvalue
/// below -kPsdTolerance.
SpectralFunctionals spectral_functionals(const DensityOperator &rho);

/// log2 sum |lambda| of an (already partially transposed) Hermitian operator.
double log_trace_norm(const DensityOperator &op);
/// log2 || rho^{T_subset} ||_1.
double log_negativity(const DensityOperator &rho, std::span<const int> subset);

/// m <- (op on targets) m. `op` is 2^k x 2^k with k = targets.size().
void apply_local_left(Matrix &m, const Matrix &op, std::span<const int> targets);
/// m <- m (op on targets)^dag.
void apply_local_right_adjoint(Matrix &m, const Matrix &op, std::span<const int> targets);
void apply_local(Vector &v, const Matrix &op, std::span<const int> targets);

/// Kronecker product; `low` occupies the low bits of the result index.
Matrix kron(const Matrix &high, const Matrix &low);

bool is_unitary(const Matrix &m, double tol = kUnitaryTolerance);
bool is_hermitian(const Matrix &m, double tol = kHermitianTolerance);

}  // namespace opshadow

#endif
