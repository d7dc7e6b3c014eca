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

#ifndef OPSHADOW_PAULI_H
#define OPSHADOW_PAULI_H

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opshadow/qsim.h"

namespace opshadow {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

Matrix pauli_matrix(Pauli p);
char pauli_char(Pauli p);

/// Phase-free Pauli word; letter j acts on qubit j.
class PauliString {
  public:
    explicit PauliString(std::vector<Pauli> word);

    /// Parses "IXYZ"-style text (also accepts '_' for identity).
    static PauliString from_string(std::string_view text);
    /// Inverse of index(): base-4 digits, qubit 0 least significant.
    static PauliString from_index(int n_qubits, std::uint64_t index);
    static PauliString identity(int n_qubits);

    int n_qubits() const { return static_cast<int>(word_.size()); }
    Pauli operator[](int qubit) const { return word_[static_cast<std::size_t>(qubit)]; }
    const std::vector<Pauli> &word() const { return word_; }

    /// Number of non-identity letters.
    int weight() const;
    std::uint64_t index() const;
    /// Qubits carrying X or Y (bit flips).
    std::uint64_t flip_mask() const;
    /// Qubits carrying Y or Z (phase-sign contributions).
    std::uint64_t sign_mask() const;
    int y_count() const;
    /// True if every non-identity letter lies inside `qubit_mask`.
    bool supported_within(std::uint64_t qubit_mask) const;

    std::string str() const;
    Matrix to_matrix() const;

    bool operator==(const PauliString &other) const = default;

  private:
    std::vector<Pauli> word_;
};

/// Tr[P m] in O(2^n).
Complex pauli_trace(const PauliString &p, const Matrix &m);
/// m += coeff * P in O(2^n).
void add_pauli(Matrix &m, const PauliString &p, Complex coeff);

/// All 4^|support| strings on n qubits acting as identity outside `support`,
/// ordered by the base-4 counter over `support` (support[0] fastest).
std::vector<PauliString> paulis_supported_on(int n_qubits, std::span<const int> support);

}  // namespace opshadow

#endif
