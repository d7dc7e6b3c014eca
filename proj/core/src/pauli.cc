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

#include "opshadow/pauli.h"

#include <bit>
#include <stdexcept>

namespace opshadow {

Matrix pauli_matrix(Pauli p) {
    Matrix m = Matrix::Zero(2, 2);
    switch (p) {
        case Pauli::I:
            m(0, 0) = 1;
            m(1, 1) = 1;
            break;
        case Pauli::X:
            m(0, 1) = 1;
            m(1, 0) = 1;
            break;
        case Pauli::Y:
            m(0, 1) = Complex(0, -1);
            m(1, 0) = Complex(0, 1);
            break;
        case Pauli::Z:
            m(0, 0) = 1;
            m(1, 1) = -1;
            break;
    }
    return m;
}

char pauli_char(Pauli p) {
    return "IXYZ"[static_cast<int>(p)];
}

PauliString::PauliString(std::vector<Pauli> word) : word_(std::move(word)) {
    if (word_.size() > static_cast<std::size_t>(kMaxQubits)) {
        throw std::invalid_argument("Pauli string longer than the simulator limit");
    }
}

PauliString PauliString::from_string(std::string_view text) {
    std::vector<Pauli> word;
    word.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case 'I':
            case '_':
                word.push_back(Pauli::I);
                break;
            case 'X':
                word.push_back(Pauli::X);
                break;
            case 'Y':
                word.push_back(Pauli::Y);
                break;
            case 'Z':
                word.push_back(Pauli::Z);
                break;
            default:
                throw std::invalid_argument(std::string("unknown Pauli letter '") + c + "'");
        }
    }
    return PauliString(std::move(word));
}

PauliString PauliString::from_index(int n_qubits, std::uint64_t index) {
    std::vector<Pauli> word(static_cast<std::size_t>(n_qubits));
    for (auto &p : word) {
        p = static_cast<Pauli>(index & 3);
        index >>= 2;
    }
    if (index != 0) {
        throw std::invalid_argument("Pauli index out of range");
    }
    return PauliString(std::move(word));
}

PauliString PauliString::identity(int n_qubits) {
    return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n_qubits), Pauli::I));
}

int PauliString::weight() const {
    int w = 0;
    for (Pauli p : word_) {
        w += p != Pauli::I;
    }
    return w;
}

std::uint64_t PauliString::index() const {
    std::uint64_t out = 0;
    for (std::size_t j = word_.size(); j-- > 0;) {
        out = (out << 2) | static_cast<std::uint64_t>(word_[j]);
    }
    return out;
}

std::uint64_t PauliString::flip_mask() const {
    std::uint64_t m = 0;
    for (std::size_t j = 0; j < word_.size(); ++j) {
        if (word_[j] == Pauli::X || word_[j] == Pauli::Y) {
            m |= std::uint64_t{1} << j;
        }
    }
    return m;
}

std::uint64_t PauliString::sign_mask() const {
    std::uint64_t m = 0;
    for (std::size_t j = 0; j < word_.size(); ++j) {
        if (word_[j] == Pauli::Z || word_[j] == Pauli::Y) {
            m |= std::uint64_t{1} << j;
        }
    }
    return m;
}

int PauliString::y_count() const {
    int c = 0;
    for (Pauli p : word_) {
        c += p == Pauli::Y;
    }
    return c;
}

bool PauliString::supported_within(std::uint64_t qubit_mask) const {
    for (std::size_t j = 0; j < word_.size(); ++j) {
        if (word_[j] != Pauli::I && !((qubit_mask >> j) & 1)) {
            return false;
        }
    }
    return true;
}

std::string PauliString::str() const {
    std::string s;
    s.reserve(word_.size());
    for (Pauli p : word_) {
        s.push_back(pauli_char(p));
    }
    return s;
}

namespace {

// P|x> = i^{#Y} (-1)^{|x & sign_mask|} |x ^ flip_mask>.
Complex base_phase(int y_count) {
    static const Complex powers[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    return powers[y_count & 3];
}

}  // namespace

Matrix PauliString::to_matrix() const {
    Eigen::Index d = Eigen::Index{1} << word_.size();
    Matrix m = Matrix::Zero(d, d);
    add_pauli(m, *this, 1.0);
    return m;
}

Complex pauli_trace(const PauliString &p, const Matrix &m) {
    std::uint64_t flip = p.flip_mask();
    std::uint64_t sign = p.sign_mask();
    Complex acc = 0;
    auto d = static_cast<std::uint64_t>(m.rows());
    for (std::uint64_t x = 0; x < d; ++x) {
        Complex v = m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x ^ flip));
        acc += (std::popcount(x & sign) & 1) ? -v : v;
    }
    return acc * base_phase(p.y_count());
}

void add_pauli(Matrix &m, const PauliString &p, Complex coeff) {
    std::uint64_t flip = p.flip_mask();
    std::uint64_t sign = p.sign_mask();
    Complex c = coeff * base_phase(p.y_count());
    auto d = static_cast<std::uint64_t>(m.rows());
    for (std::uint64_t x = 0; x < d; ++x) {
        Complex &entry = m(static_cast<Eigen::Index>(x ^ flip), static_cast<Eigen::Index>(x));
        entry += (std::popcount(x & sign) & 1) ? -c : c;
    }
}

std::vector<PauliString> paulis_supported_on(int n_qubits, std::span<const int> support) {
    std::size_t count = std::size_t{1} << (2 * support.size());
    std::vector<PauliString> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<Pauli> word(static_cast<std::size_t>(n_qubits), Pauli::I);
        for (std::size_t k = 0; k < support.size(); ++k) {
            int q = support[k];
            if (q < 0 || q >= n_qubits) {
                throw std::invalid_argument("support qubit out of range");
            }
            word[static_cast<std::size_t>(q)] = static_cast<Pauli>((c >> (2 * k)) & 3);
        }
        out.emplace_back(std::move(word));
    }
    return out;
}

}  // namespace opshadow
