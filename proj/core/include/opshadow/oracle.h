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

#ifndef OPSHADOW_ORACLE_H
#define OPSHADOW_ORACLE_H

#include <cstdint>
#include <vector>

#include "opshadow/channel.h"
#include "opshadow/estimators.h"
#include "opshadow/pauli.h"
#include "opshadow/qsim.h"
#include "opshadow/rng.h"

namespace opshadow {

/// Largest region the dense oracle builds.
inline constexpr int kMaxOracleRegion = 12;

/// Reduced operator state of the channel's Choi state on `region` (inputs on
/// the low bits), assembled from the correlators 2^{-N} Tr[P^T N^dag(Q)].
DensityOperator exact_reduced_operator_state(const Channel &channel, const Region &region);

/// Full Choi state (1/2^N) sum_ij |i><j| (x) N(|i><j|), inputs on the low
/// bits. Dense in dimension 4^N, so only for small registers.
DensityOperator choi_state(const Channel &channel);

struct ExactQuantities {
    double purity_bc = 0;
    double purity_abc = 0;
    double renyi2_mi = 0;
    double renyi3_mi = 0;
    double von_neumann_mi = 0;
    /// Moments of rho_ABC partially transposed on A.
    double p2 = 0;
    double p3 = 0;
    double log2_ratio = 0;
    /// log2 || rho_ABC^{T_A} ||_1.
    double log_negativity = 0;
    /// Renyi-2 tripartite information I(A:C) + I(A:D) - I(A:CD).
    double tripartite2 = 0;
};

/// Hayden-Preskill quantities for input region A and output region C.
ExactQuantities exact_quantities(const Channel &channel, const QubitList &a, const QubitList &c);

/// I^(m)(X:Y) = S^(m)(X) + S^(m)(Y) - S^(m)(XY) for a joint state whose
/// first `x_size` bits form X. m = 1 gives the von Neumann version.
double mutual_information(const DensityOperator &joint, int x_size, int m);

/// Tr[rho_{A C}^2] for every input subset A (indexed by bit mask).
std::vector<double> exact_purity_table(const Channel &channel, const QubitList &c);

struct SpreadingTable {
    PauliString mu;
    /// c^{mu nu} indexed by PauliString::index() of nu.
    std::vector<double> coefficients;
};

/// c^{mu nu} = 2^{-N} Tr[sigma^nu N^dag(sigma^mu)].
SpreadingTable spreading_coefficients(const Channel &channel, const PauliString &mu);

/// D_k^C for k = 0..N: weight of evolved operators on strings of weight k,
/// averaged over the 4^{|C|} - 1 non-identity strings supported on C.
std::vector<double> dk_direct(const Channel &channel, const QubitList &c);

struct HaarSizes {
    int a = 1;
    int b = 0;
    int c = 1;
    int d = 0;
};

struct HaarBaseline {
    /// Haar average of Tr[rho_AC^2].
    double purity_ac = 0;
    /// log_2 q^{|A|+|C|} - log_2 of the averaged purity ratio, the
    /// annealed estimate of <I^(2)(A:BC)> in bits.
    double renyi2_mi = 0;
};

/// Closed-form Haar averages for N q-level sites split as |A|+|B| = |C|+|D| = N.
HaarBaseline haar_baselines(int n, double q, const HaarSizes &sizes);

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix.
Matrix haar_random_unitary(int dim, CounterRng &rng);

struct HaarSample {
    double mean_purity = 0;
    double std_purity = 0;
    double mean_renyi2_mi = 0;
    double std_renyi2_mi = 0;
    int samples = 0;
};

/// Exact Tr[rho_AC^2] and I^(2)(A:BC) over Haar-random unitaries on n qubits,
/// with A the first |A| inputs and C the first |C| outputs.
HaarSample haar_monte_carlo(int n, int a_size, int c_size, int samples, std::uint64_t seed);

/// What the variance bounds need from rho_AC.
struct SpectrumSummary {
    int region_size = 0;
    /// Largest eigenvalue.
    double norm_inf = 0;
    /// Tr[rho^k] for k = 0..max_power, with Tr[rho^0] = 2^{|AC|}.
    std::vector<double> power_traces;

    static SpectrumSummary from_state(const DensityOperator &rho, int max_power);
};

struct VarianceBound {
    /// sigma_c^2 bounds, c = 1..m.
    std::vector<double> sigma2_3k;
    std::vector<double> sigma2_2k;
    double bound_3k = 0;
    double bound_2k = 0;
    double bound = 0;
};

/// Bound on Var[theta_m] for M circuits: sum_c C(m,c) C(M-m,m-c) / C(M,m)
/// sigma_c^2, with sigma_c^2 from the 3^k ||rho||_inf inequality and from
/// the 2^k inequality. `bound` is the smaller of the two.
VarianceBound variance_bounds(int m, const SpectrumSummary &spectrum, std::int64_t circuits);

/// Smallest M with variance bound at most epsilon^2.
std::int64_t sample_complexity(int m, const SpectrumSummary &spectrum, double epsilon);

/// F = 2^{I2 - 2|A|}.
double recovery_fidelity(double i2, int size_a);

}  // namespace opshadow

#endif
