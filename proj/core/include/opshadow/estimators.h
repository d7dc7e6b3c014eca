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

#ifndef OPSHADOW_ESTIMATORS_H
#define OPSHADOW_ESTIMATORS_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opshadow/qsim.h"
#include "opshadow/shadow.h"

namespace opshadow {

/// Input qubits A or B and output qubits C or D of the operator state.
/// Dense operators on a region put inputs[i] on bit i and outputs[k] on bit
/// inputs.size() + k.
struct Region {
    QubitList inputs;
    QubitList outputs;

    int size() const { return static_cast<int>(inputs.size() + outputs.size()); }
    /// Throws std::invalid_argument on out-of-range or repeated qubits.
    void validate(int n_qubits) const;
    /// 1-based, e.g. "in{1,2}out{3}".
    std::string str() const;
    bool operator==(const Region &) const = default;
};

/// Region with the given input and output qubits.
Region join(const QubitList &inputs, const QubitList &outputs);
/// Complement of `a` among the inputs of an n-qubit register.
QubitList complement(const QubitList &a, int n_qubits);

enum class Side { kInput, kOutput };

/// 3 (U|a><a|U^dag)^T - I on the input side (label already flipped by a_j),
/// 3 V^dag|b><b|V - I on the output side.
Matrix snapshot_factor(const SnapshotRecord &record, int qubit, Side side);

/// Tensor product of the factors on `region` (a 1x1 identity for an empty region).
Matrix reduced_snapshot(const SnapshotRecord &record, const Region &region);

struct MomentEstimate {
    int m = 2;
    bool transposed = false;
    double value = 0;
    /// Bootstrap standard deviation over circuits.
    double std_error = 0;
    double ci_low = 0;
    double ci_high = 0;
    Region region;
    QubitList transposed_inputs;
    /// One value per bootstrap resample; resample r is shared by every
    /// estimate drawn from the same ShadowEstimator.
    std::vector<double> replicates;
};

struct EstimatorOptions {
    int bootstrap = 200;
    std::uint64_t seed = 0;
    /// Apply the dataset's confusion matrices to output bits.
    bool mitigate = false;
    int workers = 0;
};

/// Moment U-statistics over per-circuit shot-averaged snapshots.
class ShadowEstimator {
  public:
    ShadowEstimator(const ShadowDataset &dataset, EstimatorOptions options = {});

    int n_qubits() const { return n_qubits_; }
    int circuits() const { return static_cast<int>(groups_.size()); }
    int timestep() const { return timestep_; }
    const EstimatorOptions &options() const { return options_; }

    /// Average of Tr[rho_1 ... rho_m] over ordered tuples of distinct
    /// circuits, each rho the circuit's shot-averaged reduced snapshot, with
    /// the listed input qubits partially transposed. m is 2 or 3.
    MomentEstimate moment(const Region &region, int m, const QubitList &transposed_inputs = {}) const;

    /// Shot-averaged (and optionally mitigated) weights over region bits for
    /// circuit c in canonical order.
    std::vector<double> region_weights(int c, const Region &region) const;
    /// Shot-averaged reduced snapshot of circuit c.
    Matrix circuit_snapshot(int c, const Region &region, const QubitList &transposed_inputs = {}) const;

  private:
    struct Group {
        SettingPair settings;
        /// (a_bits | b_bits << n, count), sorted by key.
        std::vector<std::pair<std::uint64_t, int>> counts;
        int shots = 0;
    };

    Eigen::MatrixXd gram(const Region &region) const;
    void finish(MomentEstimate &est, const std::vector<double> &num, const std::vector<double> &den) const;
    MomentEstimate third_moment(const Region &region, const QubitList &transposed_inputs) const;

    int n_qubits_;
    int timestep_;
    EstimatorOptions options_;
    std::vector<ConfusionMatrix> confusion_;
    std::vector<Group> groups_;
    /// Column 0 is the original sample (all ones); column r + 1 is bootstrap resample r.
    Eigen::MatrixXd multiplicity_;
};

MomentEstimate estimate_moment(const ShadowDataset &dataset, const Region &region, int m,
                               const QubitList &transposed_inputs = {}, const EstimatorOptions &options = {});

/// A quantity derived from several moments with a joint bootstrap.
struct DerivedEstimate {
    double value = 0;
    double std_error = 0;
    double ci_low = 0;
    double ci_high = 0;
    /// False when a purity or p3 estimate was not positive; value is NaN then.
    bool defined = true;
    /// I2 > |A| for renyi_mi, log2 R > 0 for negativity_ratio.
    bool above_threshold = false;
    std::vector<double> replicates;
};

/// I^(2)(A:BC) = |A| - log2 Tr[rho_BC^2] + log2 Tr[rho_ABC^2].
DerivedEstimate renyi_mi(const ShadowEstimator &est, const QubitList &a, const QubitList &c);
/// log2(p2^2 / p3) of rho_ABC partially transposed on A.
DerivedEstimate negativity_ratio(const ShadowEstimator &est, const QubitList &a, const QubitList &c);

/// D_k^C for k = 0..N from purities Tr[rho_{A C}^2] indexed by the bit mask of
/// A over the inputs. Entries for |A| > k_max may be NaN; any NaN needed is an error.
std::vector<double> dk_weights(int n_qubits, int c_size, const std::vector<double> &purity_by_mask,
                               int k_max = -1);
/// Running sums sum_{l <= k} D_l.
std::vector<double> cumulative(const std::vector<double> &dk);
/// D_k^C estimates with joint bootstrap errors, k = 0..N.
std::vector<DerivedEstimate> dk_estimates(const ShadowEstimator &est, const QubitList &c, bool cumulative_sums = false);

std::int64_t binomial(int n, int k);
/// sum_{m=i}^{j} (-1)^{j+m} C(j,m) C(m,i), which equals [i == j].
std::int64_t binomial_inversion_sum(int i, int j);

}  // namespace opshadow

#endif
