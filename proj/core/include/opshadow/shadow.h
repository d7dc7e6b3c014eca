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

#ifndef OPSHADOW_SHADOW_H
#define OPSHADOW_SHADOW_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opshadow/circuits.h"
#include "opshadow/pauli.h"
#include "opshadow/rng.h"

namespace opshadow {

/// Input state U_j|0> as a signed Pauli eigenstate.
enum class InputLabel : std::uint8_t { kPlusX, kMinusX, kPlusY, kMinusY, kPlusZ, kMinusZ };
/// Measured Pauli; V_j is I, H_X or H_Y for Z, X, Y.
enum class MeasBasis : std::uint8_t { kZ, kX, kY };

Pauli input_axis(InputLabel label);
/// +1 or -1.
int input_sign(InputLabel label);
/// Label with the sign flipped `flip` times (the effect of U_j on |1> instead of |0>).
InputLabel flip_label(InputLabel label, bool flip);
Pauli meas_axis(MeasBasis basis);

std::string_view label_name(InputLabel label);
std::string_view basis_name(MeasBasis basis);
InputLabel parse_input_label(std::string_view text);
MeasBasis parse_meas_basis(std::string_view text);

/// Single-qubit state vector of an input label.
Vector input_state(InputLabel label);
/// V_j: maps the eigenbasis of the measured Pauli onto the computational basis.
Matrix meas_rotation(MeasBasis basis);

struct SettingPair {
    std::vector<InputLabel> input;
    std::vector<MeasBasis> meas;
    bool operator==(const SettingPair &) const = default;
};

/// Per-qubit labels drawn i.i.d. uniform from their sets.
SettingPair sample_settings(CounterRng &rng, int n_qubits);

enum class ProtocolMode { kIdealOneShot, kRepeatedCircuit };

std::string_view mode_name(ProtocolMode mode);
ProtocolMode parse_mode(std::string_view text);

/// One shot. Bit j of a_bits / b_bits belongs to qubit j.
struct SnapshotRecord {
    int circuit_id = 0;
    int shot = 0;
    int timestep = 0;
    SettingPair settings;
    std::uint64_t a_bits = 0;
    std::uint64_t b_bits = 0;
    bool operator==(const SnapshotRecord &) const = default;
};

/// Column-stochastic 2x2 matrix: m(observed, prepared).
struct ConfusionMatrix {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    /// Calibration shots per column; 0 for an exact matrix.
    int shots = 0;

    double determinant() const { return m.determinant(); }
    /// |det| below max(1e-6, 5 / sqrt(shots)).
    bool singular() const;
    bool operator==(const ConfusionMatrix &) const = default;
};

class SingularConfusionError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct ShadowDataset {
    int n_qubits = 0;
    int timestep = 0;
    int m_u = 0;
    int m_s = 0;
    std::uint64_t seed = 0;
    ProtocolMode mode = ProtocolMode::kRepeatedCircuit;
    std::string circuit_model;
    std::optional<NoiseParams> noise;
    /// Per-qubit readout calibration; empty when no mitigation data was taken.
    std::vector<ConfusionMatrix> confusion;
    /// Ordered by (circuit_id, shot).
    std::vector<SnapshotRecord> records;

    /// Checks the M_U x M_S grouping, bit widths and shared settings per circuit.
    void validate() const;
};

struct ProtocolOptions {
    int m_u = 0;
    int m_s = 1;
    std::uint64_t seed = 0;
    ProtocolMode mode = ProtocolMode::kRepeatedCircuit;
    /// Channel noise is part of the compiled circuit; only readout flips are used here.
    std::optional<NoiseParams> noise;
    int workers = 0;
};

/// Outcome distributions p(b | a) of a fixed channel for arbitrary settings.
class OutcomeModel {
  public:
    explicit OutcomeModel(const Channel &channel);

    /// Model of `step` applied after this model's channel, reusing the
    /// already composed unitary or transfer matrix.
    OutcomeModel extended(const Channel &step) const;

    int n_qubits() const { return n_qubits_; }
    /// Column a holds the distribution over b for input product state
    /// of label_j flipped by a_j on every qubit j, measured in the given bases.
    Eigen::MatrixXd distributions(const SettingPair &settings) const;

  private:
    int n_qubits_;
    Channel channel_;
    std::optional<Matrix> unitary_;
    std::optional<Eigen::MatrixXd> ptm_;
};

/// Runs M_U circuits of M_S shots each on N_t. Ideal one-shot mode requires
/// M_S = 1 and prepares U_j|0>; repeated-circuit mode draws a uniformly per
/// shot and prepares U_j|a_j>.
ShadowDataset run_protocol(const CompiledCircuit &circuit, int t, const ProtocolOptions &options);
ShadowDataset run_protocol(const OutcomeModel &model, int t, const ProtocolOptions &options);

/// Estimates per-qubit confusion matrices by preparing |0> and |1> `shots`
/// times each under the readout model. Throws SingularConfusionError when a
/// matrix cannot be inverted reliably.
std::vector<ConfusionMatrix> calibrate_readout(const NoiseParams &noise, int n_qubits, int shots, std::uint64_t seed);

/// Exact confusion matrices of a readout model.
std::vector<ConfusionMatrix> exact_confusion(const NoiseParams &noise, int n_qubits);

/// Applies the tensor product of per-bit inverses to a table over 2^k
/// bitstrings (bit i of the index uses confusion[i]). Entries may come out
/// slightly negative.
std::vector<double> mitigate_counts(const std::vector<double> &frequencies, const std::vector<ConfusionMatrix> &confusion);
/// Forward map, the inverse of mitigate_counts.
std::vector<double> apply_confusion(const std::vector<double> &frequencies, const std::vector<ConfusionMatrix> &confusion);

inline constexpr std::string_view kShadowSchema = "opshadow.shadow/1";

/// One JSON object per line.
std::string dataset_to_jsonl(const ShadowDataset &dataset);
std::string dataset_meta_json(const ShadowDataset &dataset);
ShadowDataset dataset_from_json(std::string_view meta_json, std::string_view jsonl);

void write_dataset(const ShadowDataset &dataset, const std::filesystem::path &jsonl_path,
                   const std::filesystem::path &meta_path);
ShadowDataset read_dataset(const std::filesystem::path &jsonl_path, const std::filesystem::path &meta_path);

}  // namespace opshadow

#endif
