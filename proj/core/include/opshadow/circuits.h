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

#ifndef OPSHADOW_CIRCUITS_H
#define OPSHADOW_CIRCUITS_H

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opshadow/channel.h"
#include "opshadow/qsim.h"

namespace opshadow {

/// Within a timestep: entangling layer then single-qubit layer, or the reverse.
enum class LayerOrder { kCnotFirst, kSingleFirst };

std::string_view layer_order_name(LayerOrder order);
LayerOrder parse_layer_order(std::string_view name);

struct CnotPair {
    int control = 0;
    int target = 0;
    bool operator==(const CnotPair &) const = default;
};

struct CircuitLayer {
    std::vector<CnotPair> cnots;
    /// W-gate index c_{j,t} in 1..4 for every qubit j.
    std::vector<int> choices;
    bool operator==(const CircuitLayer &) const = default;
};

/// Layered CNOT + W-gate program. layers[t - 1] is timestep t.
struct CircuitSpec {
    std::string model = "custom";
    int n_qubits = 0;
    int timesteps = 0;
    std::uint64_t seed = 0;
    LayerOrder layer_order = LayerOrder::kCnotFirst;
    std::vector<CircuitLayer> layers;

    /// Throws std::invalid_argument on overlapping CNOTs, bad indices or
    /// choices outside 1..4.
    void validate() const;
    bool operator==(const CircuitSpec &) const = default;
};

struct ReadoutError {
    double p1_given_0 = 0;
    double p0_given_1 = 0;
    bool operator==(const ReadoutError &) const = default;
};

struct NoiseParams {
    /// Depolarizing strength after each single-qubit gate.
    double p1 = 0;
    /// Two-qubit depolarizing strength after each CNOT.
    double p2 = 0;
    /// Empty: ideal readout. One entry: shared by all qubits. Otherwise one per qubit.
    std::vector<ReadoutError> readout;

    /// p1 = 0.001, p2 = 0.01, symmetric readout flips of 0.02.
    static NoiseParams defaults();

    void validate(int n_qubits) const;
    ReadoutError readout_for(int qubit) const;
    bool has_readout_error() const;
    bool operator==(const NoiseParams &) const = default;
};

GateMatrix x_gate();
GateMatrix sqrt_x_gate();
/// exp(-i theta Z / 2).
GateMatrix rz_gate(double theta);
GateMatrix hadamard_gate();
/// Local bit 0 is the control, bit 1 the target.
GateMatrix cnot_gate();

/// W_1 = R sqrt(X) R^dag, W_2 = R X R^dag, W_3 = sqrt(X) R sqrt(X),
/// W_4 = sqrt(X) R^dag sqrt(X), with R = exp(-i pi Z / 8).
GateMatrix w_gate(int c);

/// Brickwork chain: odd t couples (0,1),(2,3),..., even t couples (1,2),(3,4),...
/// (control first). c_{j,t} is keyed by (seed, t, j), so circuits built with a
/// larger `timesteps` extend shorter ones.
CircuitSpec build_brickwork(int timesteps, std::uint64_t seed, int n_qubits = 5,
                            LayerOrder order = LayerOrder::kCnotFirst);

/// Three CNOT layers on a 7-qubit device graph, used periodically.
struct LadderLayout {
    std::array<std::vector<CnotPair>, 3> layers;
    /// Undirected device couplings.
    std::vector<std::pair<int, int>> edges;

    /// Heavy-hex fragment 0-1, 1-2, 1-3, 3-5, 4-5, 5-6 with every coupling
    /// used exactly once across the three layers.
    static LadderLayout lagos_default();

    /// Rejects pairs off the device graph, overlapping pairs in a layer and
    /// layer sets whose union does not connect all 7 qubits.
    void validate() const;
    bool operator==(const LadderLayout &) const = default;
};

/// Timestep t uses layout.layers[(t - 1) % 3]; single-qubit gates come first by default.
CircuitSpec build_ladder7(int timesteps, std::uint64_t seed, const LadderLayout &layout = LadderLayout::lagos_default(),
                          LayerOrder order = LayerOrder::kSingleFirst);

/// Per-timestep channels of a circuit.
class CompiledCircuit {
  public:
    CompiledCircuit(int n_qubits, std::vector<Channel> steps);

    int n_qubits() const { return n_qubits_; }
    int timesteps() const { return static_cast<int>(steps_.size()); }
    /// Channel of timestep t (1-based).
    const Channel &step(int t) const;
    /// N_t: timesteps 1..t composed; t = 0 is the identity.
    Channel prefix(int t) const;
    bool is_unitary() const;

  private:
    int n_qubits_;
    std::vector<Channel> steps_;
};

/// Without noise every step is a product of unitaries. With noise a
/// depolarizing channel of strength p1 follows each W gate and a two-qubit
/// depolarizing channel of strength p2 follows each CNOT (zero strengths are
/// omitted). Readout errors are not part of the channel.
CompiledCircuit compile_channel(const CircuitSpec &spec, const std::optional<NoiseParams> &noise = std::nullopt);

inline constexpr std::string_view kCircuitSchema = "opshadow.circuit/1";

std::string circuit_to_json(const CircuitSpec &spec);
CircuitSpec circuit_from_json(std::string_view text);

std::string noise_to_json(const NoiseParams &noise);
NoiseParams noise_from_json(std::string_view text);

}  // namespace opshadow

#endif
