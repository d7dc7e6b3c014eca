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

#include "opshadow/circuits.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "opshadow/rng.h"

namespace opshadow {

using nlohmann::json;

std::string_view layer_order_name(LayerOrder order) {
    return order == LayerOrder::kCnotFirst ? "cnot_first" : "single_first";
}

LayerOrder parse_layer_order(std::string_view name) {
    if (name == "cnot_first") {
        return LayerOrder::kCnotFirst;
    }
    if (name == "single_first") {
        return LayerOrder::kSingleFirst;
    }
    throw std::invalid_argument("unknown layer order '" + std::string(name) + "'");
}

void CircuitSpec::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("circuit qubit count out of range");
    }
    if (timesteps < 0 || static_cast<int>(layers.size()) != timesteps) {
        throw std::invalid_argument("circuit layer count does not match timesteps");
    }
    for (std::size_t t = 0; t < layers.size(); ++t) {
        const auto &layer = layers[t];
        if (static_cast<int>(layer.choices.size()) != n_qubits) {
            throw std::invalid_argument("timestep " + std::to_string(t + 1) + " lacks a W choice per qubit");
        }
        for (int c : layer.choices) {
            if (c < 1 || c > 4) {
                throw std::invalid_argument("W choice " + std::to_string(c) + " outside 1..4");
            }
        }
        std::uint64_t used = 0;
        for (const auto &pair : layer.cnots) {
            for (int q : {pair.control, pair.target}) {
                if (q < 0 || q >= n_qubits) {
                    throw std::invalid_argument("CNOT qubit out of range at timestep " + std::to_string(t + 1));
                }
                if (used & (std::uint64_t{1} << q)) {
                    throw std::invalid_argument("overlapping CNOTs at timestep " + std::to_string(t + 1));
                }
                used |= std::uint64_t{1} << q;
            }
        }
    }
}

NoiseParams NoiseParams::defaults() {
    NoiseParams p;
    p.p1 = 0.001;
    p.p2 = 0.01;
    p.readout = {ReadoutError{0.02, 0.02}};
    return p;
}

void NoiseParams::validate(int n_qubits) const {
    auto check = [](double p, const char *what) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
        }
    };
    check(p1, "p1");
    check(p2, "p2");
    for (const auto &r : readout) {
        check(r.p1_given_0, "readout p(1|0)");
        check(r.p0_given_1, "readout p(0|1)");
    }
    if (readout.size() > 1 && static_cast<int>(readout.size()) != n_qubits) {
        throw std::invalid_argument("readout needs one entry or one per qubit");
    }
}

ReadoutError NoiseParams::readout_for(int qubit) const {
    if (readout.empty()) {
        return {};
    }
    if (readout.size() == 1) {
        return readout.front();
    }
    return readout.at(static_cast<std::size_t>(qubit));
}

bool NoiseParams::has_readout_error() const {
    for (const auto &r : readout) {
        if (r.p1_given_0 > 0 || r.p0_given_1 > 0) {
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Gates

GateMatrix x_gate() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return GateMatrix(1, m);
}

GateMatrix sqrt_x_gate() {
    Matrix m(2, 2);
    Complex a(0.5, 0.5), b(0.5, -0.5);
    m << a, b, b, a;
    return GateMatrix(1, m);
}

GateMatrix rz_gate(double theta) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -theta / 2);
    m(1, 1) = std::polar(1.0, theta / 2);
    return GateMatrix(1, m);
}

GateMatrix hadamard_gate() {
    Matrix m(2, 2);
    double s = 1.0 / std::numbers::sqrt2;
    m << s, s, s, -s;
    return GateMatrix(1, m);
}

GateMatrix cnot_gate() {
    Matrix m = Matrix::Zero(4, 4);
    // index = control + 2 * target
    m(0, 0) = 1;
    m(3, 1) = 1;
    m(2, 2) = 1;
    m(1, 3) = 1;
    return GateMatrix(2, m);
}

GateMatrix w_gate(int c) {
    const Matrix r = rz_gate(std::numbers::pi / 4).matrix();
    const Matrix rd = r.adjoint();
    const Matrix sx = sqrt_x_gate().matrix();
    const Matrix x = x_gate().matrix();
    switch (c) {
        case 1:
            return GateMatrix(1, r * sx * rd);
        case 2:
            return GateMatrix(1, r * x * rd);
        case 3:
            return GateMatrix(1, sx * r * sx);
        case 4:
            return GateMatrix(1, sx * rd * sx);
        default:
            throw std::invalid_argument("W gate index " + std::to_string(c) + " outside 1..4");
    }
}

// ---------------------------------------------------------------------------
// Builders

namespace {

std::vector<int> draw_choices(std::uint64_t seed, int t, int n_qubits) {
    std::vector<int> choices(static_cast<std::size_t>(n_qubits));
    for (int j = 0; j < n_qubits; ++j) {
        auto rng = CounterRng::stream(seed, StreamTag::kCircuitChoice,
                                      {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j)});
        choices[static_cast<std::size_t>(j)] = 1 + static_cast<int>(rng.uniform_int(4));
    }
    return choices;
}

}  // namespace

CircuitSpec build_brickwork(int timesteps, std::uint64_t seed, int n_qubits, LayerOrder order) {
    if (timesteps < 0) {
        throw std::invalid_argument("timesteps must be non-negative");
    }
    if (n_qubits < 2) {
        throw std::invalid_argument("brickwork needs at least two qubits");
    }
    CircuitSpec spec;
    spec.model = n_qubits == 5 ? "brickwork5" : "brickwork";
    spec.n_qubits = n_qubits;
    spec.timesteps = timesteps;
    spec.seed = seed;
    spec.layer_order = order;
    for (int t = 1; t <= timesteps; ++t) {
        CircuitLayer layer;
        // 1-based pairs (2j-1, 2j) on odd t and (2j, 2j+1) on even t.
        for (int q = (t % 2 == 1) ? 0 : 1; q + 1 < n_qubits; q += 2) {
            layer.cnots.push_back({q, q + 1});
        }
        layer.choices = draw_choices(seed, t, n_qubits);
        spec.layers.push_back(std::move(layer));
    }
    spec.validate();
    return spec;
}

LadderLayout LadderLayout::lagos_default() {
    LadderLayout layout;
    layout.edges = {{0, 1}, {1, 2}, {1, 3}, {3, 5}, {4, 5}, {5, 6}};
    layout.layers[0] = {{1, 0}, {5, 3}};
    layout.layers[1] = {{1, 2}, {5, 4}};
    layout.layers[2] = {{1, 3}, {5, 6}};
    return layout;
}

void LadderLayout::validate() const {
    constexpr int n = 7;
    auto is_edge = [&](int a, int b) {
        for (const auto &[u, v] : edges) {
            if ((u == a && v == b) || (u == b && v == a)) {
                return true;
            }
        }
        return false;
    };
    std::array<int, n> parent{};
    for (int i = 0; i < n; ++i) {
        parent[static_cast<std::size_t>(i)] = i;
    }
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::uint64_t used = 0;
        for (const auto &pair : layers[l]) {
            if (pair.control < 0 || pair.control >= n || pair.target < 0 || pair.target >= n) {
                throw std::invalid_argument("ladder layout qubit out of range");
            }
            if (!is_edge(pair.control, pair.target)) {
                throw std::invalid_argument("ladder layout pair (" + std::to_string(pair.control) + "," +
                                            std::to_string(pair.target) + ") is not a device coupling");
            }
            for (int q : {pair.control, pair.target}) {
                if (used & (std::uint64_t{1} << q)) {
                    throw std::invalid_argument("ladder layout layer " + std::to_string(l) + " overlaps");
                }
                used |= std::uint64_t{1} << q;
            }
            parent[static_cast<std::size_t>(find(pair.control))] = find(pair.target);
        }
    }
    for (int q = 1; q < n; ++q) {
        if (find(q) != find(0)) {
            throw std::invalid_argument("ladder layout layers do not connect all qubits");
        }
    }
}

CircuitSpec build_ladder7(int timesteps, std::uint64_t seed, const LadderLayout &layout, LayerOrder order) {
    if (timesteps < 0) {
        throw std::invalid_argument("timesteps must be non-negative");
    }
    layout.validate();
    CircuitSpec spec;
    spec.model = "ladder7";
    spec.n_qubits = 7;
    spec.timesteps = timesteps;
    spec.seed = seed;
    spec.layer_order = order;
    for (int t = 1; t <= timesteps; ++t) {
        CircuitLayer layer;
        layer.cnots = layout.layers[static_cast<std::size_t>((t - 1) % 3)];
        layer.choices = draw_choices(seed, t, 7);
        spec.layers.push_back(std::move(layer));
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Compilation

CompiledCircuit::CompiledCircuit(int n_qubits, std::vector<Channel> steps)
    : n_qubits_(n_qubits), steps_(std::move(steps)) {
    for (const auto &s : steps_) {
        if (s.n_qubits() != n_qubits_) {
            throw std::invalid_argument("compiled step register mismatch");
        }
    }
}

const Channel &CompiledCircuit::step(int t) const {
    if (t < 1 || t > timesteps()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside 1.." + std::to_string(timesteps()));
    }
    return steps_[static_cast<std::size_t>(t - 1)];
}

Channel CompiledCircuit::prefix(int t) const {
    if (t < 0 || t > timesteps()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside 0.." + std::to_string(timesteps()));
    }
    Channel out(n_qubits_);
    for (int s = 1; s <= t; ++s) {
        out.append(step(s));
    }
    return out;
}

bool CompiledCircuit::is_unitary() const {
    for (const auto &s : steps_) {
        if (!s.is_unitary()) {
            return false;
        }
    }
    return true;
}

CompiledCircuit compile_channel(const CircuitSpec &spec, const std::optional<NoiseParams> &noise) {
    spec.validate();
    if (noise) {
        noise->validate(spec.n_qubits);
    }
    const KrausChannel cnot = KrausChannel::unitary(2, cnot_gate().matrix());
    std::array<KrausChannel, 4> w = {
        KrausChannel::unitary(1, w_gate(1).matrix()), KrausChannel::unitary(1, w_gate(2).matrix()),
        KrausChannel::unitary(1, w_gate(3).matrix()), KrausChannel::unitary(1, w_gate(4).matrix())};
    std::optional<KrausChannel> dep1, dep2;
    if (noise && noise->p1 > 0) {
        dep1 = KrausChannel::depolarizing(1, noise->p1);
    }
    if (noise && noise->p2 > 0) {
        dep2 = KrausChannel::depolarizing(2, noise->p2);
    }

    std::vector<Channel> steps;
    for (const auto &layer : spec.layers) {
        Channel step(spec.n_qubits);
        auto entangling = [&] {
            for (const auto &pair : layer.cnots) {
                step.append({cnot, {pair.control, pair.target}});
                if (dep2) {
                    step.append({*dep2, {pair.control, pair.target}});
                }
            }
        };
        auto singles = [&] {
            for (int j = 0; j < spec.n_qubits; ++j) {
                step.append({w[static_cast<std::size_t>(layer.choices[static_cast<std::size_t>(j)] - 1)], {j}});
                if (dep1) {
                    step.append({*dep1, {j}});
                }
            }
        };
        if (spec.layer_order == LayerOrder::kCnotFirst) {
            entangling();
            singles();
        } else {
            singles();
            entangling();
        }
        steps.push_back(std::move(step));
    }
    return CompiledCircuit(spec.n_qubits, std::move(steps));
}

// ---------------------------------------------------------------------------
// JSON

std::string circuit_to_json(const CircuitSpec &spec) {
    json doc;
    doc["schema"] = kCircuitSchema;
    doc["model"] = spec.model;
    doc["n_qubits"] = spec.n_qubits;
    doc["t"] = spec.timesteps;
    doc["seed"] = spec.seed;
    doc["layer_order"] = layer_order_name(spec.layer_order);
    doc["qubit_indexing"] = "zero_based";
    json c = json::array();
    json cnots = json::array();
    for (const auto &layer : spec.layers) {
        c.push_back(layer.choices);
        json pairs = json::array();
        for (const auto &p : layer.cnots) {
            pairs.push_back({p.control, p.target});
        }
        cnots.push_back(std::move(pairs));
    }
    doc["c"] = std::move(c);
    doc["cnots"] = std::move(cnots);
    return doc.dump(2);
}

CircuitSpec circuit_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
        if (doc.at("schema").get<std::string>() != kCircuitSchema) {
            throw std::invalid_argument("unsupported circuit schema '" + doc.at("schema").get<std::string>() + "'");
        }
        CircuitSpec spec;
        spec.model = doc.at("model").get<std::string>();
        spec.n_qubits = doc.at("n_qubits").get<int>();
        spec.timesteps = doc.at("t").get<int>();
        spec.seed = doc.at("seed").get<std::uint64_t>();
        spec.layer_order = parse_layer_order(doc.at("layer_order").get<std::string>());
        const auto &c = doc.at("c");
        const auto &cnots = doc.at("cnots");
        if (c.size() != cnots.size()) {
            throw std::invalid_argument("circuit tables 'c' and 'cnots' differ in length");
        }
        for (std::size_t t = 0; t < c.size(); ++t) {
            CircuitLayer layer;
            layer.choices = c[t].get<std::vector<int>>();
            for (const auto &pair : cnots[t]) {
                layer.cnots.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
            }
            spec.layers.push_back(std::move(layer));
        }
        spec.validate();
        return spec;
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("malformed circuit JSON: ") + e.what());
    }
}

std::string noise_to_json(const NoiseParams &noise) {
    json doc;
    doc["p1"] = noise.p1;
    doc["p2"] = noise.p2;
    json readout = json::array();
    for (const auto &r : noise.readout) {
        readout.push_back({{"p1_given_0", r.p1_given_0}, {"p0_given_1", r.p0_given_1}});
    }
    doc["readout"] = std::move(readout);
    return doc.dump();
}

NoiseParams noise_from_json(std::string_view text) {
    try {
        json doc = json::parse(text);
        NoiseParams noise;
        noise.p1 = doc.value("p1", 0.0);
        noise.p2 = doc.value("p2", 0.0);
        if (doc.contains("readout")) {
            const auto &r = doc.at("readout");
            if (r.is_number()) {
                double p = r.get<double>();
                noise.readout = {ReadoutError{p, p}};
            } else {
                for (const auto &entry : r) {
                    noise.readout.push_back(
                        ReadoutError{entry.at("p1_given_0").get<double>(), entry.at("p0_given_1").get<double>()});
                }
            }
        }
        return noise;
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("malformed noise JSON: ") + e.what());
    }
}

}  // namespace opshadow
