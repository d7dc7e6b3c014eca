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

#include "opshadow/cli/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Core>
#include <openssl/evp.h>

#include "opshadow/estimators.h"
#include "opshadow/oracle.h"
#include "opshadow/parallel.h"

#ifndef OPSHADOW_VERSION
#define OPSHADOW_VERSION "unknown"
#endif

namespace opshadow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kQuantities = {"renyi_mi", "neg_ratio", "dk", "oracle_all"};

const std::set<std::string> kConfigKeys = {
    "seed",     "model",     "t_range",      "profile",           "M_U",         "M_S",
    "mode",     "noise",     "mitigation",   "calibration_shots", "bootstrap",   "layer_order",
    "regions",  "dk_C",      "quantities",   "ladder_layers",     "ladder_edges", "circuit",
    "circuit_file", "write_shadows", "output_dir", "$schema"};

[[noreturn]] void fail(const std::string &field, const std::string &what) {
    throw ConfigError("config field '" + field + "': " + what);
}

long long get_int(const json &j, const std::string &field, long long lo, long long hi) {
    if (!j.is_number_integer()) {
        fail(field, "expected an integer");
    }
    long long v = j.is_number_unsigned() && j.get<unsigned long long>() > static_cast<unsigned long long>(hi)
                      ? hi + 1
                      : j.get<long long>();
    if (v < lo || v > hi) {
        fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

bool get_bool(const json &j, const std::string &field) {
    if (!j.is_boolean()) {
        fail(field, "expected true or false");
    }
    return j.get<bool>();
}

std::string get_string(const json &j, const std::string &field) {
    if (!j.is_string()) {
        fail(field, "expected a string");
    }
    return j.get<std::string>();
}

/// 1-based qubit list to 0-based, rejecting repeats.
QubitList get_qubits(const json &j, const std::string &field, int n_qubits, bool allow_empty) {
    if (!j.is_array()) {
        fail(field, "expected an array of 1-based qubit indices");
    }
    QubitList out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        int q = static_cast<int>(get_int(j[i], field + "[" + std::to_string(i) + "]", 1, n_qubits)) - 1;
        if (std::find(out.begin(), out.end(), q) != out.end()) {
            fail(field, "qubit " + std::to_string(q + 1) + " listed twice");
        }
        out.push_back(q);
    }
    if (out.empty() && !allow_empty) {
        fail(field, "must not be empty");
    }
    return out;
}

json qubits_to_json(const QubitList &qs) {
    json out = json::array();
    for (int q : qs) {
        out.push_back(q + 1);
    }
    return out;
}

std::vector<CnotPair> get_pairs(const json &j, const std::string &field) {
    if (!j.is_array()) {
        fail(field, "expected an array of [control, target] pairs");
    }
    std::vector<CnotPair> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string f = field + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) {
            fail(f, "expected a [control, target] pair");
        }
        out.push_back({static_cast<int>(get_int(j[i][0], f, 1, 7)) - 1, static_cast<int>(get_int(j[i][1], f, 1, 7)) - 1});
    }
    return out;
}

std::string region_label(const QubitList &qs) {
    std::string out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        out += (i ? ";" : "") + std::to_string(qs[i] + 1);
    }
    return out;
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw RuntimeError("cannot write '" + path.string() + "'");
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Profile profile_by_name(const std::string &name) {
    if (name == "desk") {
        return {"desk", 200, 256};
    }
    if (name == "paper") {
        return {"paper", 900, 8192};
    }
    throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

bool ExperimentConfig::wants(const std::string &quantity) const {
    return std::find(quantities.begin(), quantities.end(), quantity) != quantities.end();
}

bool ExperimentConfig::needs_shadows() const { return wants("renyi_mi") || wants("neg_ratio") || wants("dk"); }

ExperimentConfig parse_config(const json &j, const fs::path &base_dir) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto &[key, value] : j.items()) {
        if (!kConfigKeys.count(key)) {
            fail(key, "unknown field");
        }
    }
    ExperimentConfig c;
    if (!j.contains("seed")) {
        fail("seed", "required");
    }
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
        fail("seed", "expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("model")) {
        c.model = get_string(j["model"], "model");
    }
    if (c.model == "ladder7") {
        c.layer_order = LayerOrder::kSingleFirst;
    }
    if (j.contains("layer_order")) {
        try {
            c.layer_order = parse_layer_order(get_string(j["layer_order"], "layer_order"));
        } catch (const std::invalid_argument &) {
            fail("layer_order", "expected cnot_first or single_first");
        }
    }
    if (c.model == "brickwork5") {
        c.n_qubits = 5;
    } else if (c.model == "ladder7") {
        c.n_qubits = 7;
        LadderLayout layout = LadderLayout::lagos_default();
        if (j.contains("ladder_layers")) {
            const auto &ls = j["ladder_layers"];
            if (!ls.is_array() || ls.size() != 3) {
                fail("ladder_layers", "expected three layers of [control, target] pairs");
            }
            for (int l = 0; l < 3; ++l) {
                layout.layers[static_cast<std::size_t>(l)] = get_pairs(ls[static_cast<std::size_t>(l)], "ladder_layers[" + std::to_string(l) + "]");
            }
        }
        if (j.contains("ladder_edges")) {
            layout.edges.clear();
            for (const auto &p : get_pairs(j["ladder_edges"], "ladder_edges")) {
                layout.edges.emplace_back(p.control, p.target);
            }
        }
        try {
            layout.validate();
        } catch (const std::invalid_argument &e) {
            fail("ladder_layers", e.what());
        }
        c.ladder = layout;
    } else if (c.model == "custom") {
        if (j.contains("circuit") == j.contains("circuit_file")) {
            fail("circuit", "custom model needs exactly one of circuit or circuit_file");
        }
        std::string text;
        std::string field = j.contains("circuit") ? "circuit" : "circuit_file";
        if (j.contains("circuit")) {
            text = j["circuit"].dump();
        } else {
            fs::path p = get_string(j["circuit_file"], "circuit_file");
            if (p.is_relative()) {
                p = base_dir / p;
            }
            try {
                text = read_file(p);
            } catch (const ConfigError &e) {
                fail("circuit_file", e.what());
            }
        }
        try {
            c.circuit = circuit_from_json(text);
            c.circuit->validate();
        } catch (const std::exception &e) {
            fail(field, e.what());
        }
        c.n_qubits = c.circuit->n_qubits;
        c.layer_order = c.circuit->layer_order;
    } else {
        fail("model", "expected brickwork5, ladder7 or custom");
    }
    if (c.model != "ladder7" && (j.contains("ladder_layers") || j.contains("ladder_edges"))) {
        fail("ladder_layers", "only valid for the ladder7 model");
    }
    if (c.model != "custom" && (j.contains("circuit") || j.contains("circuit_file"))) {
        fail("circuit", "only valid for the custom model");
    }
    if (c.n_qubits > 8) {
        fail("circuit", "at most 8 qubits are supported");
    }

    int t_limit = c.circuit ? c.circuit->timesteps : 1000;
    c.t_max = std::min(15, t_limit);
    if (j.contains("t_range")) {
        const auto &r = j["t_range"];
        if (!r.is_array() || r.size() != 2) {
            fail("t_range", "expected [first, last]");
        }
        c.t_min = static_cast<int>(get_int(r[0], "t_range", 0, t_limit));
        c.t_max = static_cast<int>(get_int(r[1], "t_range", 0, t_limit));
        if (c.t_min > c.t_max) {
            fail("t_range", "first exceeds last");
        }
    }

    if (j.contains("mode")) {
        try {
            c.mode = parse_mode(get_string(j["mode"], "mode"));
        } catch (const std::invalid_argument &) {
            fail("mode", "expected repeated or ideal");
        }
    }
    if (j.contains("profile")) {
        try {
            c.profile = profile_by_name(get_string(j["profile"], "profile")).name;
        } catch (const ConfigError &e) {
            fail("profile", e.what());
        }
    }
    Profile prof = profile_by_name(c.profile);
    c.m_u = j.contains("M_U") ? static_cast<int>(get_int(j["M_U"], "M_U", 3, 1000000)) : prof.m_u;
    if (c.mode == ProtocolMode::kIdealOneShot) {
        c.m_s = j.contains("M_S") ? static_cast<int>(get_int(j["M_S"], "M_S", 1, 1)) : 1;
    } else {
        c.m_s = j.contains("M_S") ? static_cast<int>(get_int(j["M_S"], "M_S", 1, 1 << 24)) : prof.m_s;
    }

    if (j.contains("noise") && !j["noise"].is_null()) {
        const auto &nj = j["noise"];
        if (nj.is_string()) {
            if (nj.get<std::string>() != "default") {
                fail("noise", "expected null, \"default\" or an object");
            }
            c.noise = NoiseParams::defaults();
        } else if (nj.is_object()) {
            try {
                c.noise = noise_from_json(nj.dump());
                c.noise->validate(c.n_qubits);
            } catch (const std::exception &e) {
                fail("noise", e.what());
            }
        } else {
            fail("noise", "expected null, \"default\" or an object");
        }
    }
    if (j.contains("mitigation")) {
        c.mitigation = get_bool(j["mitigation"], "mitigation");
    }
    if (c.mitigation && !(c.noise && c.noise->has_readout_error())) {
        fail("mitigation", "requires a noise model with readout errors");
    }
    if (j.contains("calibration_shots")) {
        c.calibration_shots = static_cast<int>(get_int(j["calibration_shots"], "calibration_shots", 100, 100000000));
    }
    if (j.contains("bootstrap")) {
        c.bootstrap = static_cast<int>(get_int(j["bootstrap"], "bootstrap", 0, 100000));
    }

    for (int q = 0; q < c.n_qubits; ++q) {
        c.j_c.push_back(q);
    }
    if (j.contains("regions")) {
        const auto &r = j["regions"];
        if (!r.is_object()) {
            fail("regions", "expected an object with A and j_C");
        }
        for (const auto &[key, value] : r.items()) {
            if (key != "A" && key != "j_C") {
                fail("regions." + key, "unknown field");
            }
        }
        if (r.contains("A")) {
            c.a = get_qubits(r["A"], "regions.A", c.n_qubits, false);
        }
        if (r.contains("j_C")) {
            c.j_c = get_qubits(r["j_C"], "regions.j_C", c.n_qubits, false);
        }
    }
    if (c.a.size() >= static_cast<std::size_t>(c.n_qubits)) {
        fail("regions.A", "must leave at least one qubit in B");
    }
    c.dk_c = {std::min(2, c.n_qubits - 1)};
    if (j.contains("dk_C")) {
        c.dk_c = get_qubits(j["dk_C"], "dk_C", c.n_qubits, false);
    }
    if (j.contains("quantities")) {
        const auto &qs = j["quantities"];
        if (!qs.is_array() || qs.empty()) {
            fail("quantities", "expected a non-empty array");
        }
        std::set<std::string> seen;
        for (const auto &q : qs) {
            std::string name = get_string(q, "quantities");
            if (std::find(kQuantities.begin(), kQuantities.end(), name) == kQuantities.end()) {
                fail("quantities", "unknown quantity '" + name + "'");
            }
            seen.insert(name);
        }
        c.quantities.clear();
        for (const auto &name : kQuantities) {
            if (seen.count(name)) {
                c.quantities.push_back(name);
            }
        }
    }
    if (j.contains("write_shadows")) {
        c.write_shadows = get_bool(j["write_shadows"], "write_shadows");
    }
    if (j.contains("output_dir")) {
        c.output_dir = get_string(j["output_dir"], "output_dir");
        if (c.output_dir.empty()) {
            fail("output_dir", "must not be empty");
        }
    }
    return c;
}

json config_to_json(const ExperimentConfig &c) {
    json j;
    j["seed"] = c.seed;
    j["model"] = c.model;
    j["t_range"] = {c.t_min, c.t_max};
    j["profile"] = c.profile;
    j["M_U"] = c.m_u;
    j["M_S"] = c.m_s;
    j["mode"] = std::string(mode_name(c.mode));
    j["noise"] = c.noise ? json::parse(noise_to_json(*c.noise)) : json(nullptr);
    j["mitigation"] = c.mitigation;
    j["calibration_shots"] = c.calibration_shots;
    j["bootstrap"] = c.bootstrap;
    j["regions"] = {{"A", qubits_to_json(c.a)}, {"j_C", qubits_to_json(c.j_c)}};
    j["dk_C"] = qubits_to_json(c.dk_c);
    j["quantities"] = c.quantities;
    j["write_shadows"] = c.write_shadows;
    j["output_dir"] = c.output_dir;
    if (c.model == "custom") {
        j["circuit"] = json::parse(circuit_to_json(*c.circuit));
    } else {
        j["layer_order"] = std::string(layer_order_name(c.layer_order));
    }
    if (c.ladder) {
        json layers = json::array();
        for (const auto &layer : c.ladder->layers) {
            json l = json::array();
            for (const auto &p : layer) {
                l.push_back({p.control + 1, p.target + 1});
            }
            layers.push_back(l);
        }
        json edges = json::array();
        for (const auto &[u, v] : c.ladder->edges) {
            edges.push_back({u + 1, v + 1});
        }
        j["ladder_layers"] = layers;
        j["ladder_edges"] = edges;
    }
    return j;
}

ExperimentConfig load_config(const fs::path &path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error &e) {
        throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("schema") && j["schema"] == kManifestSchema) {
        if (!j.contains("config")) {
            throw ConfigError("manifest '" + path.string() + "' has no config");
        }
        j = j["config"];
    }
    return parse_config(j, path.parent_path());
}

std::string sha256_hex(const std::string &data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw RuntimeError("SHA-256 failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path &path) { return sha256_hex(read_file(path)); }

CircuitSpec build_circuit(const ExperimentConfig &c) {
    if (c.model == "brickwork5") {
        return build_brickwork(c.t_max, c.seed, 5, c.layer_order);
    }
    if (c.model == "ladder7") {
        return build_ladder7(c.t_max, c.seed, c.ladder.value_or(LadderLayout::lagos_default()), c.layer_order);
    }
    CircuitSpec spec = *c.circuit;
    spec.layers.resize(static_cast<std::size_t>(c.t_max));
    spec.timesteps = c.t_max;
    return spec;
}

namespace {

void prepare_output_dir(const fs::path &dir, bool force) {
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir)) {
            throw ConfigError("output path '" + dir.string() + "' is not a directory");
        }
        if (!fs::is_empty(dir)) {
            if (!force) {
                throw ConfigError("output directory '" + dir.string() + "' is not empty (use --force to overwrite)");
            }
            for (const auto &entry : fs::directory_iterator(dir)) {
                std::string name = entry.path().filename().string();
                bool ours = name == "results.csv" || name == "circuit.json" || name == "manifest.json" ||
                            name == "config.json" || name.rfind("shadow_t", 0) == 0;
                if (ours && entry.is_regular_file()) {
                    fs::remove(entry.path());
                }
            }
        }
    }
    fs::create_directories(dir, ec);
    if (ec) {
        throw RuntimeError("cannot create '" + dir.string() + "': " + ec.message());
    }
}

ResultRow exact_row(int t, const std::string &quantity, const std::string &region, int index, double value) {
    return {t, quantity, region, index, value, 0.0, 0, 0, "exact", false};
}

}  // namespace

std::vector<ResultRow> run_experiment(ExperimentConfig c, const RunOptions &options, bool with_shadows,
                                      const std::string &command) {
    auto start = std::chrono::steady_clock::now();
    if (options.profile) {
        Profile p = profile_by_name(*options.profile);
        c.profile = p.name;
        c.m_u = p.m_u;
        c.m_s = c.mode == ProtocolMode::kIdealOneShot ? 1 : p.m_s;
    }
    with_shadows = with_shadows && c.needs_shadows();
    fs::path dir = options.out.value_or(c.output_dir);
    prepare_output_dir(dir, options.force);
    const std::string config_text = config_to_json(c).dump(2) + "\n";

    std::map<std::string, double> timings;
    auto phase = std::chrono::steady_clock::now();
    CircuitSpec spec = build_circuit(c);
    CompiledCircuit compiled = compile_channel(spec, c.noise);
    write_file(dir / "circuit.json", circuit_to_json(spec) + "\n");
    write_file(dir / "config.json", config_text);
    timings["circuit"] = seconds_since(phase);

    std::vector<ConfusionMatrix> confusion;
    if (with_shadows && c.mitigation) {
        try {
            confusion = calibrate_readout(*c.noise, c.n_qubits, c.calibration_shots, c.seed);
        } catch (const SingularConfusionError &e) {
            throw RuntimeError(std::string("readout calibration failed: ") + e.what());
        }
    }

    const int n = c.n_qubits;
    const std::string a_label = region_label(c.a);
    const std::string c_label = "C=" + region_label(c.dk_c);
    std::vector<ResultRow> rows;
    Channel prefix(n);
    std::optional<OutcomeModel> model;
    if (with_shadows) {
        model.emplace(prefix);
    }
    timings["sampling"] = timings["estimation"] = timings["oracle"] = timings["io"] = 0;

    for (int t = 0; t <= c.t_max; ++t) {
        if (t > 0) {
            prefix.append(compiled.step(t));
            if (model) {
                phase = std::chrono::steady_clock::now();
                model = model->extended(compiled.step(t));
                timings["sampling"] += seconds_since(phase);
            }
        }
        if (t < c.t_min) {
            continue;
        }
        if (options.verbose) {
            std::cerr << "t=" << t << "\n";
        }
        std::optional<ShadowEstimator> est;
        if (with_shadows) {
            phase = std::chrono::steady_clock::now();
            ProtocolOptions po;
            po.m_u = c.m_u;
            po.m_s = c.m_s;
            po.seed = c.seed;
            po.mode = c.mode;
            po.noise = c.noise;
            po.workers = options.workers;
            ShadowDataset ds = run_protocol(*model, t, po);
            ds.circuit_model = c.model;
            ds.confusion = confusion;
            timings["sampling"] += seconds_since(phase);
            if (c.write_shadows) {
                phase = std::chrono::steady_clock::now();
                std::string stem = "shadow_t" + std::to_string(t);
                write_dataset(ds, dir / (stem + ".jsonl"), dir / (stem + ".meta.json"));
                timings["io"] += seconds_since(phase);
            }
            phase = std::chrono::steady_clock::now();
            EstimatorOptions eo;
            eo.bootstrap = c.bootstrap;
            eo.seed = c.seed;
            eo.mitigate = c.mitigation;
            eo.workers = options.workers;
            est.emplace(ds, eo);
            timings["estimation"] += seconds_since(phase);
        }
        auto shadow_row = [&](const std::string &quantity, const std::string &region, int index,
                              const DerivedEstimate &d) {
            return ResultRow{t,   quantity, region, index, d.value, d.std_error, c.m_u, c.m_s, std::string(mode_name(c.mode)),
                             c.mitigation};
        };

        phase = std::chrono::steady_clock::now();
        std::vector<ExactQuantities> exact;
        if (c.wants("renyi_mi") || c.wants("neg_ratio") || c.wants("oracle_all")) {
            for (int jc : c.j_c) {
                exact.push_back(exact_quantities(prefix, c.a, {jc}));
            }
        }
        std::vector<double> dk_exact;
        if (c.wants("dk")) {
            dk_exact = dk_direct(prefix, c.dk_c);
        }
        timings["oracle"] += seconds_since(phase);

        auto per_region = [&](const std::string &quantity, auto shadow_fn, auto exact_fn) {
            if (est) {
                auto p = std::chrono::steady_clock::now();
                for (int jc : c.j_c) {
                    rows.push_back(shadow_row(quantity, a_label, jc + 1, shadow_fn(jc)));
                }
                timings["estimation"] += seconds_since(p);
            }
            for (std::size_t i = 0; i < c.j_c.size(); ++i) {
                rows.push_back(exact_row(t, quantity, a_label, c.j_c[i] + 1, exact_fn(exact[i])));
            }
        };
        if (c.wants("renyi_mi")) {
            per_region(
                "renyi_mi", [&](int jc) { return renyi_mi(*est, c.a, {jc}); },
                [](const ExactQuantities &q) { return q.renyi2_mi; });
        }
        if (c.wants("neg_ratio")) {
            per_region(
                "neg_ratio", [&](int jc) { return negativity_ratio(*est, c.a, {jc}); },
                [](const ExactQuantities &q) { return q.log2_ratio; });
        }
        if (c.wants("dk")) {
            std::vector<double> dk_cum = cumulative(dk_exact);
            for (bool cum : {false, true}) {
                std::string quantity = cum ? "dk_cumulative" : "dk";
                if (est) {
                    auto p = std::chrono::steady_clock::now();
                    auto ds = dk_estimates(*est, c.dk_c, cum);
                    for (int k = 0; k <= n; ++k) {
                        rows.push_back(shadow_row(quantity, c_label, k, ds[static_cast<std::size_t>(k)]));
                    }
                    timings["estimation"] += seconds_since(p);
                }
                const auto &v = cum ? dk_cum : dk_exact;
                for (int k = 0; k <= n; ++k) {
                    rows.push_back(exact_row(t, quantity, c_label, k, v[static_cast<std::size_t>(k)]));
                }
            }
        }
        if (c.wants("oracle_all")) {
            const int a_size = static_cast<int>(c.a.size());
            const std::vector<std::pair<std::string, std::function<double(const ExactQuantities &)>>> extra = {
                {"renyi3_mi", [](const ExactQuantities &q) { return q.renyi3_mi; }},
                {"vn_mi", [](const ExactQuantities &q) { return q.von_neumann_mi; }},
                {"log_negativity", [](const ExactQuantities &q) { return q.log_negativity; }},
                {"tripartite2", [](const ExactQuantities &q) { return q.tripartite2; }},
                {"p2", [](const ExactQuantities &q) { return q.p2; }},
                {"p3", [](const ExactQuantities &q) { return q.p3; }},
                {"purity_bc", [](const ExactQuantities &q) { return q.purity_bc; }},
                {"purity_abc", [](const ExactQuantities &q) { return q.purity_abc; }},
                {"recovery_fidelity",
                 [a_size](const ExactQuantities &q) { return recovery_fidelity(q.renyi2_mi, a_size); }},
            };
            for (const auto &[quantity, fn] : extra) {
                for (std::size_t i = 0; i < c.j_c.size(); ++i) {
                    rows.push_back(exact_row(t, quantity, a_label, c.j_c[i] + 1, fn(exact[i])));
                }
            }
        }
    }

    phase = std::chrono::steady_clock::now();
    write_results(rows, dir / "results.csv");
    timings["io"] += seconds_since(phase);

    json manifest;
    manifest["schema"] = kManifestSchema;
    manifest["command"] = command;
    manifest["config"] = config_to_json(c);
    manifest["config_sha256"] = sha256_hex(config_text);
    manifest["deterministic"] = options.deterministic;
    manifest["workers"] = options.workers > 0 ? options.workers : worker_count();
    manifest["versions"] = {
        {"opshadow", OPSHADOW_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__},
    };
    json artifacts = json::array();
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
        artifacts.push_back({{"path", f.filename().string()},
                             {"sha256", sha256_file(f)},
                             {"bytes", static_cast<std::uint64_t>(fs::file_size(f))}});
    }
    manifest["artifacts"] = artifacts;
    timings["total"] = seconds_since(start);
    manifest["timings_s"] = timings;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return rows;
}

int cmd_run(const fs::path &config_path, const RunOptions &options) {
    ExperimentConfig c = load_config(config_path);
    auto rows = run_experiment(c, options, true, "run");
    std::cout << "wrote " << rows.size() << " rows to "
              << (fs::path(options.out.value_or(c.output_dir)) / "results.csv").string() << "\n";
    return kExitOk;
}

int cmd_oracle(const fs::path &config_path, const RunOptions &options) {
    ExperimentConfig c = load_config(config_path);
    auto rows = run_experiment(c, options, false, "oracle");
    std::cout << "wrote " << rows.size() << " rows to "
              << (fs::path(options.out.value_or(c.output_dir)) / "results.csv").string() << "\n";
    return kExitOk;
}

namespace {

using Key = std::tuple<int, std::string, std::string, int, std::string>;

Key key_of(const ResultRow &r, bool with_mode) {
    return {r.t, r.quantity, r.region, r.index, with_mode ? r.mode : std::string()};
}

std::string key_str(const Key &k) {
    std::string out = "(t=" + std::to_string(std::get<0>(k)) + ", " + std::get<1>(k) + ", A=" + std::get<2>(k) +
                      ", " + std::to_string(std::get<3>(k));
    if (!std::get<4>(k).empty()) {
        out += ", " + std::get<4>(k);
    }
    return out + ")";
}

std::map<Key, const ResultRow *> index_rows(const std::vector<const ResultRow *> &rows, bool with_mode,
                                            const std::string &what) {
    std::map<Key, const ResultRow *> out;
    for (const auto *r : rows) {
        if (!out.emplace(key_of(*r, with_mode), r).second) {
            throw RuntimeError("duplicate key " + key_str(key_of(*r, with_mode)) + " in " + what);
        }
    }
    return out;
}

}  // namespace

CompareSummary compare_results(const std::vector<ResultRow> &first, const std::optional<std::vector<ResultRow>> &second) {
    auto is_exact = [](const ResultRow &r) { return r.mode == "exact"; };
    std::vector<const ResultRow *> est, ref;
    bool with_mode = false;
    bool symmetric = false;
    if (!second) {
        for (const auto &r : first) {
            (is_exact(r) ? ref : est).push_back(&r);
        }
        if (est.empty()) {
            throw RuntimeError("no sampled rows to compare");
        }
    } else if (std::all_of(second->begin(), second->end(), is_exact) &&
               std::any_of(first.begin(), first.end(), [&](const ResultRow &r) { return !is_exact(r); })) {
        for (const auto &r : first) {
            if (!is_exact(r)) {
                est.push_back(&r);
            }
        }
        for (const auto &r : *second) {
            ref.push_back(&r);
        }
    } else {
        with_mode = true;
        symmetric = true;
        for (const auto &r : first) {
            est.push_back(&r);
        }
        for (const auto &r : *second) {
            ref.push_back(&r);
        }
    }

    auto est_map = index_rows(est, with_mode, "first table");
    auto ref_map = index_rows(ref, with_mode, "reference table");
    CompareSummary s;
    for (const auto &[k, r] : est_map) {
        auto it = ref_map.find(k);
        if (it == ref_map.end()) {
            throw RuntimeError("key mismatch: " + key_str(k) + " has no reference row");
        }
        s.rows.push_back({*r, *it->second, 0, 0});
    }
    if (symmetric) {
        for (const auto &[k, r] : ref_map) {
            if (!est_map.count(k)) {
                throw RuntimeError("key mismatch: " + key_str(k) + " missing from the first table");
            }
        }
    }
    std::map<std::string, std::pair<double, int>> by_quantity;
    std::vector<std::string> order;
    double sum = 0;
    int within = 0;
    for (auto &p : s.rows) {
        p.deviation = p.estimate.value - p.reference.value;
        double se = std::hypot(p.estimate.std_error, p.reference.std_error);
        if (se > 0) {
            p.z = p.deviation / se;
        } else {
            p.z = p.deviation == 0 ? 0.0 : std::nan("");
        }
        if (!std::isfinite(p.deviation)) {
            continue;
        }
        ++s.finite;
        sum += std::abs(p.deviation);
        s.max_abs_deviation = std::max(s.max_abs_deviation, std::abs(p.deviation));
        if (!by_quantity.count(p.estimate.quantity)) {
            order.push_back(p.estimate.quantity);
        }
        auto &q = by_quantity[p.estimate.quantity];
        q.first += std::abs(p.deviation);
        q.second += 1;
        if (std::isfinite(p.z)) {
            ++s.with_z;
            within += std::abs(p.z) <= 3 ? 1 : 0;
        }
    }
    s.mean_abs_deviation = s.finite ? sum / s.finite : 0;
    s.fraction_within_3 = s.with_z ? static_cast<double>(within) / s.with_z : 1.0;
    for (const auto &q : order) {
        s.mad_by_quantity.emplace_back(q, by_quantity[q].first / by_quantity[q].second);
    }
    return s;
}

std::string format_summary(const CompareSummary &s) {
    std::ostringstream out;
    out << "pairs " << s.rows.size() << " (finite " << s.finite << ")\n";
    out << "mean |deviation| " << format_double(s.mean_abs_deviation) << "\n";
    out << "max |deviation| " << format_double(s.max_abs_deviation) << "\n";
    out << "fraction |z| <= 3 " << format_double(s.fraction_within_3) << " of " << s.with_z << "\n";
    for (const auto &[q, mad] : s.mad_by_quantity) {
        out << "  " << q << " mean |deviation| " << format_double(mad) << "\n";
    }
    return out.str();
}

std::string compared_to_csv(const CompareSummary &s) {
    std::string out = "t,quantity,A,jC_or_k,value,reference,deviation,std_error,z\n";
    for (const auto &p : s.rows) {
        const auto &e = p.estimate;
        out += std::to_string(e.t) + ',' + e.quantity + ',' + e.region + ',' + std::to_string(e.index) + ',' +
               format_double(e.value) + ',' + format_double(p.reference.value) + ',' + format_double(p.deviation) +
               ',' + format_double(std::hypot(e.std_error, p.reference.std_error)) + ',' + format_double(p.z) + '\n';
    }
    return out;
}

int cmd_compare(const std::vector<fs::path> &paths, const std::optional<std::string> &out) {
    if (paths.empty() || paths.size() > 2) {
        throw ConfigError("compare takes one or two results files");
    }
    std::vector<std::vector<ResultRow>> tables;
    for (const auto &p : paths) {
        if (!fs::exists(p)) {
            throw ConfigError("results file '" + p.string() + "' does not exist");
        }
        try {
            tables.push_back(read_results(p));
        } catch (const std::invalid_argument &e) {
            throw RuntimeError("'" + p.string() + "': " + e.what());
        }
    }
    auto summary = paths.size() == 1 ? compare_results(tables[0]) : compare_results(tables[0], tables[1]);
    std::cout << format_summary(summary);
    if (out) {
        write_file(*out, compared_to_csv(summary));
    }
    return kExitOk;
}

int cmd_calibrate(const fs::path &config_path, const RunOptions &options) {
    ExperimentConfig c = load_config(config_path);
    if (!c.noise || !c.noise->has_readout_error()) {
        throw ConfigError("config field 'noise': calibrate needs a readout error model");
    }
    std::vector<ConfusionMatrix> cal;
    try {
        cal = calibrate_readout(*c.noise, c.n_qubits, c.calibration_shots, c.seed);
    } catch (const SingularConfusionError &e) {
        throw RuntimeError(std::string("readout calibration failed: ") + e.what());
    }
    json doc;
    doc["schema"] = "opshadow.calibration/1";
    doc["seed"] = c.seed;
    doc["shots"] = c.calibration_shots;
    json qubits = json::array();
    for (std::size_t q = 0; q < cal.size(); ++q) {
        const auto &m = cal[q].m;
        qubits.push_back({{"qubit", q + 1},
                          {"p0_given_0", m(0, 0)},
                          {"p1_given_0", m(1, 0)},
                          {"p0_given_1", m(0, 1)},
                          {"p1_given_1", m(1, 1)},
                          {"determinant", cal[q].determinant()}});
        std::cout << "qubit " << q + 1 << ": P(1|0)=" << format_double(m(1, 0)) << " P(0|1)=" << format_double(m(0, 1))
                  << " det=" << format_double(cal[q].determinant()) << "\n";
    }
    doc["confusion"] = qubits;
    if (options.out) {
        write_file(*options.out, doc.dump(2) + "\n");
    }
    return kExitOk;
}

}  // namespace opshadow::cli
