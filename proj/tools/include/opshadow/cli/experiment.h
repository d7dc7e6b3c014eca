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

#ifndef OPSHADOW_CLI_EXPERIMENT_H
#define OPSHADOW_CLI_EXPERIMENT_H

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opshadow/circuits.h"
#include "opshadow/results.h"
#include "opshadow/shadow.h"

namespace opshadow::cli {

/// Invalid configuration or command line; maps to exit status 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Anything that fails after the configuration was accepted; exit status 3.
class RuntimeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char *kManifestSchema = "opshadow.manifest/1";

struct Profile {
    std::string name;
    int m_u = 0;
    int m_s = 0;
};

/// "desk" (M_U=200, M_S=256) or "paper" (M_U=900, M_S=8192).
Profile profile_by_name(const std::string &name);

/// Fully resolved experiment. Qubit indices are 0-based here and 1-based in
/// the JSON form.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string model = "brickwork5";
    int n_qubits = 5;
    int t_min = 0;
    int t_max = 15;
    std::string profile = "desk";
    int m_u = 200;
    int m_s = 256;
    ProtocolMode mode = ProtocolMode::kRepeatedCircuit;
    std::optional<NoiseParams> noise;
    bool mitigation = false;
    int calibration_shots = 100000;
    int bootstrap = 200;
    LayerOrder layer_order = LayerOrder::kCnotFirst;
    QubitList a = {0};
    std::vector<int> j_c;
    QubitList dk_c;
    std::vector<std::string> quantities = {"renyi_mi"};
    std::optional<LadderLayout> ladder;
    /// Custom model only.
    std::optional<CircuitSpec> circuit;
    bool write_shadows = true;
    std::string output_dir = "opshadow_out";

    bool wants(const std::string &quantity) const;
    /// Any quantity that needs shadow data.
    bool needs_shadows() const;
};

/// Validates and resolves a config object. `base_dir` anchors relative
/// circuit_file paths. Errors name the offending field.
ExperimentConfig parse_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
/// Canonical JSON form; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig &config);
/// Reads a config file or a run manifest (whose embedded config is used).
ExperimentConfig load_config(const std::filesystem::path &path);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string &data);
std::string sha256_file(const std::filesystem::path &path);

struct RunOptions {
    std::optional<std::string> out;
    bool force = false;
    bool deterministic = false;
    std::optional<std::string> profile;
    /// 0: OPSHADOW_WORKERS or hardware concurrency.
    int workers = 0;
    bool verbose = false;
};

CircuitSpec build_circuit(const ExperimentConfig &config);

/// Exact rows, plus shadow rows when `with_shadows`, written to the output
/// directory with circuit.json, shadow_t<t>.jsonl/.meta.json and manifest.json.
std::vector<ResultRow> run_experiment(ExperimentConfig config, const RunOptions &options, bool with_shadows,
                                      const std::string &command);

int cmd_run(const std::filesystem::path &config_path, const RunOptions &options);
int cmd_oracle(const std::filesystem::path &config_path, const RunOptions &options);

struct ComparedRow {
    ResultRow estimate;
    ResultRow reference;
    double deviation = 0;
    /// deviation / std_error; NaN when neither row carries an error.
    double z = 0;
};

struct CompareSummary {
    std::vector<ComparedRow> rows;
    /// Pairs with a finite deviation.
    int finite = 0;
    double mean_abs_deviation = 0;
    double max_abs_deviation = 0;
    /// Among pairs with a finite z.
    int with_z = 0;
    double fraction_within_3 = 1;
    /// Per quantity, in first-seen order.
    std::vector<std::pair<std::string, double>> mad_by_quantity;
};

/// One table: its shadow rows against its exact rows. Two tables: matched
/// on (t, quantity, A, jC_or_k, mode), except that an exact-only reference
/// is matched against the first table's sampled rows. Throws RuntimeError on
/// a key mismatch.
CompareSummary compare_results(const std::vector<ResultRow> &first,
                               const std::optional<std::vector<ResultRow>> &second = std::nullopt);
std::string format_summary(const CompareSummary &summary);
/// Per-pair table in CSV form.
std::string compared_to_csv(const CompareSummary &summary);

int cmd_compare(const std::vector<std::filesystem::path> &paths, const std::optional<std::string> &out);

/// Calibrates the readout model of the config and prints/writes the confusion matrices.
int cmd_calibrate(const std::filesystem::path &config_path, const RunOptions &options);

}  // namespace opshadow::cli

#endif
