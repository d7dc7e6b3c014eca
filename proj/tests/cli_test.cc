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
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "opshadow/cli/experiment.h"
#include "opshadow/results.h"

namespace opshadow::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("opshadow_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string &name, const json &j) {
        auto p = dir_ / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    int cli(const std::string &args) {
        std::string cmd = std::string(OPSHADOW_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                          " 2> " + (dir_ / "stderr.txt").string();
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string captured(const std::string &which) {
        std::ifstream in(dir_ / which);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json smoke() {
    return {{"seed", 42}, {"model", "brickwork5"}, {"t_range", {0, 3}}, {"M_U", 100}, {"M_S", 64},
            {"quantities", {"renyi_mi"}}};
}

std::string config_error(const json &j) {
    try {
        parse_config(j);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

TEST(Config, ErrorsNameTheField) {
    json j = smoke();
    j.erase("seed");
    EXPECT_NE(config_error(j).find("'seed'"), std::string::npos);
    j = smoke();
    j["M_U"] = 1;
    EXPECT_NE(config_error(j).find("'M_U'"), std::string::npos);
    j = smoke();
    j["t_range"] = {5, 2};
    EXPECT_NE(config_error(j).find("'t_range'"), std::string::npos);
    j = smoke();
    j["quantities"] = {"renyi_mi", "magic"};
    EXPECT_NE(config_error(j).find("'quantities'"), std::string::npos);
    j = smoke();
    j["colour"] = "blue";
    EXPECT_NE(config_error(j).find("'colour'"), std::string::npos);
    j = smoke();
    j["regions"] = {{"A", {0}}};
    EXPECT_NE(config_error(j).find("'regions.A[0]'"), std::string::npos);
    j = smoke();
    j["noise"] = {{"p1", 2.0}};
    EXPECT_NE(config_error(j).find("'noise'"), std::string::npos);
    j = smoke();
    j["mitigation"] = true;
    EXPECT_NE(config_error(j).find("'mitigation'"), std::string::npos);
    j = smoke();
    j["mode"] = "ideal";
    j["M_S"] = 4;
    EXPECT_NE(config_error(j).find("'M_S'"), std::string::npos);
    j = smoke();
    j["model"] = "ladder7";
    j["ladder_layers"] = {json::array({{2, 1}}), json::array({{2, 3}}), json::array({{2, 4}})};
    EXPECT_NE(config_error(j).find("'ladder_layers'"), std::string::npos);
}

TEST(Config, DefaultsAndRoundTrip) {
    auto c = parse_config(smoke());
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.n_qubits, 5);
    EXPECT_EQ(c.j_c, (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(c.a, (QubitList{0}));
    EXPECT_EQ(c.dk_c, (QubitList{2}));
    EXPECT_EQ(c.layer_order, LayerOrder::kCnotFirst);
    EXPECT_FALSE(c.noise);

    json full = smoke();
    full["noise"] = "default";
    full["mitigation"] = true;
    full["regions"] = {{"A", {2}}, {"j_C", {1, 5}}};
    full["dk_C"] = {4};
    full["quantities"] = {"dk", "renyi_mi", "neg_ratio"};
    auto d = parse_config(full);
    EXPECT_EQ(d.a, (QubitList{1}));
    EXPECT_EQ(d.j_c, (std::vector<int>{0, 4}));
    EXPECT_EQ(d.quantities, (std::vector<std::string>{"renyi_mi", "neg_ratio", "dk"}));
    auto back = parse_config(config_to_json(d));
    EXPECT_EQ(config_to_json(back), config_to_json(d));

    json ladder = {{"seed", 1}, {"model", "ladder7"}};
    auto l = parse_config(ladder);
    EXPECT_EQ(l.n_qubits, 7);
    EXPECT_EQ(l.layer_order, LayerOrder::kSingleFirst);
    EXPECT_EQ(config_to_json(parse_config(config_to_json(l))), config_to_json(l));
}

TEST(Config, Profiles) {
    EXPECT_EQ(profile_by_name("desk").m_u, 200);
    EXPECT_EQ(profile_by_name("desk").m_s, 256);
    EXPECT_EQ(profile_by_name("paper").m_u, 900);
    EXPECT_EQ(profile_by_name("paper").m_s, 8192);
    EXPECT_THROW(profile_by_name("huge"), ConfigError);
    json j = {{"seed", 3}, {"profile", "paper"}};
    EXPECT_EQ(parse_config(j).m_s, 8192);
}

TEST(Sha256, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, RunRowAccounting) {
    auto cfg = write_config("smoke.json", smoke());
    ASSERT_EQ(cli("run -c " + cfg.string() + " -o " + (dir_ / "out").string()), kExitOk) << captured("stderr.txt");
    auto rows = read_results(dir_ / "out" / "results.csv");
    ASSERT_EQ(rows.size(), 40u);
    int shadow = 0, exact = 0;
    for (const auto &r : rows) {
        (r.mode == "exact" ? exact : shadow)++;
        EXPECT_EQ(r.quantity, "renyi_mi");
    }
    EXPECT_EQ(shadow, 20);
    EXPECT_EQ(exact, 20);
    for (auto name : {"circuit.json", "config.json", "manifest.json", "shadow_t0.jsonl", "shadow_t3.meta.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / name)) << name;
    }
    auto ds = read_dataset(dir_ / "out" / "shadow_t2.jsonl", dir_ / "out" / "shadow_t2.meta.json");
    EXPECT_EQ(ds.records.size(), 6400u);
    EXPECT_EQ(circuit_from_json(slurp(dir_ / "out" / "circuit.json")), build_brickwork(3, 42));
}

TEST_F(CliTest, DeterministicBytes) {
    auto cfg = write_config("smoke.json", smoke());
    ASSERT_EQ(cli("run --deterministic -c " + cfg.string() + " -o " + (dir_ / "a").string()), kExitOk);
    ASSERT_EQ(cli("run --deterministic -j 1 -c " + cfg.string() + " -o " + (dir_ / "b").string()), kExitOk);
    EXPECT_EQ(slurp(dir_ / "a" / "results.csv"), slurp(dir_ / "b" / "results.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "shadow_t3.jsonl"), slurp(dir_ / "b" / "shadow_t3.jsonl"));
}

TEST_F(CliTest, ManifestReproducesArtifacts) {
    auto cfg = write_config("smoke.json", smoke());
    ASSERT_EQ(cli("run --deterministic -c " + cfg.string() + " -o " + (dir_ / "a").string()), kExitOk);
    auto manifest = json::parse(slurp(dir_ / "a" / "manifest.json"));
    EXPECT_EQ(manifest["schema"], kManifestSchema);
    EXPECT_TRUE(manifest.contains("config_sha256"));
    EXPECT_TRUE(manifest["versions"].contains("opshadow"));
    EXPECT_TRUE(manifest["timings_s"].is_object());
    ASSERT_EQ(cli("run --deterministic -c " + (dir_ / "a" / "manifest.json").string() + " -o " +
                  (dir_ / "b").string()),
              kExitOk)
        << captured("stderr.txt");
    auto again = json::parse(slurp(dir_ / "b" / "manifest.json"));
    std::map<std::string, std::string> first, second;
    for (const auto &a : manifest["artifacts"]) {
        first[a["path"]] = a["sha256"];
        EXPECT_EQ(sha256_file(dir_ / "a" / a["path"].get<std::string>()), a["sha256"]);
    }
    for (const auto &a : again["artifacts"]) {
        second[a["path"]] = a["sha256"];
    }
    EXPECT_EQ(first, second);
    EXPECT_EQ(manifest["config_sha256"], again["config_sha256"]);
}

TEST_F(CliTest, ExitCodes) {
    json bad = smoke();
    bad.erase("seed");
    auto bad_cfg = write_config("bad.json", bad);
    EXPECT_EQ(cli("run -c " + bad_cfg.string() + " -o " + (dir_ / "x").string()), kExitConfig);
    EXPECT_NE(captured("stderr.txt").find("'seed'"), std::string::npos);
    EXPECT_EQ(cli("run -c " + (dir_ / "missing.json").string()), kExitConfig);
    EXPECT_EQ(cli("frobnicate"), kExitConfig);
    std::ofstream(dir_ / "broken.json") << "{ not json";
    EXPECT_EQ(cli("oracle -c " + (dir_ / "broken.json").string()), kExitConfig);

    auto cfg = write_config("smoke.json", smoke());
    auto out = (dir_ / "out").string();
    ASSERT_EQ(cli("oracle -c " + cfg.string() + " -o " + out), kExitOk);
    EXPECT_EQ(cli("oracle -c " + cfg.string() + " -o " + out), kExitConfig);
    EXPECT_NE(captured("stderr.txt").find("--force"), std::string::npos);
    std::ofstream(dir_ / "out" / "notes.txt") << "keep me";
    EXPECT_EQ(cli("oracle -f -c " + cfg.string() + " -o " + out), kExitOk);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "notes.txt"));

    write_results({{0, "renyi_mi", "1", 1, 1.0, 0.1, 10, 10, "repeated", false}}, dir_ / "one.csv");
    write_results({{1, "renyi_mi", "1", 1, 1.0, 0.1, 10, 10, "repeated", false}}, dir_ / "two.csv");
    EXPECT_EQ(cli("compare " + (dir_ / "one.csv").string() + " " + (dir_ / "two.csv").string()), kExitRuntime);
}

TEST_F(CliTest, OracleIdentityAtTimeZero) {
    json j = smoke();
    j["t_range"] = {0, 0};
    auto cfg = write_config("t0.json", j);
    ASSERT_EQ(cli("oracle -c " + cfg.string() + " -o " + (dir_ / "out").string()), kExitOk);
    auto rows = read_results(dir_ / "out" / "results.csv");
    ASSERT_EQ(rows.size(), 5u);
    for (const auto &r : rows) {
        EXPECT_EQ(r.mode, "exact");
        EXPECT_NEAR(r.value, r.index == 1 ? 2.0 : 0.0, 1e-10) << r.index;
    }
    EXPECT_FALSE(fs::exists(dir_ / "out" / "shadow_t0.jsonl"));
}

TEST_F(CliTest, OracleLadderPeriodAndWeightConservation) {
    json j = {{"seed", 42}, {"model", "ladder7"}, {"t_range", {0, 6}}, {"quantities", {"dk"}}};
    auto cfg = write_config("ladder.json", j);
    ASSERT_EQ(cli("oracle -c " + cfg.string() + " -o " + (dir_ / "out").string()), kExitOk) << captured("stderr.txt");
    auto spec = circuit_from_json(slurp(dir_ / "out" / "circuit.json"));
    ASSERT_EQ(spec.timesteps, 6);
    for (int t = 4; t <= 6; ++t) {
        EXPECT_EQ(spec.layers[static_cast<std::size_t>(t - 1)].cnots, spec.layers[static_cast<std::size_t>(t - 4)].cnots);
    }
    std::map<int, double> sums;
    for (const auto &r : read_results(dir_ / "out" / "results.csv")) {
        EXPECT_EQ(r.region, "C=3");
        if (r.quantity == "dk") {
            sums[r.t] += r.value;
        }
    }
    ASSERT_EQ(sums.size(), 7u);
    for (auto [t, s] : sums) {
        EXPECT_NEAR(s, 1.0, 1e-9) << t;
    }
}

TEST_F(CliTest, NoiseLowersLateMutualInformation) {
    json clean = smoke();
    clean["t_range"] = {15, 15};
    json noisy = clean;
    noisy["noise"] = {{"p1", 0.0}, {"p2", 0.02}};
    ASSERT_EQ(cli("oracle -c " + write_config("c.json", clean).string() + " -o " + (dir_ / "c").string()), kExitOk);
    ASSERT_EQ(cli("oracle -c " + write_config("n.json", noisy).string() + " -o " + (dir_ / "n").string()), kExitOk);
    auto a = read_results(dir_ / "c" / "results.csv");
    auto b = read_results(dir_ / "n" / "results.csv");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LT(b[i].value, a[i].value) << a[i].index;
    }
}

TEST_F(CliTest, CompareIdenticalAndSummary) {
    auto cfg = write_config("smoke.json", smoke());
    ASSERT_EQ(cli("run -c " + cfg.string() + " -o " + (dir_ / "out").string()), kExitOk);
    auto csv = (dir_ / "out" / "results.csv").string();
    ASSERT_EQ(cli("compare " + csv + " " + csv + " -o " + (dir_ / "cmp.csv").string()), kExitOk);
    EXPECT_NE(captured("stdout.txt").find("mean |deviation| 0"), std::string::npos) << captured("stdout.txt");

    auto rows = read_results(csv);
    auto same = compare_results(rows, rows);
    EXPECT_EQ(same.rows.size(), rows.size());
    for (const auto &r : same.rows) {
        if (std::isfinite(r.deviation)) {
            EXPECT_EQ(r.deviation, 0.0);
        }
    }
    auto self = compare_results(rows);
    EXPECT_EQ(self.rows.size(), 20u);
    for (const auto &r : self.rows) {
        EXPECT_NE(r.estimate.mode, "exact");
        EXPECT_EQ(r.reference.mode, "exact");
        EXPECT_EQ(r.estimate.t, r.reference.t);
        EXPECT_EQ(r.estimate.index, r.reference.index);
    }
    EXPECT_FALSE(format_summary(self).empty());

    std::vector<ResultRow> exact_only;
    for (const auto &r : rows) {
        if (r.mode == "exact") {
            exact_only.push_back(r);
        }
    }
    EXPECT_EQ(compare_results(rows, exact_only).rows.size(), 20u);
    auto truncated = rows;
    truncated.pop_back();
    EXPECT_THROW(compare_results(rows, truncated), RuntimeError);
    auto duplicated = rows;
    duplicated.push_back(rows.front());
    EXPECT_THROW(compare_results(duplicated), RuntimeError);
}

TEST_F(CliTest, CalibrateWritesMatrices) {
    json j = smoke();
    j["noise"] = "default";
    j["calibration_shots"] = 20000;
    auto cfg = write_config("cal.json", j);
    ASSERT_EQ(cli("calibrate -c " + cfg.string() + " -o " + (dir_ / "cal.json.out").string()), kExitOk)
        << captured("stderr.txt");
    EXPECT_TRUE(fs::exists(dir_ / "cal.json.out"));
    EXPECT_EQ(cli("calibrate -c " + write_config("plain.json", smoke()).string()), kExitConfig);
}

}  // namespace
}  // namespace opshadow::cli
