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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opshadow/cli/experiment.h"

namespace cli = opshadow::cli;

int main(int argc, char **argv) {
    CLI::App app{"opshadow: operator-space shadow experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", OPSHADOW_VERSION);

    std::string config;
    cli::RunOptions opts;
    std::string out;
    std::string profile;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("-c,--config", config, "Experiment config or run manifest (JSON)")->required();
        sub->add_option("-o,--out", out, "Output directory (overrides output_dir)");
        sub->add_flag("-f,--force", opts.force, "Overwrite artifacts in a non-empty output directory");
        sub->add_flag("--deterministic", opts.deterministic, "Record deterministic reductions in the manifest");
        sub->add_option("--profile", profile, "Sampling profile")->check(CLI::IsMember({"desk", "paper"}));
        sub->add_option("-j,--workers", opts.workers, "Worker threads (default: OPSHADOW_WORKERS)")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("-v,--verbose", opts.verbose, "Progress on stderr");
    };
    auto *run = app.add_subcommand("run", "Sample shadows, estimate and write shadow plus exact rows");
    add_common(run);
    auto *oracle = app.add_subcommand("oracle", "Write exact rows only");
    add_common(oracle);

    auto *compare = app.add_subcommand("compare", "Compare a results file with its exact rows or with a second file");
    std::vector<std::string> files;
    compare->add_option("files", files, "One or two results CSV files")->required()->expected(1, 2);
    compare->add_option("-o,--out", out, "Write the per-row comparison as CSV");

    auto *calibrate = app.add_subcommand("calibrate", "Estimate readout confusion matrices");
    calibrate->add_option("-c,--config", config, "Experiment config with a readout model")->required();
    calibrate->add_option("-o,--out", out, "Write the calibration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfig;
    }
    if (!out.empty()) {
        opts.out = out;
    }
    if (!profile.empty()) {
        opts.profile = profile;
    }

    try {
        if (run->parsed()) {
            return cli::cmd_run(config, opts);
        }
        if (oracle->parsed()) {
            return cli::cmd_oracle(config, opts);
        }
        if (compare->parsed()) {
            std::vector<std::filesystem::path> paths(files.begin(), files.end());
            return cli::cmd_compare(paths, opts.out);
        }
        return cli::cmd_calibrate(config, opts);
    } catch (const cli::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitRuntime;
    }
}
