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

#ifndef OPSHADOW_RESULTS_H
#define OPSHADOW_RESULTS_H

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace opshadow {

/// One row of the results table. Exact rows use mode "exact", zero
/// std_error and zero sample counts.
struct ResultRow {
    int t = 0;
    std::string quantity;
    /// Region label: 1-based input qubits of A joined by ';', or "C=<j>" for D_k rows.
    std::string region;
    /// j_C (1-based) or k.
    int index = 0;
    double value = 0;
    double std_error = 0;
    int m_u = 0;
    int m_s = 0;
    std::string mode;
    bool mitigated = false;

    bool operator==(const ResultRow &) const = default;
};

inline constexpr std::string_view kCsvHeader = "t,quantity,A,jC_or_k,value,std_error,M_U,M_S,mode,mitigated";

/// Shortest round-trip form capped at 12 significant digits, locale independent.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string results_to_csv(const std::vector<ResultRow> &rows);
/// Throws std::invalid_argument on a header mismatch or malformed row.
std::vector<ResultRow> results_from_csv(std::string_view text);

void write_results(const std::vector<ResultRow> &rows, const std::filesystem::path &path);
std::vector<ResultRow> read_results(const std::filesystem::path &path);

}  // namespace opshadow

#endif
