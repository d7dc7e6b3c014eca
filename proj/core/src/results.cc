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

#include "opshadow/results.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace opshadow {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    if (ec != std::errc()) {
        throw std::runtime_error("float formatting failed");
    }
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

namespace {

int parse_int(std::string_view text) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow> &rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto &r : rows) {
        if (r.quantity.find(',') != std::string::npos || r.region.find(',') != std::string::npos ||
            r.mode.find(',') != std::string::npos) {
            throw std::invalid_argument("CSV fields may not contain commas");
        }
        out += std::to_string(r.t) + ',' + r.quantity + ',' + r.region + ',' + std::to_string(r.index) + ',' +
               format_double(r.value) + ',' + format_double(r.std_error) + ',' + std::to_string(r.m_u) + ',' +
               std::to_string(r.m_s) + ',' + r.mode + ',' + (r.mitigated ? "true" : "false") + '\n';
    }
    return out;
}

std::vector<ResultRow> results_from_csv(std::string_view text) {
    std::vector<ResultRow> rows;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        ++line_no;
        if (line_no == 1) {
            if (line != kCsvHeader) {
                throw std::invalid_argument("unexpected CSV header '" + std::string(line) + "'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto f = split(line);
        if (f.size() != 10) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                                        " fields, expected 10");
        }
        ResultRow r;
        try {
            r.t = parse_int(f[0]);
            r.quantity = std::string(f[1]);
            r.region = std::string(f[2]);
            r.index = parse_int(f[3]);
            r.value = parse_double(f[4]);
            r.std_error = parse_double(f[5]);
            r.m_u = parse_int(f[6]);
            r.m_s = parse_int(f[7]);
            r.mode = std::string(f[8]);
            if (f[9] != "true" && f[9] != "false") {
                throw std::invalid_argument("mitigated must be true or false");
            }
            r.mitigated = f[9] == "true";
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(r));
    }
    if (line_no == 0) {
        throw std::invalid_argument("empty CSV");
    }
    return rows;
}

void write_results(const std::vector<ResultRow> &rows, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << results_to_csv(rows);
}

std::vector<ResultRow> read_results(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return results_from_csv(ss.str());
}

}  // namespace opshadow
