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

#include "opshadow/shadow.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "opshadow/parallel.h"

namespace opshadow {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kInputNames = {"+X", "-X", "+Y", "-Y", "+Z", "-Z"};
constexpr std::array<std::string_view, 3> kBasisNames = {"Z", "X", "Y"};

std::uint64_t dim_of(int n) { return std::uint64_t{1} << n; }

}  // namespace

Pauli input_axis(InputLabel label) {
    switch (label) {
        case InputLabel::kPlusX:
        case InputLabel::kMinusX:
            return Pauli::X;
        case InputLabel::kPlusY:
        case InputLabel::kMinusY:
            return Pauli::Y;
        default:
            return Pauli::Z;
    }
}

int input_sign(InputLabel label) { return (static_cast<int>(label) % 2 == 0) ? 1 : -1; }

InputLabel flip_label(InputLabel label, bool flip) {
    if (!flip) {
        return label;
    }
    return static_cast<InputLabel>(static_cast<int>(label) ^ 1);
}

Pauli meas_axis(MeasBasis basis) {
    switch (basis) {
        case MeasBasis::kX:
            return Pauli::X;
        case MeasBasis::kY:
            return Pauli::Y;
        default:
            return Pauli::Z;
    }
}

std::string_view label_name(InputLabel label) { return kInputNames.at(static_cast<std::size_t>(label)); }

std::string_view basis_name(MeasBasis basis) { return kBasisNames.at(static_cast<std::size_t>(basis)); }

InputLabel parse_input_label(std::string_view text) {
    for (std::size_t i = 0; i < kInputNames.size(); ++i) {
        if (kInputNames[i] == text) {
            return static_cast<InputLabel>(i);
        }
    }
    throw std::invalid_argument("unknown input label '" + std::string(text) + "'");
}

MeasBasis parse_meas_basis(std::string_view text) {
    for (std::size_t i = 0; i < kBasisNames.size(); ++i) {
        if (kBasisNames[i] == text) {
            return static_cast<MeasBasis>(i);
        }
    }
    throw std::invalid_argument("unknown measurement basis '" + std::string(text) + "'");
}

Vector input_state(InputLabel label) {
    const double s = 1.0 / std::numbers::sqrt2;
    Vector v(2);
    switch (label) {
        case InputLabel::kPlusX:
            v << s, s;
            break;
        case InputLabel::kMinusX:
            v << s, -s;
            break;
        case InputLabel::kPlusY:
            v << s, Complex(0, s);
            break;
        case InputLabel::kMinusY:
            v << s, Complex(0, -s);
            break;
        case InputLabel::kPlusZ:
            v << 1, 0;
            break;
        case InputLabel::kMinusZ:
            v << 0, 1;
            break;
    }
    return v;
}

Matrix meas_rotation(MeasBasis basis) {
    const double s = 1.0 / std::numbers::sqrt2;
    Matrix v(2, 2);
    switch (basis) {
        case MeasBasis::kZ:
            v = Matrix::Identity(2, 2);
            break;
        case MeasBasis::kX:
            v << s, s, s, -s;
            break;
        case MeasBasis::kY:
            // H S^dag
            v << s, Complex(0, -s), s, Complex(0, s);
            break;
    }
    return v;
}

SettingPair sample_settings(CounterRng &rng, int n_qubits) {
    SettingPair out;
    out.input.reserve(static_cast<std::size_t>(n_qubits));
    out.meas.reserve(static_cast<std::size_t>(n_qubits));
    for (int j = 0; j < n_qubits; ++j) {
        out.input.push_back(static_cast<InputLabel>(rng.uniform_int(6)));
    }
    for (int j = 0; j < n_qubits; ++j) {
        out.meas.push_back(static_cast<MeasBasis>(rng.uniform_int(3)));
    }
    return out;
}

std::string_view mode_name(ProtocolMode mode) {
    return mode == ProtocolMode::kIdealOneShot ? "ideal" : "repeated";
}

ProtocolMode parse_mode(std::string_view text) {
    if (text == "ideal") {
        return ProtocolMode::kIdealOneShot;
    }
    if (text == "repeated") {
        return ProtocolMode::kRepeatedCircuit;
    }
    throw std::invalid_argument("unknown protocol mode '" + std::string(text) + "'");
}

bool ConfusionMatrix::singular() const {
    double floor = 1e-6;
    if (shots > 0) {
        floor = std::max(floor, 5.0 / std::sqrt(static_cast<double>(shots)));
    }
    return std::abs(determinant()) < floor;
}

void ShadowDataset::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("dataset qubit count out of range");
    }
    if (m_u < 0 || m_s < 1) {
        throw std::invalid_argument("dataset needs M_U >= 0 and M_S >= 1");
    }
    if (mode == ProtocolMode::kIdealOneShot && m_s != 1) {
        throw std::invalid_argument("ideal one-shot datasets have M_S = 1");
    }
    if (records.size() != static_cast<std::size_t>(m_u) * static_cast<std::size_t>(m_s)) {
        throw std::invalid_argument("dataset holds " + std::to_string(records.size()) + " records, expected M_U x M_S");
    }
    if (!confusion.empty() && static_cast<int>(confusion.size()) != n_qubits) {
        throw std::invalid_argument("dataset confusion table needs one matrix per qubit");
    }
    const std::uint64_t mask = ~(dim_of(n_qubits) - 1);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto &r = records[i];
        auto circuit = static_cast<int>(i / static_cast<std::size_t>(m_s));
        auto shot = static_cast<int>(i % static_cast<std::size_t>(m_s));
        if (r.circuit_id != circuit || r.shot != shot) {
            throw std::invalid_argument("dataset records are not grouped by circuit and shot");
        }
        if (static_cast<int>(r.settings.input.size()) != n_qubits ||
            static_cast<int>(r.settings.meas.size()) != n_qubits) {
            throw std::invalid_argument("record settings do not cover every qubit");
        }
        if ((r.a_bits & mask) || (r.b_bits & mask)) {
            throw std::invalid_argument("record bits exceed the register width");
        }
        if (shot > 0 && !(r.settings == records[i - 1].settings)) {
            throw std::invalid_argument("settings change within circuit " + std::to_string(circuit));
        }
        if (r.timestep != timestep) {
            throw std::invalid_argument("record timestep differs from the dataset timestep");
        }
    }
}

// ---------------------------------------------------------------------------
// Outcome model

namespace {

constexpr int kMaxPtmQubits = 5;

/// In-place Walsh-Hadamard transform along the rows of every column.
void walsh_rows(Eigen::MatrixXd &m) {
    auto n = static_cast<std::uint64_t>(m.rows());
    for (std::uint64_t h = 1; h < n; h <<= 1) {
        for (std::uint64_t i = 0; i < n; i += 2 * h) {
            for (std::uint64_t j = i; j < i + h; ++j) {
                Eigen::RowVectorXd x = m.row(static_cast<Eigen::Index>(j));
                Eigen::RowVectorXd y = m.row(static_cast<Eigen::Index>(j + h));
                m.row(static_cast<Eigen::Index>(j)) = x + y;
                m.row(static_cast<Eigen::Index>(j + h)) = x - y;
            }
        }
    }
}

std::uint64_t pauli_index_of_subset(std::uint64_t subset, const std::vector<Pauli> &axes) {
    std::uint64_t index = 0;
    for (std::size_t j = 0; j < axes.size(); ++j) {
        if (subset & (std::uint64_t{1} << j)) {
            index |= static_cast<std::uint64_t>(axes[j]) << (2 * j);
        }
    }
    return index;
}

}  // namespace

OutcomeModel::OutcomeModel(const Channel &channel) : n_qubits_(channel.n_qubits()), channel_(channel) {
    if (channel.is_unitary()) {
        unitary_ = channel.unitary();
    } else if (n_qubits_ <= kMaxPtmQubits) {
        ptm_ = pauli_transfer_matrix(channel);
    }
}

OutcomeModel OutcomeModel::extended(const Channel &step) const {
    if (step.n_qubits() != n_qubits_) {
        throw std::invalid_argument("step register does not match the model");
    }
    OutcomeModel out(*this);
    out.channel_.append(step);
    if (unitary_ && step.is_unitary()) {
        out.unitary_ = step.unitary() * *unitary_;
    } else if (unitary_ || ptm_) {
        out.unitary_.reset();
        if (n_qubits_ <= kMaxPtmQubits) {
            if (!ptm_) {
                out.ptm_ = pauli_transfer_matrix(channel_);
            }
            compose_pauli_transfer(*out.ptm_, step);
        } else {
            out.ptm_.reset();
        }
    }
    return out;
}

Eigen::MatrixXd OutcomeModel::distributions(const SettingPair &settings) const {
    const int n = n_qubits_;
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    if (static_cast<int>(settings.input.size()) != n || static_cast<int>(settings.meas.size()) != n) {
        throw std::invalid_argument("settings do not match the register");
    }
    if (unitary_) {
        Matrix amp = *unitary_;
        for (int j = 0; j < n; ++j) {
            Matrix prep(2, 2);
            prep.col(0) = input_state(settings.input[static_cast<std::size_t>(j)]);
            prep.col(1) = input_state(flip_label(settings.input[static_cast<std::size_t>(j)], true));
            int target[] = {j};
            apply_local_right_adjoint(amp, prep.adjoint(), target);
            apply_local_left(amp, meas_rotation(settings.meas[static_cast<std::size_t>(j)]), target);
        }
        Eigen::MatrixXd probs = amp.cwiseAbs2();
        for (Eigen::Index a = 0; a < d; ++a) {
            probs.col(a) /= probs.col(a).sum();
        }
        return probs;
    }

    std::vector<Pauli> in_axes, out_axes;
    std::uint64_t sign_mask = 0;
    for (int j = 0; j < n; ++j) {
        in_axes.push_back(input_axis(settings.input[static_cast<std::size_t>(j)]));
        out_axes.push_back(meas_axis(settings.meas[static_cast<std::size_t>(j)]));
        if (input_sign(settings.input[static_cast<std::size_t>(j)]) < 0) {
            sign_mask |= std::uint64_t{1} << j;
        }
    }
    // r(S, T) = 2^{-n} Tr[P_S N(Q_T)] restricted to the measured / prepared axes.
    Eigen::MatrixXd r(d, d);
    if (ptm_) {
        for (Eigen::Index t = 0; t < d; ++t) {
            auto col = static_cast<Eigen::Index>(pauli_index_of_subset(static_cast<std::uint64_t>(t), in_axes));
            for (Eigen::Index s = 0; s < d; ++s) {
                auto row = static_cast<Eigen::Index>(pauli_index_of_subset(static_cast<std::uint64_t>(s), out_axes));
                r(s, t) = (*ptm_)(row, col);
            }
        }
    } else {
        std::vector<PauliString> measured;
        for (Eigen::Index s = 0; s < d; ++s) {
            measured.push_back(PauliString::from_index(n, pauli_index_of_subset(static_cast<std::uint64_t>(s), out_axes)));
        }
        const double norm = 1.0 / static_cast<double>(d);
        for (Eigen::Index t = 0; t < d; ++t) {
            auto q = PauliString::from_index(n, pauli_index_of_subset(static_cast<std::uint64_t>(t), in_axes));
            Matrix evolved = channel_.apply_to_operator(q.to_matrix());
            for (Eigen::Index s = 0; s < d; ++s) {
                r(s, t) = norm * pauli_trace(measured[static_cast<std::size_t>(s)], evolved).real();
            }
        }
    }
    for (Eigen::Index t = 0; t < d; ++t) {
        if (std::popcount(static_cast<std::uint64_t>(t) & sign_mask) & 1) {
            r.col(t) = -r.col(t);
        }
    }
    // p(b|a) = 2^{-n} sum_{S,T} (-1)^{b.S} r(S,T) (-1)^{a.T}
    walsh_rows(r);
    Eigen::MatrixXd rt = r.transpose();
    walsh_rows(rt);
    Eigen::MatrixXd probs = rt.transpose() / static_cast<double>(d);
    probs = probs.cwiseMax(0.0);
    for (Eigen::Index a = 0; a < d; ++a) {
        probs.col(a) /= probs.col(a).sum();
    }
    return probs;
}

// ---------------------------------------------------------------------------
// Protocol

namespace {

std::uint64_t sample_column(const Eigen::MatrixXd &cdf, std::uint64_t a, double u) {
    auto col = cdf.col(static_cast<Eigen::Index>(a));
    const double *begin = col.data();
    const double *end = begin + col.size();
    const double *it = std::upper_bound(begin, end, u * *(end - 1));
    if (it == end) {
        --it;
    }
    return static_cast<std::uint64_t>(it - begin);
}

std::uint64_t apply_readout(std::uint64_t bits, const NoiseParams &noise, int n, CounterRng &rng) {
    for (int j = 0; j < n; ++j) {
        auto err = noise.readout_for(j);
        bool one = (bits >> j) & 1;
        double p = one ? err.p0_given_1 : err.p1_given_0;
        if (rng.uniform() < p) {
            bits ^= std::uint64_t{1} << j;
        }
    }
    return bits;
}

}  // namespace

ShadowDataset run_protocol(const CompiledCircuit &circuit, int t, const ProtocolOptions &options) {
    return run_protocol(OutcomeModel(circuit.prefix(t)), t, options);
}

ShadowDataset run_protocol(const OutcomeModel &model, int t, const ProtocolOptions &options) {
    const int n = model.n_qubits();
    if (options.m_u < 0) {
        throw std::invalid_argument("M_U must be non-negative");
    }
    if (options.m_s < 1) {
        throw std::invalid_argument("M_S must be at least 1");
    }
    if (options.mode == ProtocolMode::kIdealOneShot && options.m_s != 1) {
        throw std::invalid_argument("ideal one-shot mode requires M_S = 1");
    }
    if (options.noise) {
        options.noise->validate(n);
    }
    const bool readout = options.noise && options.noise->has_readout_error();

    ShadowDataset ds;
    ds.n_qubits = n;
    ds.timestep = t;
    ds.m_u = options.m_u;
    ds.m_s = options.m_s;
    ds.seed = options.seed;
    ds.mode = options.mode;
    ds.noise = options.noise;
    ds.records.resize(static_cast<std::size_t>(options.m_u) * static_cast<std::size_t>(options.m_s));
    const auto tt = static_cast<std::uint64_t>(t);
    const std::uint64_t d = dim_of(n);

    parallel_for(
        static_cast<std::size_t>(options.m_u),
        [&](std::size_t c) {
            auto setting_rng = CounterRng::stream(options.seed, StreamTag::kSettings, {tt, c});
            SettingPair settings = sample_settings(setting_rng, n);
            Eigen::MatrixXd cdf = model.distributions(settings);
            for (Eigen::Index a = 0; a < cdf.cols(); ++a) {
                for (Eigen::Index b = 1; b < cdf.rows(); ++b) {
                    cdf(b, a) += cdf(b - 1, a);
                }
            }
            for (int s = 0; s < options.m_s; ++s) {
                auto rng = CounterRng::stream(options.seed, StreamTag::kShot, {tt, c, static_cast<std::uint64_t>(s)});
                auto &rec = ds.records[c * static_cast<std::size_t>(options.m_s) + static_cast<std::size_t>(s)];
                rec.circuit_id = static_cast<int>(c);
                rec.shot = s;
                rec.timestep = t;
                rec.settings = settings;
                rec.a_bits = options.mode == ProtocolMode::kRepeatedCircuit ? rng.uniform_int(d) : 0;
                rec.b_bits = sample_column(cdf, rec.a_bits, rng.uniform());
                if (readout) {
                    rec.b_bits = apply_readout(rec.b_bits, *options.noise, n, rng);
                }
            }
        },
        options.workers);
    return ds;
}

// ---------------------------------------------------------------------------
// Readout calibration and mitigation

std::vector<ConfusionMatrix> exact_confusion(const NoiseParams &noise, int n_qubits) {
    noise.validate(n_qubits);
    std::vector<ConfusionMatrix> out;
    for (int j = 0; j < n_qubits; ++j) {
        auto err = noise.readout_for(j);
        ConfusionMatrix c;
        c.m << 1 - err.p1_given_0, err.p0_given_1, err.p1_given_0, 1 - err.p0_given_1;
        out.push_back(c);
    }
    return out;
}

std::vector<ConfusionMatrix> calibrate_readout(const NoiseParams &noise, int n_qubits, int shots, std::uint64_t seed) {
    if (shots < 100) {
        throw std::invalid_argument("calibration needs at least 100 shots");
    }
    noise.validate(n_qubits);
    std::vector<ConfusionMatrix> out;
    for (int j = 0; j < n_qubits; ++j) {
        auto err = noise.readout_for(j);
        ConfusionMatrix c;
        c.shots = shots;
        for (int prep = 0; prep < 2; ++prep) {
            auto rng = CounterRng::stream(seed, StreamTag::kCalibration,
                                          {static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(prep)});
            double p_flip = prep == 0 ? err.p1_given_0 : err.p0_given_1;
            int flips = 0;
            for (int s = 0; s < shots; ++s) {
                flips += rng.uniform() < p_flip ? 1 : 0;
            }
            double f = static_cast<double>(flips) / shots;
            c.m(prep, prep) = 1 - f;
            c.m(1 - prep, prep) = f;
        }
        if (c.singular()) {
            throw SingularConfusionError("confusion matrix of qubit " + std::to_string(j + 1) +
                                         " is singular (determinant " + std::to_string(c.determinant()) + ")");
        }
        out.push_back(c);
    }
    return out;
}

namespace {

std::vector<double> apply_per_bit(std::vector<double> v, const std::vector<Eigen::Matrix2d> &maps) {
    const std::size_t size = v.size();
    if (size != (std::size_t{1} << maps.size())) {
        throw std::invalid_argument("frequency table size does not match the number of confusion matrices");
    }
    for (std::size_t bit = 0; bit < maps.size(); ++bit) {
        const auto &m = maps[bit];
        const std::size_t stride = std::size_t{1} << bit;
        for (std::size_t i = 0; i < size; ++i) {
            if (i & stride) {
                continue;
            }
            double x0 = v[i], x1 = v[i | stride];
            v[i] = m(0, 0) * x0 + m(0, 1) * x1;
            v[i | stride] = m(1, 0) * x0 + m(1, 1) * x1;
        }
    }
    return v;
}

}  // namespace

std::vector<double> mitigate_counts(const std::vector<double> &frequencies,
                                    const std::vector<ConfusionMatrix> &confusion) {
    std::vector<Eigen::Matrix2d> inverses;
    for (std::size_t i = 0; i < confusion.size(); ++i) {
        if (confusion[i].singular()) {
            throw SingularConfusionError("confusion matrix " + std::to_string(i + 1) + " is singular");
        }
        inverses.push_back(confusion[i].m.inverse());
    }
    return apply_per_bit(frequencies, inverses);
}

std::vector<double> apply_confusion(const std::vector<double> &frequencies,
                                    const std::vector<ConfusionMatrix> &confusion) {
    std::vector<Eigen::Matrix2d> maps;
    for (const auto &c : confusion) {
        maps.push_back(c.m);
    }
    return apply_per_bit(frequencies, maps);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string bits_to_string(std::uint64_t bits, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int j = 0; j < n; ++j) {
        if ((bits >> j) & 1) {
            s[static_cast<std::size_t>(j)] = '1';
        }
    }
    return s;
}

std::uint64_t bits_from_string(const std::string &s, int n) {
    if (static_cast<int>(s.size()) != n) {
        throw std::invalid_argument("bit string '" + s + "' has the wrong length");
    }
    std::uint64_t bits = 0;
    for (int j = 0; j < n; ++j) {
        char ch = s[static_cast<std::size_t>(j)];
        if (ch == '1') {
            bits |= std::uint64_t{1} << j;
        } else if (ch != '0') {
            throw std::invalid_argument("bit string '" + s + "' contains a non-binary character");
        }
    }
    return bits;
}

}  // namespace

std::string dataset_to_jsonl(const ShadowDataset &dataset) {
    std::string out;
    for (const auto &r : dataset.records) {
        json line;
        line["circuit_id"] = r.circuit_id;
        line["shot"] = r.shot;
        json in = json::array(), meas = json::array();
        for (auto l : r.settings.input) {
            in.push_back(label_name(l));
        }
        for (auto b : r.settings.meas) {
            meas.push_back(basis_name(b));
        }
        line["input"] = std::move(in);
        line["meas"] = std::move(meas);
        line["a"] = bits_to_string(r.a_bits, dataset.n_qubits);
        line["b"] = bits_to_string(r.b_bits, dataset.n_qubits);
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string dataset_meta_json(const ShadowDataset &dataset) {
    json doc;
    doc["schema"] = kShadowSchema;
    doc["n_qubits"] = dataset.n_qubits;
    doc["t"] = dataset.timestep;
    doc["M_U"] = dataset.m_u;
    doc["M_S"] = dataset.m_s;
    doc["seed"] = dataset.seed;
    doc["mode"] = mode_name(dataset.mode);
    doc["circuit_model"] = dataset.circuit_model;
    doc["records"] = dataset.records.size();
    doc["bit_order"] = "character j is qubit j+1";
    doc["noise"] = dataset.noise ? json::parse(noise_to_json(*dataset.noise)) : json(nullptr);
    json conf = json::array();
    for (const auto &c : dataset.confusion) {
        conf.push_back({{"matrix", {{c.m(0, 0), c.m(0, 1)}, {c.m(1, 0), c.m(1, 1)}}}, {"shots", c.shots}});
    }
    doc["confusion"] = std::move(conf);
    return doc.dump(2);
}

ShadowDataset dataset_from_json(std::string_view meta_json, std::string_view jsonl) {
    ShadowDataset ds;
    try {
        json meta = json::parse(meta_json);
        if (meta.at("schema").get<std::string>() != kShadowSchema) {
            throw std::invalid_argument("unsupported shadow schema '" + meta.at("schema").get<std::string>() + "'");
        }
        ds.n_qubits = meta.at("n_qubits").get<int>();
        ds.timestep = meta.at("t").get<int>();
        ds.m_u = meta.at("M_U").get<int>();
        ds.m_s = meta.at("M_S").get<int>();
        ds.seed = meta.at("seed").get<std::uint64_t>();
        ds.mode = parse_mode(meta.at("mode").get<std::string>());
        ds.circuit_model = meta.value("circuit_model", "");
        if (meta.contains("noise") && !meta.at("noise").is_null()) {
            ds.noise = noise_from_json(meta.at("noise").dump());
        }
        for (const auto &c : meta.value("confusion", json::array())) {
            ConfusionMatrix cm;
            const auto &m = c.at("matrix");
            cm.m << m.at(0).at(0).get<double>(), m.at(0).at(1).get<double>(), m.at(1).at(0).get<double>(),
                m.at(1).at(1).get<double>();
            cm.shots = c.value("shots", 0);
            ds.confusion.push_back(cm);
        }
        std::istringstream lines{std::string(jsonl)};
        std::string text;
        while (std::getline(lines, text)) {
            if (text.empty()) {
                continue;
            }
            json line = json::parse(text);
            SnapshotRecord r;
            r.circuit_id = line.at("circuit_id").get<int>();
            r.shot = line.at("shot").get<int>();
            r.timestep = ds.timestep;
            for (const auto &l : line.at("input")) {
                r.settings.input.push_back(parse_input_label(l.get<std::string>()));
            }
            for (const auto &b : line.at("meas")) {
                r.settings.meas.push_back(parse_meas_basis(b.get<std::string>()));
            }
            r.a_bits = bits_from_string(line.at("a").get<std::string>(), ds.n_qubits);
            r.b_bits = bits_from_string(line.at("b").get<std::string>(), ds.n_qubits);
            ds.records.push_back(std::move(r));
        }
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("malformed shadow dataset: ") + e.what());
    }
    ds.validate();
    return ds;
}

namespace {

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

void write_dataset(const ShadowDataset &dataset, const std::filesystem::path &jsonl_path,
                   const std::filesystem::path &meta_path) {
    write_file(jsonl_path, dataset_to_jsonl(dataset));
    write_file(meta_path, dataset_meta_json(dataset) + "\n");
}

ShadowDataset read_dataset(const std::filesystem::path &jsonl_path, const std::filesystem::path &meta_path) {
    return dataset_from_json(read_file(meta_path), read_file(jsonl_path));
}

}  // namespace opshadow
