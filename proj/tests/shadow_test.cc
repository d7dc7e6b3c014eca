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
#include <filesystem>
#include <map>
#include <stdexcept>

#include <gtest/gtest.h>

#include "opshadow/circuits.h"
#include "opshadow/estimators.h"
#include "opshadow/shadow.h"
#include "test_util.h"

namespace opshadow {
namespace {

using testing::cnot_channel;
using testing::random_channel;

TEST(SampleSettings, LabelFrequencies) {
    auto rng = CounterRng::stream(3, StreamTag::kTest, {31});
    std::map<int, int> inputs, meas;
    for (int i = 0; i < 60000; ++i) {
        auto s = sample_settings(rng, 1);
        ++inputs[static_cast<int>(s.input[0])];
        if (i < 30000) {
            ++meas[static_cast<int>(s.meas[0])];
        }
    }
    auto within = [](int count, int n, double p) {
        return std::abs(count - n * p) < 5 * std::sqrt(n * p * (1 - p));
    };
    ASSERT_EQ(inputs.size(), 6u);
    for (auto [label, count] : inputs) {
        EXPECT_TRUE(within(count, 60000, 1.0 / 6)) << label << " " << count;
    }
    ASSERT_EQ(meas.size(), 3u);
    for (auto [label, count] : meas) {
        EXPECT_TRUE(within(count, 30000, 1.0 / 3)) << label << " " << count;
    }
}

TEST(SampleSettings, Deterministic) {
    auto a = CounterRng::stream(9, StreamTag::kSettings, {1, 2});
    auto b = CounterRng::stream(9, StreamTag::kSettings, {1, 2});
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(sample_settings(a, 5), sample_settings(b, 5));
    }
}

TEST(Labels, NamesRoundTrip) {
    for (int i = 0; i < 6; ++i) {
        auto l = static_cast<InputLabel>(i);
        EXPECT_EQ(parse_input_label(label_name(l)), l);
        EXPECT_EQ(flip_label(flip_label(l, true), true), l);
        EXPECT_EQ(input_axis(flip_label(l, true)), input_axis(l));
        EXPECT_EQ(input_sign(flip_label(l, true)), -input_sign(l));
    }
    for (int i = 0; i < 3; ++i) {
        auto b = static_cast<MeasBasis>(i);
        EXPECT_EQ(parse_meas_basis(basis_name(b)), b);
    }
    EXPECT_THROW(parse_input_label("+W"), std::invalid_argument);
    EXPECT_THROW(parse_meas_basis("Q"), std::invalid_argument);
}

TEST(Labels, StatesAreSignedEigenstates) {
    for (int i = 0; i < 6; ++i) {
        auto l = static_cast<InputLabel>(i);
        Vector v = input_state(l);
        Matrix p = pauli_matrix(input_axis(l));
        EXPECT_LT((p * v - static_cast<double>(input_sign(l)) * v).norm(), 1e-14);
    }
    for (int i = 0; i < 3; ++i) {
        auto b = static_cast<MeasBasis>(i);
        Matrix v = meas_rotation(b);
        Matrix rotated = v * pauli_matrix(meas_axis(b)) * v.adjoint();
        EXPECT_TRUE(rotated.isApprox(pauli_matrix(Pauli::Z), 1e-14));
    }
}

TEST(RunProtocol, IdentityOutcomes) {
    OutcomeModel model(Channel(1));
    for (auto [in, m] : {std::pair{InputLabel::kPlusZ, MeasBasis::kZ}, std::pair{InputLabel::kPlusX, MeasBasis::kX},
                         std::pair{InputLabel::kMinusY, MeasBasis::kY}}) {
        Eigen::MatrixXd dist = model.distributions({{in}, {m}});
        double expected = input_sign(in) > 0 ? 1.0 : 0.0;
        EXPECT_NEAR(dist(0, 0), expected, 1e-12);
        EXPECT_NEAR(dist(1, 1), expected, 1e-12);
    }
    // Ideal mode prepares U|0>; count shots whose settings are (+Z, Z) or (+X, X).
    ProtocolOptions opts;
    opts.m_u = 20000;
    opts.m_s = 1;
    opts.seed = 5;
    opts.mode = ProtocolMode::kIdealOneShot;
    auto ds = run_protocol(OutcomeModel(Channel(1)), 0, opts);
    int checked = 0;
    for (const auto &r : ds.records) {
        auto in = r.settings.input[0];
        auto m = r.settings.meas[0];
        if ((in == InputLabel::kPlusZ && m == MeasBasis::kZ) || (in == InputLabel::kPlusX && m == MeasBasis::kX)) {
            EXPECT_EQ(r.b_bits, 0u);
            EXPECT_EQ(r.a_bits, 0u);
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000);
}

TEST(RunProtocol, UniformInputBits) {
    ProtocolOptions opts;
    opts.m_u = 64;
    opts.m_s = 256;
    opts.seed = 11;
    auto ds = run_protocol(OutcomeModel(random_channel(3, 4, 1)), 2, opts);
    ds.validate();
    std::vector<double> counts(8, 0);
    for (const auto &r : ds.records) {
        counts[r.a_bits] += 1;
    }
    double expected = static_cast<double>(ds.records.size()) / 8;
    double chi2 = 0;
    for (double c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 7 degrees of freedom, p = 0.01
    EXPECT_LT(chi2, 18.475);
}

TEST(RunProtocol, DeterministicAndGrouped) {
    ProtocolOptions opts;
    opts.m_u = 10;
    opts.m_s = 8;
    opts.seed = 77;
    OutcomeModel model(random_channel(3, 3, 2));
    auto a = run_protocol(model, 1, opts);
    opts.workers = 1;
    auto b = run_protocol(model, 1, opts);
    EXPECT_EQ(a.records, b.records);
    ASSERT_EQ(a.records.size(), 80u);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].circuit_id, static_cast<int>(i / 8));
        EXPECT_EQ(a.records[i].shot, static_cast<int>(i % 8));
        EXPECT_EQ(a.records[i].settings, a.records[i - i % 8].settings);
    }
    opts.mode = ProtocolMode::kIdealOneShot;
    EXPECT_THROW(run_protocol(model, 1, opts), std::invalid_argument);
}

Matrix product_rotation(const SettingPair &s) {
    Matrix v = meas_rotation(s.meas[0]);
    for (std::size_t j = 1; j < s.meas.size(); ++j) {
        v = kron(meas_rotation(s.meas[j]), v);
    }
    return v;
}

Eigen::MatrixXd oracle_distributions(const Channel &ch, const SettingPair &s) {
    const int n = ch.n_qubits();
    const Eigen::Index d = Eigen::Index{1} << n;
    Matrix v = product_rotation(s);
    Eigen::MatrixXd out(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        Vector psi = input_state(flip_label(s.input[0], a & 1));
        for (int j = 1; j < n; ++j) {
            Vector next = kron(input_state(flip_label(s.input[static_cast<std::size_t>(j)], (a >> j) & 1)), psi);
            psi = next;
        }
        Matrix rho = ch.apply(DensityOperator(n, psi * psi.adjoint())).matrix();
        Matrix rotated = v * rho * v.adjoint();
        for (Eigen::Index b = 0; b < d; ++b) {
            out(b, a) = rotated(b, b).real();
        }
    }
    return out;
}

TEST(OutcomeModel, MatchesDensityOracle) {
    auto rng = CounterRng::stream(4, StreamTag::kTest, {41});
    for (double noise : {0.0, 0.05}) {
        Channel ch = random_channel(3, 5, 3, noise);
        OutcomeModel model(ch);
        for (int trial = 0; trial < 10; ++trial) {
            auto s = sample_settings(rng, 3);
            EXPECT_LT((model.distributions(s) - oracle_distributions(ch, s)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(OutcomeModel, ExtendedMatchesComposed) {
    auto rng = CounterRng::stream(5, StreamTag::kTest, {42});
    for (double noise : {0.0, 0.05}) {
        Channel first = random_channel(3, 3, 4, noise);
        Channel second = random_channel(3, 3, 5, noise);
        Channel whole = first;
        whole.append(second);
        OutcomeModel ext = OutcomeModel(first).extended(second);
        OutcomeModel direct(whole);
        for (int trial = 0; trial < 5; ++trial) {
            auto s = sample_settings(rng, 3);
            EXPECT_LT((ext.distributions(s) - direct.distributions(s)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
    EXPECT_THROW(OutcomeModel(Channel(2)).extended(Channel(3)), std::invalid_argument);
}

TEST(RunProtocol, BornRuleTotalVariation) {
    Channel ch = random_channel(2, 4, 6);
    ProtocolOptions opts;
    opts.m_u = 1;
    opts.m_s = 10000;
    opts.seed = 8;
    auto ds = run_protocol(OutcomeModel(ch), 1, opts);
    Eigen::MatrixXd exact = oracle_distributions(ch, ds.records[0].settings) / 4.0;
    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(4, 4);
    for (const auto &r : ds.records) {
        freq(static_cast<Eigen::Index>(r.b_bits), static_cast<Eigen::Index>(r.a_bits)) += 1.0 / opts.m_s;
    }
    double tv = 0.5 * (freq - exact).cwiseAbs().sum();
    EXPECT_LT(tv, 5.0 / std::sqrt(opts.m_s));
}

TEST(RunProtocol, ReadoutFlipsAtConfiguredRate) {
    NoiseParams noise;
    noise.readout = {{0.1, 0.0}};
    ProtocolOptions opts;
    opts.m_u = 1;
    opts.m_s = 20000;
    opts.seed = 9;
    opts.mode = ProtocolMode::kRepeatedCircuit;
    opts.noise = noise;
    auto ds = run_protocol(OutcomeModel(Channel(1)), 0, opts);
    // Identity channel: b equals the noiseless outcome unless flipped from 0 to 1.
    OutcomeModel model(Channel(1));
    auto dist = model.distributions(ds.records[0].settings);
    int zero_prob_one = 0, ones = 0;
    for (const auto &r : ds.records) {
        if (dist(0, static_cast<Eigen::Index>(r.a_bits)) > 0.999) {
            ++zero_prob_one;
            ones += static_cast<int>(r.b_bits);
        }
    }
    if (zero_prob_one > 1000) {
        double rate = static_cast<double>(ones) / zero_prob_one;
        EXPECT_NEAR(rate, 0.1, 5 * std::sqrt(0.09 / zero_prob_one));
    }
}

TEST(Calibrate, ZeroNoiseGivesIdentity) {
    auto c = calibrate_readout(NoiseParams{}, 3, 1000, 1);
    ASSERT_EQ(c.size(), 3u);
    for (const auto &m : c) {
        EXPECT_TRUE(m.m.isApprox(Eigen::Matrix2d::Identity()));
    }
}

TEST(Calibrate, BinomialAccuracy) {
    NoiseParams noise;
    noise.readout = {{0.02, 0.03}};
    const int shots = 100000;
    auto c = calibrate_readout(noise, 2, shots, 12);
    for (const auto &m : c) {
        EXPECT_NEAR(m.m.col(0).sum(), 1.0, 1e-15);
        EXPECT_NEAR(m.m.col(1).sum(), 1.0, 1e-15);
        EXPECT_NEAR(m.m(1, 0), 0.02, 3 * std::sqrt(0.02 * 0.98 / shots));
        EXPECT_NEAR(m.m(0, 1), 0.03, 3 * std::sqrt(0.03 * 0.97 / shots));
    }
}

TEST(Calibrate, SingularAtHalf) {
    NoiseParams noise;
    noise.readout = {{0.5, 0.5}};
    EXPECT_THROW(calibrate_readout(noise, 1, 1000, 1), SingularConfusionError);
    EXPECT_THROW(calibrate_readout(NoiseParams{}, 1, 50, 1), std::invalid_argument);
}

TEST(Mitigate, Examples) {
    std::vector<double> freq = {0.6, 0.1, 0.2, 0.1};
    std::vector<ConfusionMatrix> id(2);
    EXPECT_EQ(mitigate_counts(freq, id), freq);

    ConfusionMatrix c;
    c.m << 0.97, 0.0, 0.03, 1.0;
    auto out = mitigate_counts({0.97, 0.03}, {c});
    EXPECT_NEAR(out[0], 1.0, 1e-9);
    EXPECT_NEAR(out[1], 0.0, 1e-9);

    ConfusionMatrix c2;
    c2.m << 0.9, 0.05, 0.1, 0.95;
    auto mitigated = mitigate_counts(freq, {c, c2});
    auto back = apply_confusion(mitigated, {c, c2});
    for (std::size_t i = 0; i < freq.size(); ++i) {
        EXPECT_NEAR(back[i], freq[i], 1e-9);
    }

    ConfusionMatrix half;
    half.m << 0.5, 0.5, 0.5, 0.5;
    EXPECT_THROW(mitigate_counts({0.5, 0.5}, {half}), SingularConfusionError);
    EXPECT_THROW(mitigate_counts(freq, {c}), std::invalid_argument);
}

TEST(Mitigate, BitOrderFollowsQubitIndex) {
    ConfusionMatrix flip;
    flip.m << 0.0, 1.0, 1.0, 0.0;
    ConfusionMatrix id;
    // Qubit 0 fully flipped: index 1 (qubit 0 set) maps to index 0.
    auto out = mitigate_counts({0.0, 1.0, 0.0, 0.0}, {flip, id});
    EXPECT_NEAR(out[0], 1.0, 1e-12);
    EXPECT_NEAR(out[1], 0.0, 1e-12);
}

ShadowDataset sample_dataset() {
    ProtocolOptions opts;
    opts.m_u = 6;
    opts.m_s = 4;
    opts.seed = 21;
    opts.noise = NoiseParams::defaults();
    auto ds = run_protocol(OutcomeModel(random_channel(3, 2, 7)), 3, opts);
    ds.circuit_model = "custom";
    ds.confusion = exact_confusion(*opts.noise, 3);
    return ds;
}

void expect_same(const ShadowDataset &a, const ShadowDataset &b) {
    EXPECT_EQ(a.n_qubits, b.n_qubits);
    EXPECT_EQ(a.timestep, b.timestep);
    EXPECT_EQ(a.m_u, b.m_u);
    EXPECT_EQ(a.m_s, b.m_s);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.mode, b.mode);
    EXPECT_EQ(a.circuit_model, b.circuit_model);
    EXPECT_EQ(a.noise, b.noise);
    EXPECT_EQ(a.confusion, b.confusion);
    EXPECT_EQ(a.records, b.records);
}

TEST(DatasetJson, RoundTrip) {
    auto ds = sample_dataset();
    auto back = dataset_from_json(dataset_meta_json(ds), dataset_to_jsonl(ds));
    expect_same(ds, back);

    auto dir = std::filesystem::temp_directory_path() / "opshadow_shadow_test";
    std::filesystem::create_directories(dir);
    write_dataset(ds, dir / "s.jsonl", dir / "s.meta.json");
    expect_same(ds, read_dataset(dir / "s.jsonl", dir / "s.meta.json"));
    std::filesystem::remove_all(dir);
}

TEST(DatasetJson, RejectsMalformed) {
    auto ds = sample_dataset();
    auto meta = dataset_meta_json(ds);
    auto lines = dataset_to_jsonl(ds);
    EXPECT_THROW(dataset_from_json(meta, lines.substr(0, lines.size() / 2)), std::invalid_argument);
    EXPECT_THROW(dataset_from_json("{}", lines), std::invalid_argument);
}

TEST(Dataset, ValidateCatchesBrokenGrouping) {
    auto ds = sample_dataset();
    EXPECT_NO_THROW(ds.validate());
    auto dropped = ds;
    dropped.records.pop_back();
    EXPECT_THROW(dropped.validate(), std::invalid_argument);
    auto changed = ds;
    changed.records[1].settings.meas[0] =
        changed.records[1].settings.meas[0] == MeasBasis::kZ ? MeasBasis::kX : MeasBasis::kZ;
    EXPECT_THROW(changed.validate(), std::invalid_argument);
    auto wide = ds;
    wide.records[0].b_bits = 8;
    EXPECT_THROW(wide.validate(), std::invalid_argument);
}

TEST(SnapshotFactor, Examples) {
    SnapshotRecord r;
    r.settings = {{InputLabel::kPlusZ}, {MeasBasis::kZ}};
    r.a_bits = 0;
    r.b_bits = 1;
    Matrix in = snapshot_factor(r, 0, Side::kInput);
    Matrix out = snapshot_factor(r, 0, Side::kOutput);
    Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
    d1(0, 0) = 2;
    d1(1, 1) = -1;
    d2(0, 0) = -1;
    d2(1, 1) = 2;
    EXPECT_TRUE(in.isApprox(d1, 1e-14));
    EXPECT_TRUE(out.isApprox(d2, 1e-14));
    for (int i = 0; i < 6; ++i) {
        for (int m = 0; m < 3; ++m) {
            r.settings = {{static_cast<InputLabel>(i)}, {static_cast<MeasBasis>(m)}};
            EXPECT_NEAR(std::abs(snapshot_factor(r, 0, Side::kInput).trace() - 1.0), 0, 1e-14);
            EXPECT_NEAR(std::abs(snapshot_factor(r, 0, Side::kOutput).trace() - 1.0), 0, 1e-14);
        }
    }
}

TEST(SnapshotFactor, InputSideIsTransposedProjector) {
    SnapshotRecord r;
    r.settings = {{InputLabel::kPlusY}, {MeasBasis::kZ}};
    r.a_bits = 1;
    Vector v = input_state(InputLabel::kMinusY);
    Matrix expected = 3.0 * (v * v.adjoint()).transpose() - Matrix::Identity(2, 2);
    EXPECT_TRUE(snapshot_factor(r, 0, Side::kInput).isApprox(expected, 1e-14));
}

TEST(SnapshotFactor, AverageIsIdentityChoiState) {
    ProtocolOptions opts;
    opts.m_u = 100000;
    opts.m_s = 1;
    opts.seed = 13;
    opts.mode = ProtocolMode::kIdealOneShot;
    auto ds = run_protocol(OutcomeModel(Channel(1)), 0, opts);
    Region region{{0}, {0}};
    Matrix sum = Matrix::Zero(4, 4);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(4, 4);
    for (const auto &r : ds.records) {
        Matrix s = reduced_snapshot(r, region);
        sum += s;
        sq += s.real().cwiseAbs2() + s.imag().cwiseAbs2();
    }
    const double n = static_cast<double>(ds.records.size());
    Matrix mean = sum / n;
    Matrix bell = Matrix::Zero(4, 4);
    bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            double var = sq(i, j) / n - std::norm(mean(i, j));
            double sigma = std::sqrt(std::max(var, 0.0) / n);
            EXPECT_LE(std::abs(mean(i, j) - bell(i, j)), 3 * sigma + 1e-12) << i << "," << j;
        }
    }
}

}  // namespace
}  // namespace opshadow
