// Copyright 2026 The ERI Toolkit Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eri/objectives/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "eri/common/error.hpp"

namespace eri::objectives {

namespace {

void check_pair(std::span<const EmotionVector> pred, std::span<const EmotionVector> target, const char* op) {
    require(pred.size() == target.size(), ErrorKind::Validation,
            std::string(op) + ": " + std::to_string(pred.size()) + " predictions vs " + std::to_string(target.size()) +
                " targets");
}

std::vector<double> column(std::span<const EmotionVector> rows, std::size_t e) {
    std::vector<double> c(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) c[i] = rows[i][e];
    return c;
}

} // namespace

double mse(std::span<const EmotionVector> pred, std::span<const EmotionVector> target) {
    check_pair(pred, target, "mse");
    require(!pred.empty(), ErrorKind::Validation, "mse: needs at least one sample");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t e = 0; e < kNumEmotions; ++e) {
            const double d = pred[i][e] - target[i][e];
            s += d * d;
        }
    }
    return s / static_cast<double>(pred.size() * kNumEmotions);
}

double pcc(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorKind::Validation, "pcc: length mismatch");
    require(x.size() >= 2, ErrorKind::Validation, "pcc: needs at least 2 samples, got " + std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx / n < kVarianceGuard || syy / n < kVarianceGuard) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

MetricReport mean_pcc(std::span<const EmotionVector> pred, std::span<const EmotionVector> target) {
    check_pair(pred, target, "mean_pcc");
    require(pred.size() >= 2, ErrorKind::Validation,
            "mean_pcc: needs at least 2 samples, got " + std::to_string(pred.size()));
    MetricReport r;
    r.n_samples = pred.size();
    r.mse = mse(pred, target);
    double s = 0.0;
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
        r.per_emotion_pcc[e] = pcc(column(pred, e), column(target, e));
        s += r.per_emotion_pcc[e];
    }
    r.mean_pcc = s / static_cast<double>(kNumEmotions);
    return r;
}

CorrMatrix label_corr_matrix(std::span<const EmotionVector> labels) {
    require(labels.size() >= 2, ErrorKind::Validation,
            "label_corr_matrix: needs at least 2 labels, got " + std::to_string(labels.size()));
    std::array<std::vector<double>, kNumEmotions> cols;
    for (std::size_t e = 0; e < kNumEmotions; ++e) cols[e] = column(labels, e);
    CorrMatrix m{};
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
        for (std::size_t j = i; j < kNumEmotions; ++j) {
            const double r = pcc(cols[i], cols[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    return m;
}

nlohmann::json to_json(const MetricReport& r) {
    nlohmann::json j;
    j["mse"] = r.mse;
    j["per_emotion_pcc"] = r.per_emotion_pcc;
    j["mean_pcc"] = r.mean_pcc;
    j["n_samples"] = r.n_samples;
    return j;
}

MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    r.mse = j.at("mse").get<double>();
    r.per_emotion_pcc = j.at("per_emotion_pcc").get<std::array<double, kNumEmotions>>();
    r.mean_pcc = j.at("mean_pcc").get<double>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    return r;
}

void write_corr_csv(const CorrMatrix& m, const featstore::EmotionNames& names, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out << "emotion";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
        out << names[i];
        for (std::size_t j = 0; j < kNumEmotions; ++j) {
            std::snprintf(buf, sizeof buf, "%.6f", m[i][j]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace eri::objectives
