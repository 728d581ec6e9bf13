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

#include "eri/ensembler/ensembler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "eri/common/error.hpp"
#include "eri/objectives/metrics.hpp"

namespace eri::ensembler {

using featstore::EmotionVector;
using featstore::kNumEmotions;

namespace {

// Pairwise sum of w[i] * x[i] over [lo, hi).
double pairwise(std::span<const double> x, std::span<const double> w, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return w[lo] * x[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise(x, w, lo, mid) + pairwise(x, w, mid, hi);
}

std::vector<double> normalized(std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    std::vector<double> out(w.begin(), w.end());
    for (auto& v : out) v /= s;
    return out;
}

std::vector<trainer::Predictions> member_predictions(const EnsembleSpec& spec,
                                                     const featstore::DatasetManifest& manifest,
                                                     featstore::Split split) {
    std::vector<trainer::Predictions> preds;
    for (const auto& path : spec.members) {
        const auto ckpt = encoders::read_checkpoint(path);
        try {
            trainer::check_compatible(ckpt, manifest);
        } catch (const Error& e) {
            fail(ErrorKind::Data, "ensemble member " + path.string() + " is incompatible: " + e.what());
        }
        preds.push_back(trainer::predict(ckpt, manifest, split));
    }
    return preds;
}

} // namespace

EnsembleSpec EnsembleSpec::uniform(std::vector<std::filesystem::path> members) {
    EnsembleSpec s;
    s.members = std::move(members);
    return s;
}

std::vector<double> EnsembleSpec::resolved_weights() const {
    if (weights.empty()) return std::vector<double>(members.size(), 1.0 / static_cast<double>(members.size()));
    return weights;
}

void EnsembleSpec::validate() const {
    require(!members.empty(), ErrorKind::Config, "ensemble needs at least one member");
    if (weights.empty()) return;
    require(weights.size() == members.size(), ErrorKind::Config,
            "ensemble.weights has " + std::to_string(weights.size()) + " entries for " +
                std::to_string(members.size()) + " members");
    double s = 0.0;
    for (double w : weights) {
        require(std::isfinite(w) && w > 0.0, ErrorKind::Config, "ensemble.weights must be positive");
        s += w;
    }
    require(std::abs(s - 1.0) <= 1e-12, ErrorKind::Config, "ensemble.weights must sum to 1");
}

trainer::Predictions combine(std::span<const trainer::Predictions> members, std::span<const double> weights) {
    require(!members.empty(), ErrorKind::Validation, "combine: no members");
    require(weights.size() == members.size(), ErrorKind::Validation, "combine: weight count mismatch");
    const auto& ref = members[0];
    require(!ref.values.empty(), ErrorKind::Data, "ensemble over an empty split");
    for (const auto& m : members) {
        require(m.sample_ids == ref.sample_ids, ErrorKind::Data, "ensemble members disagree on sample ids");
    }
    trainer::Predictions out;
    out.sample_ids = ref.sample_ids;
    out.values.resize(ref.values.size());
    std::vector<double> column(members.size());
    for (std::size_t i = 0; i < ref.values.size(); ++i) {
        for (std::size_t e = 0; e < kNumEmotions; ++e) {
            for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m].values[i][e];
            out.values[i][e] = std::clamp(pairwise(column, weights, 0, members.size()), 0.0, 1.0);
        }
    }
    return out;
}

trainer::Predictions ensemble_predict(const EnsembleSpec& spec, const featstore::DatasetManifest& manifest,
                                      featstore::Split split) {
    spec.validate();
    const auto preds = member_predictions(spec, manifest, split);
    const auto w = spec.resolved_weights();
    return combine(preds, w);
}

std::vector<IncrementalRow> incremental_report(std::span<const trainer::Predictions> members,
                                               std::span<const std::string> member_ids, std::span<const double> weights,
                                               std::span<const EmotionVector> labels) {
    require(!members.empty(), ErrorKind::Validation, "incremental_report: no members");
    require(member_ids.size() == members.size() && weights.size() == members.size(), ErrorKind::Validation,
            "incremental_report: members, ids and weights must align");
    std::vector<IncrementalRow> rows;
    for (std::size_t k = 1; k <= members.size(); ++k) {
        const auto w = normalized(weights.first(k));
        const auto p = combine(members.first(k), w);
        rows.push_back({k, member_ids[k - 1], objectives::mean_pcc(p.values, labels).mean_pcc});
    }
    return rows;
}

std::vector<IncrementalRow> incremental_report(const EnsembleSpec& spec, const featstore::DatasetManifest& manifest,
                                               featstore::Split split) {
    spec.validate();
    const auto labels = trainer::split_labels(manifest, split);
    const auto preds = member_predictions(spec, manifest, split);
    std::vector<std::string> ids;
    for (const auto& p : spec.members) ids.push_back(p.generic_string());
    return incremental_report(preds, ids, spec.resolved_weights(), labels);
}

void write_report_csv(std::span<const IncrementalRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out << "k,member_id,mean_pcc\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", r.mean_pcc);
        out << r.k << ',' << r.member_id << ',' << buf << '\n';
    }
}

} // namespace eri::ensembler
