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

#include "eri/tuner/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"

namespace eri::tuner {

using encoders::Hyperparams;

namespace {

constexpr std::uint64_t kSampleStream = 0x7a11'5a3b'0000'0001ULL;
constexpr std::uint64_t kTrialSeedStream = 0x7a11'5eed'0000'0002ULL;

std::string_view status_name(TrialStatus s) { return s == TrialStatus::Completed ? "completed" : "pruned"; }

// Replays a trial from scratch up to `epochs` epochs.
void run_trial(const std::shared_ptr<const trainer::TrainData>& data, TrialRecord& rec, std::uint32_t epochs) {
    rec.trace.clear();
    rec.error.clear();
    rec.final_score = 0.0;
    try {
        trainer::TrainSession session(data, rec.hp);
        while (session.epochs_done() < epochs && !session.finished()) {
            const auto e = session.run_epoch();
            rec.trace.push_back({e.epoch, e.train_loss, e.val_mean_pcc, e.val_mse});
        }
        rec.final_score = session.best_score();
    } catch (const std::exception& ex) {
        rec.error = ex.what();
    }
    rec.epochs_consumed = static_cast<std::uint32_t>(rec.trace.size());
}

template <class F>
void parallel_for(std::span<const std::size_t> items, std::uint32_t parallelism, F&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max<std::uint32_t>(parallelism, 1), items.size());
    if (workers <= 1) {
        for (auto i : items) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < items.size(); k = next++) fn(items[k]);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

void SearchSpace::validate() const {
    require(std::isfinite(lr_min) && lr_min > 0.0 && lr_min <= lr_max, ErrorKind::Config,
            "search.lr_min/lr_max must satisfy 0 < lr_min <= lr_max");
    require(batch_min >= 1 && batch_min <= batch_max, ErrorKind::Config,
            "search.batch_min/batch_max must satisfy 1 <= batch_min <= batch_max");
    require(!(loss_kind == encoders::LossKind::Pcc && batch_min < 2), ErrorKind::Config,
            "search.batch_min must be >= 2 with the PCC loss");
    require(hidden_min >= 1 && hidden_min <= hidden_max, ErrorKind::Config,
            "search.hidden_min/hidden_max must satisfy 1 <= hidden_min <= hidden_max");
    const std::uint32_t heads = base.num_heads;
    require(heads >= 1 && (hidden_min + heads - 1) / heads * heads <= hidden_max, ErrorKind::Config,
            "search hidden range holds no multiple of num_heads");
    require(trials >= 1, ErrorKind::Config, "search.trials must be >= 1");
    require(max_epochs_per_trial >= 1, ErrorKind::Config, "search.max_epochs_per_trial must be >= 1");
    if (dropout_range) {
        require(dropout_range->first >= 0.0 && dropout_range->first <= dropout_range->second &&
                    dropout_range->second < 1.0,
                ErrorKind::Config, "search dropout range must lie in [0,1)");
    }
    if (layers_range) {
        require(layers_range->first <= layers_range->second, ErrorKind::Config, "search layers range is inverted");
    }
}

nlohmann::json to_json(const SearchSpace& s) {
    nlohmann::json j = {
        {"lr_min", s.lr_min},
        {"lr_max", s.lr_max},
        {"batch_min", s.batch_min},
        {"batch_max", s.batch_max},
        {"hidden_min", s.hidden_min},
        {"hidden_max", s.hidden_max},
        {"loss_kind", std::string(encoders::to_string(s.loss_kind))},
        {"trials", s.trials},
        {"max_epochs_per_trial", s.max_epochs_per_trial},
        {"base", encoders::to_json(s.base)},
    };
    if (s.dropout_range) j["dropout_range"] = {s.dropout_range->first, s.dropout_range->second};
    if (s.layers_range) j["layers_range"] = {s.layers_range->first, s.layers_range->second};
    return j;
}

Hyperparams sample_config(const SearchSpace& space, std::uint32_t trial_id, std::uint64_t seed) {
    Rng rng(hash_combine(hash_combine(seed, kSampleStream), trial_id));
    Hyperparams hp = space.base;
    hp.loss_kind = space.loss_kind;
    hp.max_epochs = space.max_epochs_per_trial;
    // epoch allocation belongs to the scheduler
    hp.patience = 0;
    hp.learning_rate = rng.uniform(space.lr_min, space.lr_max);
    hp.batch_size = static_cast<std::uint32_t>(rng.uniform_int(space.batch_min, space.batch_max));

    const auto heads = static_cast<std::int64_t>(hp.num_heads);
    const std::int64_t raw = rng.uniform_int(space.hidden_min, space.hidden_max);
    std::int64_t hidden = (raw + heads / 2) / heads * heads;
    if (hidden > static_cast<std::int64_t>(space.hidden_max)) hidden -= heads;
    if (hidden < static_cast<std::int64_t>(space.hidden_min)) hidden += heads;
    hp.hidden_dim = static_cast<std::uint32_t>(hidden);

    if (space.dropout_range) hp.dropout = rng.uniform(space.dropout_range->first, space.dropout_range->second);
    if (space.layers_range)
        hp.num_layers = static_cast<std::uint32_t>(rng.uniform_int(space.layers_range->first, space.layers_range->second));
    hp.seed = hash_combine(hash_combine(seed, kTrialSeedStream), trial_id);
    return hp;
}

std::vector<std::uint32_t> rung_epochs(std::uint32_t max_epochs) {
    std::vector<std::uint32_t> rungs;
    for (std::uint32_t r : {1u, 3u}) {
        if (r < max_epochs) rungs.push_back(r);
    }
    rungs.push_back(max_epochs);
    return rungs;
}

SearchResult run_search(std::shared_ptr<const trainer::TrainData> data, const SearchSpace& space, std::uint64_t seed,
                        std::uint32_t parallelism) {
    space.validate();
    SearchResult result;
    result.records.resize(space.trials);
    std::vector<std::size_t> alive;
    for (std::uint32_t t = 0; t < space.trials; ++t) {
        result.records[t].trial_id = t;
        result.records[t].hp = sample_config(space, t, seed);
        result.records[t].hp.validate();
        alive.push_back(t);
    }

    const auto rungs = rung_epochs(space.max_epochs_per_trial);
    for (std::size_t ri = 0; ri < rungs.size() && !alive.empty(); ++ri) {
        parallel_for(alive, parallelism, [&](std::size_t t) { run_trial(data, result.records[t], rungs[ri]); });

        // crashed trials leave the race
        std::erase_if(alive, [&](std::size_t t) { return !result.records[t].error.empty(); });
        if (ri + 1 == rungs.size()) break;
        std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
            return result.records[a].final_score > result.records[b].final_score;
        });
        alive.resize((alive.size() + 1) / 2);
        std::sort(alive.begin(), alive.end());
    }
    for (auto t : alive) result.records[t].status = TrialStatus::Completed;
    result.best_trial_id = best_trial(result.records).trial_id;
    return result;
}

SearchResult run_search(const featstore::DatasetManifest& manifest, const SearchSpace& space, std::uint64_t seed,
                        std::uint32_t parallelism) {
    space.validate();
    Hyperparams probe = space.base;
    probe.loss_kind = space.loss_kind;
    probe.batch_size = std::max<std::uint32_t>(space.batch_min, 2);
    return run_search(trainer::load_train_data(manifest, probe), space, seed, parallelism);
}

const TrialRecord& best_trial(std::span<const TrialRecord> records) {
    const TrialRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.status != TrialStatus::Completed) continue;
        if (best == nullptr || r.final_score > best->final_score ||
            (r.final_score == best->final_score && r.trial_id < best->trial_id))
            best = &r;
    }
    require(best != nullptr, ErrorKind::Data, "no completed trial to choose from");
    return *best;
}

nlohmann::json to_json(const TrialRecord& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : r.trace) {
        trace.push_back({{"epoch", e.epoch},
                         {"train_loss", e.train_loss},
                         {"val_mean_pcc", e.val_mean_pcc},
                         {"val_mse", e.val_mse}});
    }
    nlohmann::json j = {
        {"trial_id", r.trial_id},
        {"hyperparams", encoders::to_json(r.hp)},
        {"trace", trace},
        {"status", std::string(status_name(r.status))},
        {"final_score", r.final_score},
        {"epochs_consumed", r.epochs_consumed},
    };
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

std::string records_jsonl(std::span<const TrialRecord> records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    return out;
}

void write_search_results(const SearchResult& result, const std::filesystem::path& dir) {
    {
        std::ofstream out(dir / "trials.jsonl", std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + (dir / "trials.jsonl").string());
        out << records_jsonl(result.records);
    }
    const TrialRecord& best = result.records.at(result.best_trial_id);
    std::size_t completed = 0;
    for (const auto& r : result.records) completed += r.status == TrialStatus::Completed ? 1 : 0;
    const nlohmann::json summary = {
        {"best_trial_id", best.trial_id},
        {"best_score", best.final_score},
        {"best_hyperparams", encoders::to_json(best.hp)},
        {"trials", result.records.size()},
        {"completed", completed},
    };
    std::ofstream out(dir / "search_summary.json", std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + (dir / "search_summary.json").string());
    out << summary.dump(2) << '\n';
}

} // namespace eri::tuner
