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

#include "eri/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"
#include "eri/featstore/featstore.hpp"
#include "eri/objectives/losses.hpp"
#include "eri/simd/kernels.hpp"

namespace eri::trainer {

using encoders::Hyperparams;
using featstore::EmotionVector;
using featstore::Split;

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr std::uint64_t kDropoutStream = 0xd409'0000ULL;

} // namespace

std::shared_ptr<const TrainData> load_train_data(const featstore::DatasetManifest& manifest, const Hyperparams& hp) {
    hp.validate();
    const featstore::DatasetManifest filtered = featstore::filter_trainable(manifest);
    auto data = std::make_shared<TrainData>();
    data->dropped_no_face = manifest.entries.size() - filtered.entries.size();
    data->dims = encoders::required_dims(hp, manifest.dims);
    require(filtered.count(Split::Train) >= 1, ErrorKind::Data, "train split is empty after filtering");
    require(filtered.count_labeled(Split::Val) >= 2, ErrorKind::Data,
            "validation split needs at least 2 labeled samples, has " +
                std::to_string(filtered.count_labeled(Split::Val)));
    const auto train = featstore::load_split(filtered, Split::Train);
    const auto val = featstore::load_split(filtered, Split::Val);
    data->train = prepare(train, hp);
    data->val = prepare(val, hp);
    return data;
}

TrainSession::TrainSession(std::shared_ptr<const TrainData> data, Hyperparams hp)
    : data_(std::move(data)), hp_(hp) {
    hp_.validate();
    require(!data_->train.empty(), ErrorKind::Data, "train split is empty");
    require(data_->val.size() >= 2, ErrorKind::Data, "validation split needs at least 2 samples");
    params_ = encoders::init_params(hp_, data_->dims, hp_.seed);
    best_params_ = params_;
    ps_ = encoders::ParamSet::bind(params_, true);
    for (const auto& [_, t] : ps_.tensors()) {
        adam_m_.emplace_back(t.size(), 0.0);
        adam_v_.emplace_back(t.size(), 0.0);
    }
}

void TrainSession::step(std::span<const std::size_t> batch, double& loss_sum, std::size_t& loss_count) {
    std::vector<const encoders::ModelInput*> inputs;
    std::vector<double> target;
    for (auto i : batch) {
        const auto& s = data_->train[i];
        inputs.push_back(&s.input);
        target.insert(target.end(), s.label->begin(), s.label->end());
    }
    const auto padded = pad_batch(inputs);

    ps_.zero_grad();
    auto ctx = encoders::ForwardContext::training(hash_combine(hp_.seed, kDropoutStream), global_step_);
    std::vector<diff::Tensor> rows;
    rows.reserve(padded.size());
    for (const auto& in : padded) rows.push_back(encoders::forward(ps_, hp_, in, ctx));
    const diff::Tensor pred = diff::concat_rows(rows);
    const diff::Tensor tgt = diff::Tensor::constant({batch.size(), featstore::kNumEmotions}, std::move(target));
    const diff::Tensor loss =
        hp_.loss_kind == encoders::LossKind::Mse ? objectives::mse_loss(pred, tgt) : objectives::pcc_loss(pred, tgt);
    require(std::isfinite(loss.item()), ErrorKind::Numerical,
            "non-finite loss at epoch " + std::to_string(epochs_done()) + ", step " + std::to_string(global_step_));
    loss.backward();
    loss_sum += loss.item();
    ++loss_count;
    ++global_step_;

    const auto& kt = simd::active();
    double norm_sq = 0.0;
    for (const auto& [_, t] : ps_.tensors()) norm_sq += kt.dot(t.grad().data(), t.grad().data(), t.size());
    require(std::isfinite(norm_sq), ErrorKind::Numerical,
            "non-finite gradient at step " + std::to_string(global_step_));
    const double norm = std::sqrt(norm_sq);
    const double clip = (hp_.grad_clip > 0.0 && norm > hp_.grad_clip) ? hp_.grad_clip / norm : 1.0;

    const double t = static_cast<double>(global_step_);
    const double c1 = 1.0 - std::pow(kAdamBeta1, t);
    const double c2 = 1.0 - std::pow(kAdamBeta2, t);
    std::size_t k = 0;
    for (auto& [_, p] : ps_.tensors()) {
        auto val = p.mutable_values();
        const auto g = p.grad();
        auto& m = adam_m_[k];
        auto& v = adam_v_[k];
        for (std::size_t i = 0; i < val.size(); ++i) {
            const double gi = g[i] * clip;
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * gi;
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * gi * gi;
            const double upd = hp_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
            // parameters live in storage precision between steps
            val[i] = static_cast<double>(static_cast<float>(val[i] - upd));
        }
        ++k;
    }
}

EpochRecord TrainSession::run_epoch() {
    require(!finished(), ErrorKind::Validation, "training run already finished");
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint32_t epoch = epochs_done();
    const std::size_t min_last = hp_.loss_kind == encoders::LossKind::Pcc ? 2 : 1;
    const auto batches = make_batches(data_->train.size(), hp_.batch_size, hp_.seed, epoch, min_last);
    require(!batches.empty(), ErrorKind::Data, "no batch of size >= 2 can be formed for the PCC loss");

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (const auto& b : batches) step(b, loss_sum, loss_count);
    ps_.store(params_);

    const auto preds = predict_samples(params_, hp_, data_->val);
    std::vector<EmotionVector> labels;
    for (const auto& s : data_->val) labels.push_back(*s.label);
    const auto report = objectives::mean_pcc(preds, labels);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(loss_count);
    rec.val_mean_pcc = report.mean_pcc;
    rec.val_mse = report.mse;
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history_.epochs.push_back(rec);

    if (epoch == 0 || rec.val_mean_pcc > history_.epochs[history_.best_epoch].val_mean_pcc) {
        history_.best_epoch = epoch;
        best_params_ = params_;
    }
    if (hp_.patience > 0 && epoch - history_.best_epoch >= hp_.patience) stopped_early_ = true;
    return rec;
}

void TrainSession::run() {
    while (!finished()) run_epoch();
}

bool TrainSession::finished() const { return stopped_early_ || epochs_done() >= hp_.max_epochs; }

double TrainSession::best_score() const {
    require(!history_.epochs.empty(), ErrorKind::Validation, "no completed epoch");
    return history_.epochs[history_.best_epoch].val_mean_pcc;
}

encoders::Checkpoint TrainSession::best_checkpoint() const {
    encoders::Checkpoint ckpt;
    ckpt.hp = hp_;
    ckpt.input_dims = data_->dims;
    ckpt.params = best_params_;
    ckpt.metadata = {
        {"seed", hp_.seed},
        {"best_epoch", history_.best_epoch},
        {"epochs_run", epochs_done()},
        {"n_train", data_->train.size()},
        {"n_val", data_->val.size()},
        {"dropped_no_face", data_->dropped_no_face},
        {"best_val_mean_pcc", history_.epochs.empty() ? 0.0 : best_score()},
    };
    return ckpt;
}

TrainResult train(const featstore::DatasetManifest& manifest, Hyperparams hp) {
    TrainSession session(load_train_data(manifest, hp), hp);
    session.run();
    return {session.best_checkpoint(), session.history()};
}

TrainResult train(const featstore::DatasetManifest& manifest, Hyperparams hp, std::uint64_t seed) {
    hp.seed = seed;
    return train(manifest, hp);
}

std::vector<EmotionVector> predict_samples(const encoders::ModelParams& params, const Hyperparams& hp,
                                           std::span<const PreparedSample> samples) {
    const auto ps = encoders::ParamSet::bind(params, false);
    std::vector<EmotionVector> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto ctx = encoders::ForwardContext::eval();
        out.push_back(encoders::to_emotion(encoders::forward(ps, hp, s.input, ctx)));
    }
    return out;
}

void check_compatible(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest) {
    const auto dims = encoders::required_dims(ckpt.hp, manifest.dims);
    for (const auto& [m, d] : dims) {
        auto it = ckpt.input_dims.find(m);
        require(it != ckpt.input_dims.end() && it->second == d, ErrorKind::Data,
                "checkpoint expects '" + m + "' dim " +
                    (it == ckpt.input_dims.end() ? std::string("<none>") : std::to_string(it->second)) +
                    ", manifest has " + std::to_string(d));
    }
}

Predictions predict(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest, Split split) {
    check_compatible(ckpt, manifest);
    const auto samples = featstore::load_split(manifest, split);
    const auto prepared = prepare(samples, ckpt.hp);
    Predictions p;
    for (const auto& s : prepared) p.sample_ids.push_back(s.sample_id);
    p.values = predict_samples(ckpt.params, ckpt.hp, prepared);
    return p;
}

std::vector<EmotionVector> split_labels(const featstore::DatasetManifest& manifest, Split split) {
    std::vector<EmotionVector> labels;
    for (const auto& e : manifest.entries) {
        if (e.split != split) continue;
        require(e.label.has_value(), ErrorKind::Data,
                "sample '" + e.sample_id + "' in split " + std::string(featstore::split_name(split)) + " is unlabeled");
        labels.push_back(*e.label);
    }
    return labels;
}

objectives::MetricReport evaluate(const encoders::Checkpoint& ckpt, const featstore::DatasetManifest& manifest,
                                  Split split) {
    const auto labels = split_labels(manifest, split);
    require(labels.size() >= 2, ErrorKind::Data,
            "split " + std::string(featstore::split_name(split)) + " needs at least 2 labeled samples");
    const auto p = predict(ckpt, manifest, split);
    return objectives::mean_pcc(p.values, labels);
}

nlohmann::json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},
            {"train_loss", r.train_loss},
            {"val_mean_pcc", r.val_mean_pcc},
            {"val_mse", r.val_mse},
            {"wall_time_s", r.wall_time_s}};
}

void write_history_jsonl(const TrainHistory& h, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    for (const auto& r : h.epochs) {
        auto j = to_json(r);
        j["best"] = r.epoch == h.best_epoch;
        out << j.dump() << '\n';
    }
}

} // namespace eri::trainer
