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

// Acceptance runner: one PASS/FAIL line per criterion. Exit status is nonzero
// when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "eri/cli/commands.hpp"
#include "eri/encoders/checkpoint.hpp"
#include "eri/featstore/featstore.hpp"
#include "eri/featstore/synthetic.hpp"
#include "eri/objectives/metrics.hpp"
#include "eri/simd/kernels.hpp"
#include "eri/trainer/trainer.hpp"
#include "eri/tuner/tuner.hpp"
#include "support/ensemble_sim.hpp"
#include "support/grad_suite.hpp"
#include "support/metric_oracles.hpp"
#include "support/test_util.hpp"

namespace {

using namespace eri;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

const fs::path& scratch() {
    static test::TempDir dir("acceptance");
    return dir.path();
}

// default synthetic set (200 train / 50 val, seed 42), generated once
const featstore::DatasetManifest& default_dataset() {
    static const featstore::DatasetManifest m = [] {
        featstore::gen_synthetic(featstore::SynthSpec{}, 42, scratch() / "default");
        return featstore::read_manifest(scratch() / "default/manifest.jsonl");
    }();
    return m;
}

void gradient_suite(Outcome& o) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_op;
    std::size_t instances = 0;
    for (const auto& c : test::op_grad_cases()) {
        Rng rng(hash_combine(0xacce, std::hash<std::string>{}(c.op)));
        for (int i = 0; i < 10; ++i, ++instances) {
            const double e = c.run(rng).max_rel_error;
            if (e > worst) {
                worst = e;
                worst_op = c.op;
            }
        }
    }
    double worst_model = 0.0;
    for (int i = 0; i < 10; ++i, ++instances) {
        const auto loss = i % 2 == 0 ? encoders::LossKind::Mse : encoders::LossKind::Pcc;
        worst_model =
            std::max(worst_model, test::tiny_model_grad_check(test::TinyModel::Te, loss, 500 + i).max_rel_error);
    }
    const double secs = seconds_since(t0);
    o.detail << instances << " instances, worst op error " << fmt(worst) << " (" << worst_op << "), tiny TE "
             << fmt(worst_model) << ", " << fmt(secs, 3) << " s";
    o.require(worst < 1e-4, "op error < 1e-4");
    o.require(worst_model < 1e-4, "tiny model error < 1e-4");
    o.require(secs < 60.0, "< 60 s");
}

void metric_oracle(Outcome& o) {
    using test::Row;
    Rng rng(2024);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng.uniform_int(0, 60);
        std::vector<Row> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i)
            for (int e = 0; e < 7; ++e) {
                p[i][e] = rng.uniform();
                t[i][e] = rng.uniform();
            }
        worst = std::max(worst, std::abs(objectives::mse(p, t) - test::oracle_mse(p, t)));
        worst = std::max(worst, std::abs(objectives::mean_pcc(p, t).mean_pcc - test::oracle_mean_pcc(p, t)));
        const auto x = test::column(p, rep % 7), y = test::column(t, rep % 7);
        worst = std::max(worst, std::abs(objectives::pcc(x, y) - test::oracle_pcc(x, y)));
        const auto cm = objectives::label_corr_matrix(t);
        const auto oc = test::oracle_corr(t);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) worst = std::max(worst, std::abs(cm[i][j] - oc[i][j]));
    }
    const std::vector<double> x = {0.3, -1.2, 2.5, 0.7}, nx = {-0.3, 1.2, -2.5, -0.7};
    const double self = objectives::pcc(x, x), anti = objectives::pcc(x, nx);
    const std::vector<double> a = {1, 2, 3}, b = {1, 2, 4};
    const double example = objectives::pcc(a, b);
    o.detail << "oracle max diff " << fmt(worst) << "; pcc(x,x)=" << fmt(self, 17) << " pcc(x,-x)=" << fmt(anti, 17)
             << "; pcc((1,2,3),(1,2,4))=" << fmt(example, 7) << " (closed form 9/sqrt(84)="
             << fmt(9.0 / std::sqrt(84.0), 7) << ", stated 0.9258)";
    o.require(worst <= 1e-12, "oracle agreement within 1e-12");
    o.require(std::abs(self - 1.0) <= 1e-12, "pcc(x,x)=1");
    o.require(std::abs(anti + 1.0) <= 1e-12, "pcc(x,-x)=-1");
    o.require(std::abs(example - 0.9258) <= 1e-4, "pcc((1,2,3),(1,2,4)) within 1e-4 of 0.9258");
}

void learnability(Outcome& o) {
    const auto& m = default_dataset();
    for (auto loss : {encoders::LossKind::Mse, encoders::LossKind::Pcc}) {
        encoders::Hyperparams hp;
        hp.loss_kind = loss;
        hp.max_epochs = 10;
        const auto t0 = Clock::now();
        const auto r = trainer::train(m, hp, 42);
        const double secs = seconds_since(t0);
        const double best = r.history.epochs[r.history.best_epoch].val_mean_pcc;
        const double gate = loss == encoders::LossKind::Mse ? 0.8 : 0.75;
        const std::string name(encoders::to_string(loss));
        o.detail << name << ": val mean_pcc " << fmt(best) << " in " << r.history.epochs.size() << " epochs, "
                 << fmt(secs, 3) << " s; ";
        o.require(best >= gate, name + " >= " + fmt(gate));
        o.require(r.history.epochs.size() <= 10, name + " within 10 epochs");
        o.require(secs < 300.0, name + " < 5 min");
    }
}

void overfit(Outcome& o) {
    featstore::SynthSpec spec;
    spec.n_train = 8;
    spec.n_val = 4;
    spec.no_face_fraction = 0.0;
    featstore::gen_synthetic(spec, 7, scratch() / "overfit");
    const auto m = featstore::read_manifest(scratch() / "overfit/manifest.jsonl");
    encoders::Hyperparams hp;
    hp.hidden_dim = 32;
    hp.num_heads = 4;
    hp.num_layers = 1;
    hp.batch_size = 8;
    hp.dropout = 0.0;
    hp.learning_rate = 3e-3;
    hp.max_epochs = 200;
    hp.patience = 0;
    hp.seed = 1;
    const auto data = trainer::load_train_data(m, hp);
    std::vector<featstore::EmotionVector> labels;
    for (const auto& s : data->train) labels.push_back(*s.label);
    trainer::TrainSession s(data, hp);
    double mse = 1.0;
    while (!s.finished() && mse >= 1e-3) {
        s.run_epoch();
        mse = objectives::mse(trainer::predict_samples(s.current_params(), hp, data->train), labels);
    }
    o.detail << "train MSE " << fmt(mse) << " after " << s.epochs_done() << " epochs (batch of "
             << data->train.size() << ")";
    o.require(mse < 1e-3, "train MSE < 1e-3 within 200 epochs");
}

void padding_invariance(Outcome& o) {
    Rng rng(5150);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        encoders::Hyperparams hp;
        hp.num_heads = 1 + rng.uniform_int(0, 3);
        hp.hidden_dim = hp.num_heads * (2 + rng.uniform_int(0, 6));
        hp.num_layers = 1 + rng.uniform_int(0, 1);
        hp.conv_kernel = 1 + 2 * rng.uniform_int(0, 2);
        hp.positional_encoding = rng.uniform() < 0.5;
        const int kind = rep % 3;
        if (kind == 1) hp.fusion_mode = encoders::FusionMode::CrossAttention;
        if (kind == 2) hp.model = encoders::ModelKind::ResNet1d;
        const std::uint32_t dv = 1 + rng.uniform_int(0, 7), da = 1 + rng.uniform_int(0, 4);
        const auto params = encoders::init_params(hp, {{"visual", dv}, {"audio", da}}, rng.next_u64());
        const auto ps = encoders::ParamSet::bind(params, false);

        auto seq = [&rng](std::size_t t, std::size_t d) {
            return encoders::SequenceInput{diff::Tensor::constant({t, d}, test::normal_vec(rng, t * d)),
                                           diff::Mask(t, 1)};
        };
        auto pad = [&rng](const encoders::SequenceInput& in) {
            auto p = encoders::pad_sequence(in, in.features.rows() + 3);
            auto v = p.features.mutable_values();
            for (std::size_t i = in.features.size(); i < v.size(); ++i) v[i] = 100.0 * rng.normal();
            return p;
        };
        encoders::ModelInput in{seq(1 + rng.uniform_int(0, 11), dv), std::nullopt};
        if (kind == 1) in.secondary = seq(1 + rng.uniform_int(0, 7), da);
        encoders::ModelInput padded{pad(in.primary), std::nullopt};
        if (in.secondary) padded.secondary = pad(*in.secondary);

        auto c1 = encoders::ForwardContext::eval(), c2 = encoders::ForwardContext::eval();
        const auto a = encoders::to_emotion(encoders::forward(ps, hp, in, c1));
        const auto b = encoders::to_emotion(encoders::forward(ps, hp, padded, c2));
        for (std::size_t e = 0; e < 7; ++e) worst = std::max(worst, std::abs(a[e] - b[e]));
    }
    o.detail << "50 cases (TE, cross-attention, ResNet-1D), max |padded - unpadded| = " << fmt(worst);
    o.require(worst <= 1e-6, "agreement within 1e-6");
}

void search_reproducibility(Outcome& o) {
    featstore::SynthSpec spec;
    spec.n_train = 8;
    spec.n_val = 4;
    spec.visual_dim = 4;
    spec.audio_dim = 2;
    spec.min_frames = 2;
    spec.max_frames = 4;
    featstore::gen_synthetic(spec, 11, scratch() / "micro");
    const auto m = featstore::read_manifest(scratch() / "micro/manifest.jsonl");

    tuner::SearchSpace space;  // default bounds
    space.trials = 8;
    space.max_epochs_per_trial = 4;
    space.base.num_layers = 1;
    const auto t0 = Clock::now();
    const auto r1 = tuner::run_search(m, space, 42, 1);
    const auto r4 = tuner::run_search(m, space, 42, 4);
    const double secs = seconds_since(t0);
    const bool identical = tuner::records_jsonl(r1.records) == tuner::records_jsonl(r4.records);

    bool bounds = true;
    auto in_bounds = [](const encoders::Hyperparams& hp) {
        return hp.learning_rate >= 1e-5 && hp.learning_rate <= 2e-4 && hp.batch_size >= 8 && hp.batch_size <= 32 &&
               hp.hidden_dim >= 512 && hp.hidden_dim <= 1024 && hp.hidden_dim % hp.num_heads == 0;
    };
    for (const auto& r : r1.records) bounds = bounds && in_bounds(r.hp);
    for (std::uint32_t t = 0; t < 1000; ++t) bounds = bounds && in_bounds(tuner::sample_config(space, t, 42));

    // survivors per rung: 8 -> 4 -> 2
    const auto rungs = tuner::rung_epochs(space.max_epochs_per_trial);
    std::vector<std::size_t> reached;
    for (auto r : rungs) {
        std::size_t n = 0;
        for (const auto& rec : r1.records) n += rec.epochs_consumed >= r;
        reached.push_back(n);
    }
    bool halving = reached.size() == 3;
    for (std::size_t i = 1; i < reached.size(); ++i) halving = halving && reached[i] * 2 == reached[i - 1];
    std::size_t errors = 0;
    for (const auto& rec : r1.records) errors += !rec.error.empty();

    o.detail << "8 trials, parallelism 1 vs 4 " << (identical ? "byte-identical" : "DIFFER") << "; trials at rungs";
    for (std::size_t i = 0; i < rungs.size(); ++i) o.detail << " e" << rungs[i] << ":" << reached[i];
    o.detail << "; bounds " << (bounds ? "respected" : "violated") << "; " << fmt(secs, 3) << " s";
    o.require(identical, "identical tables");
    o.require(bounds, "sampled configs within bounds");
    o.require(halving, "exactly half pruned per rung");
    o.require(errors == 0, "no crashed trials");
}

void ensemble_property(Outcome& o) {
    int beats = 0, monotone = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = test::simulate_ensemble(seed, 5, 500, 0.1);
        beats += s.full_pcc > s.mean_member_pcc;
        monotone += s.rows_non_decreasing();
    }
    o.detail << "full ensemble beats mean member in " << beats << "/100, incremental rows non-decreasing in "
             << monotone << "/100 (5 members, N=500, sigma=0.1)";
    o.require(beats >= 95, ">= 95 wins");
    o.require(monotone >= 95, ">= 95% monotone");
}

void format_round_trips(Outcome& o) {
    Rng rng(88);
    std::size_t feat_ok = 0, feat_total = 0;
    for (int i = 0; i < 50; ++i, ++feat_total) {
        featstore::FeatureSequence s;
        s.modality_id = "visual";
        s.dim = 1 + rng.uniform_int(0, 800);
        double t = rng.uniform(0.0, 1.0);
        for (int f = 0, n = rng.uniform_int(0, 20); f < n; ++f) s.timestamps.push_back(t += rng.uniform(0.01, 0.5));
        for (std::size_t k = 0; k < s.frames() * s.dim; ++k) s.data.push_back(static_cast<float>(rng.normal() * 1e3));
        const auto path = scratch() / "rt.erif";
        featstore::write_feature_file(s, path);
        const auto back = featstore::read_feature_file(path, "visual");
        const auto bytes = test::read_bytes(path);
        featstore::write_feature_file(back, path);
        feat_ok += back == s && test::read_bytes(path) == bytes;
    }

    std::size_t ckpt_ok = 0, ckpt_total = 0;
    for (auto fusion : {encoders::FusionMode::VisualOnly, encoders::FusionMode::Concat,
                        encoders::FusionMode::CrossAttention}) {
        for (auto model : {encoders::ModelKind::Te, encoders::ModelKind::ResNet1d}) {
            if (model == encoders::ModelKind::ResNet1d && fusion != encoders::FusionMode::VisualOnly) continue;
            ++ckpt_total;
            encoders::Checkpoint c;
            c.hp.hidden_dim = 16;
            c.hp.fusion_mode = fusion;
            c.hp.model = model;
            c.input_dims = encoders::required_dims(c.hp, {{"visual", 24}, {"audio", 12}});
            c.params = encoders::init_params(c.hp, c.input_dims, rng.next_u64());
            c.metadata = {{"seed", 1}};
            const auto path = scratch() / "rt.eri";
            encoders::write_checkpoint(c, path);
            const auto bytes = test::read_bytes(path);
            const auto back = encoders::read_checkpoint(path);
            encoders::write_checkpoint(back, path);
            ckpt_ok += back == c && test::read_bytes(path) == bytes;
        }
    }

    const auto& m = default_dataset();
    const auto f = featstore::filter_trainable(m);
    std::set<std::string> kept;
    for (const auto& e : f.entries) kept.insert(e.sample_id);
    std::size_t wrong = 0, dropped = 0;
    for (const auto& e : m.entries) {
        const bool should_drop = e.split == featstore::Split::Train && !e.face_detected;
        dropped += should_drop;
        wrong += should_drop == (kept.count(e.sample_id) == 1);
    }
    std::size_t val_noface = 0;
    for (const auto& e : f.entries) val_noface += e.split == featstore::Split::Val && !e.face_detected;

    o.detail << "feature files " << feat_ok << "/" << feat_total << ", checkpoints " << ckpt_ok << "/" << ckpt_total
             << " bit-exact; filter dropped " << dropped << " no-face train entries, kept " << val_noface
             << " no-face val entries, " << wrong << " misclassified";
    o.require(feat_ok == feat_total, "feature round trips");
    o.require(ckpt_ok == ckpt_total, "checkpoint round trips");
    o.require(wrong == 0 && dropped > 0 && val_noface > 0, "filter drops exactly the no-face train entries");
}

void determinism(Outcome& o) {
    default_dataset();
    const auto out = scratch() / "det";
    const std::vector<std::string> files = {"checkpoint.eri", "predictions_val.csv", "metrics.json",
                                            "run_summary.json"};
    auto run_once = [&] {
        fs::remove_all(out);
        std::vector<std::string> args = {"eri",      "train", "--manifest", (scratch() / "default/manifest.jsonl").string(),
                                         "--out",    out.string(), "--seed", "42", "--verbosity", "quiet"};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        const int rc = cli::run_cli(static_cast<int>(argv.size()), argv.data());
        std::vector<std::vector<std::uint8_t>> bytes;
        for (const auto& f : files) bytes.push_back(test::read_bytes(out / f));
        // loss trace without the wall-clock column
        std::string trace;
        std::istringstream hist(test::read_text(out / "history.jsonl"));
        for (std::string line; std::getline(hist, line);) {
            auto j = nlohmann::json::parse(line);
            j.erase("wall_time_s");
            trace += j.dump() + "\n";
        }
        return std::make_tuple(rc, bytes, trace);
    };
    const auto [rc1, b1, t1] = run_once();
    const auto [rc2, b2, t2] = run_once();
    std::size_t same = 0;
    for (std::size_t i = 0; i < files.size(); ++i) same += b1[i] == b2[i] && !b1[i].empty();
    o.detail << "two CLI train runs: exit " << rc1 << "/" << rc2 << ", loss traces "
             << (t1 == t2 && !t1.empty() ? "identical" : "DIFFER") << ", " << same << "/" << files.size()
             << " artifacts byte-identical";
    o.require(rc1 == 0 && rc2 == 0, "runs succeed");
    o.require(t1 == t2 && !t1.empty(), "identical loss traces");
    o.require(same == files.size(), "identical artifacts");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria runner"};
    std::vector<int> only;
    app.add_option("criteria", only, "criterion numbers to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "gradient suite", gradient_suite},
        {2, "metric oracle", metric_oracle},
        {3, "learnability gate", learnability},
        {4, "overfit sanity", overfit},
        {5, "mask/padding invariance", padding_invariance},
        {6, "search reproducibility", search_reproducibility},
        {7, "ensemble property", ensemble_property},
        {8, "format round-trips", format_round_trips},
        {9, "determinism", determinism},
    };
    std::printf("kernels: %s\n", simd::active().name);
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
