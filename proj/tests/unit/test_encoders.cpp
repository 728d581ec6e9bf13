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

#include <doctest.h>

#include <cmath>

#include "eri/encoders/checkpoint.hpp"
#include "eri/encoders/hyperparams.hpp"
#include "eri/encoders/models.hpp"
#include "support/grad_suite.hpp"
#include "support/test_util.hpp"

using namespace eri;
using namespace eri::encoders;
using diff::Tensor;

namespace {

Hyperparams small_hp() {
    Hyperparams hp;
    hp.hidden_dim = 16;
    hp.num_heads = 4;
    hp.num_layers = 2;
    hp.dropout = 0.1;
    return hp;
}

featstore::FeatureSequence rand_seq(Rng& rng, const std::string& mod, std::uint32_t dim, std::size_t frames,
                                    double hop) {
    featstore::FeatureSequence s;
    s.modality_id = mod;
    s.dim = dim;
    for (std::size_t t = 0; t < frames; ++t) s.timestamps.push_back(t * hop);
    for (std::size_t i = 0; i < frames * dim; ++i) s.data.push_back(static_cast<float>(rng.normal()));
    return s;
}

SequenceInput rand_input(Rng& rng, std::size_t t, std::size_t d) {
    return {Tensor::constant({t, d}, test::normal_vec(rng, t * d)), diff::Mask(t, 1)};
}

// pads with `extra` masked frames holding large random content
SequenceInput pad_noisy(Rng& rng, const SequenceInput& in, std::size_t extra) {
    auto p = pad_sequence(in, in.features.rows() + extra);
    auto vals = p.features.mutable_values();
    for (std::size_t i = in.features.size(); i < vals.size(); ++i) vals[i] = 50.0 * rng.normal();
    return p;
}

featstore::EmotionVector eval_forward(const ModelParams& params, const Hyperparams& hp, const ModelInput& in) {
    const auto ps = ParamSet::bind(params, false);
    auto ctx = ForwardContext::eval();
    return to_emotion(forward(ps, hp, in, ctx));
}

double max_diff(const featstore::EmotionVector& a, const featstore::EmotionVector& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("hyperparameter validation and serialization") {
    Hyperparams hp;
    CHECK_NOTHROW(hp.validate());
    hp.hidden_dim = 510;
    hp.num_heads = 8;
    CHECK(test::kind_of([&] { hp.validate(); }) == ErrorKind::Config);
    CHECK(test::message_of([&] { hp.validate(); }).find("hidden_dim") != std::string::npos);
    CHECK(test::kind_of([&] { init_params(hp, {{"visual", 4}}, 1); }) == ErrorKind::Config);

    Hyperparams pcc;
    pcc.loss_kind = LossKind::Pcc;
    pcc.batch_size = 1;
    CHECK_THROWS(pcc.validate());
    Hyperparams even;
    even.conv_kernel = 4;
    CHECK_THROWS(even.validate());
    Hyperparams drop;
    drop.dropout = 1.0;
    CHECK_THROWS(drop.validate());
    Hyperparams lr;
    lr.learning_rate = 0;
    CHECK_THROWS(lr.validate());
    Hyperparams res;
    res.model = ModelKind::ResNet1d;
    res.fusion_mode = FusionMode::CrossAttention;
    CHECK_THROWS(res.validate());

    Hyperparams x = small_hp();
    x.learning_rate = 1.2345e-4;
    x.fusion_mode = FusionMode::CrossAttention;
    x.seed = 0xfedcba9876543210ULL;
    CHECK(hyperparams_from_json(to_json(x)) == x);
    auto j = to_json(x);
    j["bogus"] = 1;
    CHECK(test::kind_of([&] { hyperparams_from_json(j); }) == ErrorKind::Config);
    auto neg = to_json(x);
    neg["batch_size"] = -3;
    CHECK(test::kind_of([&] { hyperparams_from_json(neg); }) == ErrorKind::Config);
    CHECK(parse_fusion_mode("concat") == FusionMode::Concat);
    CHECK_THROWS(parse_loss_kind("l1"));
}

TEST_CASE("init_params shapes and determinism") {
    Hyperparams hp;
    hp.hidden_dim = 512;
    hp.num_heads = 8;
    hp.num_layers = 1;
    const InputDims dims = {{"visual", 24}};
    const auto a = init_params(hp, dims, 5);
    const auto b = init_params(hp, dims, 5);
    const auto c = init_params(hp, dims, 6);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.architecture == "te");
    const auto& q = a.at("enc.0.attn.q.w");
    CHECK(q.shape == std::vector<std::size_t>{512, 512});
    CHECK(q.shape[1] / hp.num_heads == 64);
    CHECK(a.at("front.conv.w").shape == std::vector<std::size_t>{3, 24, 512});
    CHECK(a.at("enc.0.ff1.w").shape == std::vector<std::size_t>{512, 1024});
    CHECK(a.at("head.fc2.w").shape == std::vector<std::size_t>{512, 7});
    for (float g : a.at("final_ln.g").values) CHECK(g == 1.0f);
    for (float v : a.at("head.fc1.b").values) CHECK(v == 0.0f);
    const double bound = std::sqrt(3.0 / (3 * 24));
    for (float v : a.at("front.conv.w").values) CHECK(std::abs(v) <= bound);
    CHECK_THROWS(init_params(Hyperparams{}, {{"audio", 4}}, 1));
}

TEST_CASE("te forward basics") {
    Rng rng(2);
    const auto hp = small_hp();
    const auto params = init_params(hp, {{"visual", 5}}, 3);
    const ModelInput in{rand_input(rng, 6, 5), std::nullopt};
    const auto ps = ParamSet::bind(params, false);
    auto ctx = ForwardContext::eval();
    const auto out = forward(ps, hp, in, ctx);
    CHECK(out.size() == 7);
    for (double v : out.values()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    auto ctx2 = ForwardContext::eval();
    const auto again = forward(ps, hp, in, ctx2);
    CHECK(std::equal(out.values().begin(), out.values().end(), again.values().begin()));

    auto t1 = ForwardContext::training(1, 0), t2 = ForwardContext::training(1, 1);
    const auto d1 = to_emotion(forward(ps, hp, in, t1));
    const auto d2 = to_emotion(forward(ps, hp, in, t2));
    CHECK(d1 != d2);

    auto ctx3 = ForwardContext::eval();
    CHECK_THROWS(te_forward(ps, hp, in.primary.features, diff::Mask(6, 0), ctx3));
    CHECK_THROWS(te_forward(ps, hp, Tensor::constant({2, 4}, std::vector<double>(8, 0.1)), diff::Mask(2, 1), ctx3));
}

TEST_CASE("padding invariance across 50 random cases") {
    Rng rng(99);
    double worst = 0;
    for (int rep = 0; rep < 50; ++rep) {
        Hyperparams hp;
        hp.num_heads = 1 + rng.uniform_int(0, 3);
        hp.hidden_dim = hp.num_heads * (2 + rng.uniform_int(0, 4));
        hp.num_layers = 1 + rng.uniform_int(0, 1);
        hp.conv_kernel = 1 + 2 * rng.uniform_int(0, 2);
        hp.positional_encoding = rng.uniform() < 0.5;
        const int kind = rep % 3;
        if (kind == 1) hp.fusion_mode = FusionMode::CrossAttention;
        if (kind == 2) hp.model = ModelKind::ResNet1d;
        const std::uint32_t dv = 1 + rng.uniform_int(0, 5), da = 1 + rng.uniform_int(0, 3);
        const auto params = init_params(hp, {{"visual", dv}, {"audio", da}}, rng.next_u64());

        ModelInput in{rand_input(rng, 1 + rng.uniform_int(0, 9), dv), std::nullopt};
        if (kind == 1) in.secondary = rand_input(rng, 1 + rng.uniform_int(0, 6), da);
        ModelInput padded{pad_noisy(rng, in.primary, 3), std::nullopt};
        if (kind == 1) padded.secondary = pad_noisy(rng, *in.secondary, 3);

        worst = std::max(worst, max_diff(eval_forward(params, hp, in), eval_forward(params, hp, padded)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("resnet has seven blocks and reduces to its skip path") {
    Rng rng(4);
    Hyperparams hp = small_hp();
    hp.model = ModelKind::ResNet1d;
    auto params = init_params(hp, {{"visual", 6}}, 8);
    CHECK(resnet_block_count(params) == 7);
    CHECK(params.architecture == "resnet1d");

    for (auto& t : params.tensors) {
        const bool branch = t.name.rfind("block.", 0) == 0 && t.name.find(".conv") != std::string::npos;
        if (branch) std::fill(t.values.begin(), t.values.end(), 0.0f);
    }
    const auto in = rand_input(rng, 7, 6);
    const auto got = eval_forward(params, hp, {in, std::nullopt});

    // stem -> pool -> head, rebuilt from the public ops
    const auto ps = ParamSet::bind(params, false);
    Tensor h = diff::conv1d(in.features, ps["stem.conv.w"], ps["stem.conv.b"]);
    h = diff::relu(diff::layer_norm(h, ps["stem.ln.g"], ps["stem.ln.b"], kLayerNormEps));
    const Tensor pooled = diff::masked_mean_pool(h, in.mask);
    const Tensor z = diff::relu(diff::affine(pooled, ps["head.fc1.w"], ps["head.fc1.b"]));
    const auto want = to_emotion(diff::sigmoid(diff::affine(z, ps["head.fc2.w"], ps["head.fc2.b"])));
    CHECK(max_diff(got, want) <= 1e-12);
}

TEST_CASE("resnet block with a projection skip") {
    Rng rng(6);
    const std::size_t din = 3, dout = 5;
    ModelParams mp;
    auto add = [&](const std::string& n, std::vector<std::size_t> shape, double fill_value, bool random) {
        NamedArray a{n, shape, std::vector<float>(diff::shape_size(shape), static_cast<float>(fill_value))};
        if (random)
            for (auto& v : a.values) v = static_cast<float>(0.5 * rng.normal());
        mp.tensors.push_back(std::move(a));
    };
    add("p.conv1.w", {3, din, dout}, 0, true);
    add("p.conv1.b", {dout}, 0, false);
    add("p.ln1.g", {dout}, 1, false);
    add("p.ln1.b", {dout}, 0, false);
    add("p.conv2.w", {3, dout, dout}, 0, true);
    add("p.conv2.b", {dout}, 0, false);
    add("p.ln2.g", {dout}, 1, false);
    add("p.ln2.b", {dout}, 0, false);
    add("p.proj.w", {1, din, dout}, 0, true);
    const auto in = rand_input(rng, 4, din);
    const auto ps = ParamSet::bind(mp, false);
    const auto out = resnet_block(ps, "p", in.features, in.mask);
    CHECK(out.shape() == diff::Shape{4, dout});

    // zero the branch: output = relu(x P)
    for (auto& t : mp.tensors)
        if (t.name.find("conv") != std::string::npos) std::fill(t.values.begin(), t.values.end(), 0.0f);
    const auto ps0 = ParamSet::bind(mp, false);
    const auto skip_only = resnet_block(ps0, "p", in.features, in.mask);
    const auto& pw = mp.at("p.proj.w").values;
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t c = 0; c < dout; ++c) {
            double s = 0;
            for (std::size_t d = 0; d < din; ++d) s += in.features.at(t, d) * pw[d * dout + c];
            CHECK(skip_only.at(t, c) == doctest::Approx(std::max(0.0, s)).epsilon(1e-12));
        }
}

TEST_CASE("fusion modes") {
    Rng rng(13);
    const auto visual = rand_seq(rng, "visual", 6, 8, 0.2);
    const auto audio = rand_seq(rng, "audio", 4, 5, 0.32);

    Hyperparams vo = small_hp();
    const auto vparams = init_params(vo, {{"visual", 6}}, 21);
    const auto ps = ParamSet::bind(vparams, false);
    auto ctx = ForwardContext::eval();
    const auto direct = to_emotion(te_forward(ps, vo, to_sequence_input(visual).features, diff::Mask(8, 1), ctx));
    CHECK(fuse_forward(vparams, vo, &visual, &audio, false) == direct);
    CHECK(fuse_forward(vparams, vo, &visual, nullptr, false) == direct);

    // concat with audio zeroed and its input weights zeroed
    Hyperparams cc = vo;
    cc.fusion_mode = FusionMode::Concat;
    auto cparams = init_params(cc, {{"visual", 6}, {"audio", 4}}, 22);
    REQUIRE(cparams.tensors.size() == vparams.tensors.size());
    for (std::size_t i = 0; i < cparams.tensors.size(); ++i) {
        auto& dst = cparams.tensors[i];
        const auto& src = vparams.tensors[i];
        REQUIRE(dst.name == src.name);
        if (dst.name != "front.conv.w") {
            dst.values = src.values;
            continue;
        }
        const std::size_t k = dst.shape[0], d = dst.shape[1], c = dst.shape[2];
        REQUIRE(d == 10);
        for (std::size_t kk = 0; kk < k; ++kk)
            for (std::size_t dd = 0; dd < d; ++dd)
                for (std::size_t cc_i = 0; cc_i < c; ++cc_i)
                    dst.values[(kk * d + dd) * c + cc_i] = dd < 6 ? src.values[(kk * 6 + dd) * c + cc_i] : 0.0f;
    }
    auto silent = audio;
    std::fill(silent.data.begin(), silent.data.end(), 0.0f);
    CHECK(max_diff(fuse_forward(cparams, cc, &visual, &silent, false), direct) <= 1e-6);
    CHECK_THROWS(fuse_forward(cparams, cc, &visual, nullptr, false));

    Hyperparams ca = vo;
    ca.fusion_mode = FusionMode::CrossAttention;
    const auto caparams = init_params(ca, {{"visual", 6}, {"audio", 4}}, 23);
    CHECK(caparams.architecture == "te_cross_attention");
    CHECK(caparams.find("v.enc.0.ln_kv.g") != nullptr);
    const auto y = fuse_forward(caparams, ca, &visual, &audio, false);
    for (double v : y) CHECK((v > 0 && v < 1));
    CHECK_THROWS(fuse_forward(caparams, ca, &visual, nullptr, false));

    // audio-only reads the audio stream
    Hyperparams ao = vo;
    ao.fusion_mode = FusionMode::AudioOnly;
    const auto aparams = init_params(ao, {{"visual", 6}, {"audio", 4}}, 24);
    CHECK(aparams.at("front.conv.w").shape[1] == 4);
    CHECK(fuse_forward(aparams, ao, nullptr, &audio, false).size() == 7);
    CHECK(fuse_forward(aparams, ao, nullptr, &audio, true, 5) != fuse_forward(aparams, ao, nullptr, &audio, false));
}

TEST_CASE("end-to-end gradients of tiny models") {
    using test::TinyModel;
    for (auto m : {TinyModel::Te, TinyModel::TeConcat, TinyModel::CrossAttention, TinyModel::ResNet}) {
        for (auto loss : {LossKind::Mse, LossKind::Pcc}) {
            const auto r = test::tiny_model_grad_check(m, loss, 1000 + static_cast<int>(m));
            CAPTURE(test::tiny_model_name(m));
            CAPTURE(to_string(loss));
            CAPTURE(r.analytic);
            CAPTURE(r.numeric);
            CHECK(r.max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("checkpoint round trip") {
    test::TempDir dir("ckpt");
    Hyperparams hp = small_hp();
    hp.fusion_mode = FusionMode::CrossAttention;
    Checkpoint c;
    c.hp = hp;
    c.input_dims = {{"visual", 6}, {"audio", 4}};
    c.params = init_params(hp, c.input_dims, 31);
    c.params.tensors[3].values[0] = -0.0f;
    c.params.tensors[4].values[1] = 1e-40f;  // subnormal
    c.metadata = {{"seed", 31}, {"best_epoch", 2}};

    write_checkpoint(c, dir / "a.eri");
    const auto back = read_checkpoint(dir / "a.eri");
    CHECK(back == c);
    CHECK(std::signbit(back.params.tensors[3].values[0]));
    write_checkpoint(back, dir / "b.eri");
    CHECK(test::read_bytes(dir / "a.eri") == test::read_bytes(dir / "b.eri"));

    auto bytes = encode_checkpoint(c);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "ERIC");
    auto bad = bytes;
    bad[1] = 'X';
    CHECK(test::kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::Format);
    auto cut = bytes;
    cut.resize(cut.size() - 3);
    CHECK(test::kind_of([&] { decode_checkpoint(cut); }) == ErrorKind::Corruption);
    CHECK(test::kind_of([&] { read_checkpoint(dir / "none.eri"); }).has_value());
}

TEST_CASE("param binding narrows back to float") {
    const auto p = init_params(small_hp(), {{"visual", 3}}, 1);
    auto ps = ParamSet::bind(p, true);
    ModelParams q = p;
    ps.store(q);
    CHECK(q == p);
    ps.tensors().begin()->second.mutable_values()[0] = 0.1;
    ps.store(q);
    CHECK(q.tensors.front().values[0] == 0.1f);
    CHECK(p.total_size() == q.total_size());
    CHECK_THROWS(p.at("nope"));
}
