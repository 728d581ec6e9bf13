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

#include "eri/encoders/models.hpp"

#include <cmath>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"
#include "eri/featstore/featstore.hpp"

namespace eri::encoders {

using diff::Tensor;
using featstore::kNumEmotions;

namespace {

enum class Init { Uniform, Ones, Zeros };

struct ParamSpec {
    std::vector<std::size_t> shape;
    Init init;
    std::size_t fan_in;
};

using Layout = std::map<std::string, ParamSpec>;

void add_linear(Layout& l, const std::string& name, std::size_t in, std::size_t out) {
    l[name + ".w"] = {{in, out}, Init::Uniform, in};
    l[name + ".b"] = {{out}, Init::Zeros, in};
}

void add_conv(Layout& l, const std::string& name, std::size_t k, std::size_t in, std::size_t out) {
    l[name + ".w"] = {{k, in, out}, Init::Uniform, k * in};
    l[name + ".b"] = {{out}, Init::Zeros, k * in};
}

void add_norm(Layout& l, const std::string& name, std::size_t dim) {
    l[name + ".g"] = {{dim}, Init::Ones, dim};
    l[name + ".b"] = {{dim}, Init::Zeros, dim};
}

void add_encoder_stack(Layout& l, const std::string& prefix, const Hyperparams& hp, bool cross) {
    const std::size_t h = hp.hidden_dim, ff = std::size_t{hp.ff_multiplier} * hp.hidden_dim;
    for (std::uint32_t i = 0; i < hp.num_layers; ++i) {
        const std::string b = prefix + "enc." + std::to_string(i) + ".";
        add_norm(l, b + "ln1", h);
        if (cross) add_norm(l, b + "ln_kv", h);
        for (const char* p : {"attn.q", "attn.k", "attn.v", "attn.o"}) add_linear(l, b + p, h, h);
        add_norm(l, b + "ln2", h);
        add_linear(l, b + "ff1", h, ff);
        add_linear(l, b + "ff2", ff, h);
    }
    add_norm(l, prefix + "final_ln", h);
}

void add_head(Layout& l, std::size_t pooled, std::size_t hidden) {
    add_linear(l, "head.fc1", pooled, hidden);
    add_linear(l, "head.fc2", hidden, kNumEmotions);
}

std::uint32_t dim_of(const InputDims& dims, std::string_view modality) {
    auto it = dims.find(std::string(modality));
    require(it != dims.end(), ErrorKind::Data, "input dims lack modality '" + std::string(modality) + "'");
    return it->second;
}

Layout make_layout(const Hyperparams& hp, const InputDims& dims) {
    Layout l;
    const std::size_t h = hp.hidden_dim, k = hp.conv_kernel;
    if (hp.model == ModelKind::ResNet1d) {
        const std::uint32_t in = dims.begin()->second;
        add_conv(l, "stem.conv", k, in, h);
        add_norm(l, "stem.ln", h);
        for (std::size_t i = 0; i < kResNetBlocks; ++i) {
            const std::string b = "block." + std::to_string(i) + ".";
            add_conv(l, b + "conv1", k, h, h);
            add_norm(l, b + "ln1", h);
            add_conv(l, b + "conv2", k, h, h);
            add_norm(l, b + "ln2", h);
        }
        add_head(l, h, h);
        return l;
    }
    if (hp.fusion_mode == FusionMode::CrossAttention) {
        add_conv(l, "v.front.conv", k, dim_of(dims, featstore::kVisual), h);
        add_conv(l, "a.front.conv", k, dim_of(dims, featstore::kAudio), h);
        add_encoder_stack(l, "v.", hp, true);
        add_encoder_stack(l, "a.", hp, true);
        add_head(l, 2 * h, h);
        return l;
    }
    std::uint32_t in = 0;
    for (const auto& [_, d] : dims) in += d;
    add_conv(l, "front.conv", k, in, h);
    add_encoder_stack(l, "", hp, false);
    add_head(l, h, h);
    return l;
}

struct Stream {
    Tensor h;
    std::span<const std::uint8_t> mask;
};

Tensor front_end(const ParamSet& ps, const std::string& prefix, const Hyperparams& hp, const Tensor& x,
                 std::span<const std::uint8_t> mask, ForwardContext& ctx) {
    Tensor h = diff::mask_rows(x, mask);
    h = diff::gelu(diff::conv1d(h, ps[prefix + "front.conv.w"], ps[prefix + "front.conv.b"]));
    if (hp.positional_encoding) h = diff::add(h, diff::positional_encoding(h.rows(), h.cols()));
    return diff::dropout(h, hp.dropout, ctx.dropout);
}

Tensor attention_block(const ParamSet& ps, const std::string& b, const Hyperparams& hp, const Tensor& xq,
                       const Tensor& xkv, std::span<const std::uint8_t> key_mask) {
    const Tensor q = diff::affine(xq, ps[b + "attn.q.w"], ps[b + "attn.q.b"]);
    const Tensor k = diff::affine(xkv, ps[b + "attn.k.w"], ps[b + "attn.k.b"]);
    const Tensor v = diff::affine(xkv, ps[b + "attn.v.w"], ps[b + "attn.v.b"]);
    const Tensor o = diff::multi_head_attention(q, k, v, hp.num_heads, key_mask);
    return diff::affine(o, ps[b + "attn.o.w"], ps[b + "attn.o.b"]);
}

Tensor norm(const ParamSet& ps, const std::string& name, const Tensor& x) {
    return diff::layer_norm(x, ps[name + ".g"], ps[name + ".b"], kLayerNormEps);
}

// Pre-norm block. memory == nullptr means self-attention.
Tensor encoder_block(const ParamSet& ps, const std::string& b, const Hyperparams& hp, Tensor h,
                     std::span<const std::uint8_t> self_mask, const Stream* memory, ForwardContext& ctx) {
    const Tensor a = norm(ps, b + "ln1", h);
    Tensor att = memory == nullptr ? attention_block(ps, b, hp, a, a, self_mask)
                                   : attention_block(ps, b, hp, a, norm(ps, b + "ln_kv", memory->h), memory->mask);
    h = diff::add(h, diff::dropout(att, hp.dropout, ctx.dropout));
    const Tensor f = norm(ps, b + "ln2", h);
    Tensor ff = diff::affine(diff::gelu(diff::affine(f, ps[b + "ff1.w"], ps[b + "ff1.b"])), ps[b + "ff2.w"],
                             ps[b + "ff2.b"]);
    return diff::add(h, diff::dropout(ff, hp.dropout, ctx.dropout));
}

Tensor head(const ParamSet& ps, const Hyperparams& hp, const Tensor& pooled, ForwardContext& ctx) {
    Tensor z = diff::relu(diff::affine(pooled, ps["head.fc1.w"], ps["head.fc1.b"]));
    z = diff::dropout(z, hp.dropout, ctx.dropout);
    return diff::sigmoid(diff::affine(z, ps["head.fc2.w"], ps["head.fc2.b"]));
}

void check_input(const Tensor& x, std::span<const std::uint8_t> mask, const char* op) {
    require(x.rank() == 2 && x.rows() >= 1, ErrorKind::Validation, std::string(op) + ": features must be T x D, T >= 1");
    require(mask.size() == x.rows(), ErrorKind::Validation, std::string(op) + ": mask length does not match frames");
    bool any = false;
    for (auto m : mask) any = any || m;
    require(any, ErrorKind::Validation, std::string(op) + ": every frame is masked");
}

} // namespace

std::string architecture_tag(const Hyperparams& hp) {
    if (hp.model == ModelKind::ResNet1d) return "resnet1d";
    return hp.fusion_mode == FusionMode::CrossAttention ? "te_cross_attention" : "te";
}

InputDims required_dims(const Hyperparams& hp, const InputDims& available) {
    InputDims out;
    auto take = [&](std::string_view m) { out[std::string(m)] = dim_of(available, m); };
    switch (hp.fusion_mode) {
    case FusionMode::VisualOnly:
        take(featstore::kVisual);
        break;
    case FusionMode::AudioOnly:
        take(featstore::kAudio);
        break;
    case FusionMode::Concat:
    case FusionMode::CrossAttention:
        take(featstore::kVisual);
        take(featstore::kAudio);
        break;
    }
    return out;
}

ModelParams init_params(const Hyperparams& hp, const InputDims& input_dims, std::uint64_t seed) {
    hp.validate();
    const InputDims dims = required_dims(hp, input_dims);
    for (const auto& [m, d] : dims) require(d > 0, ErrorKind::Config, "input dim of '" + m + "' must be positive");
    ModelParams params;
    params.architecture = architecture_tag(hp);
    Rng rng(hash_combine(seed, 0x1a17'0000ULL));
    for (const auto& [name, spec] : make_layout(hp, dims)) {
        NamedArray a{name, spec.shape, std::vector<float>(diff::shape_size(spec.shape))};
        if (spec.init == Init::Ones) {
            std::fill(a.values.begin(), a.values.end(), 1.0f);
        } else if (spec.init == Init::Uniform) {
            const double bound = std::sqrt(3.0 / static_cast<double>(spec.fan_in));
            for (auto& v : a.values) v = static_cast<float>(rng.uniform(-bound, bound));
        }
        params.tensors.push_back(std::move(a));
    }
    return params;
}

std::size_t resnet_block_count(const ModelParams& params) {
    std::size_t n = 0;
    while (params.find("block." + std::to_string(n) + ".conv1.w") != nullptr) ++n;
    return n;
}

Tensor te_forward(const ParamSet& ps, const Hyperparams& hp, const Tensor& features,
                  std::span<const std::uint8_t> mask, ForwardContext& ctx) {
    check_input(features, mask, "te_forward");
    Tensor h = front_end(ps, "", hp, features, mask, ctx);
    for (std::uint32_t i = 0; i < hp.num_layers; ++i) {
        h = encoder_block(ps, "enc." + std::to_string(i) + ".", hp, h, mask, nullptr, ctx);
    }
    h = norm(ps, "final_ln", h);
    return head(ps, hp, diff::masked_mean_pool(h, mask), ctx);
}

Tensor resnet_block(const ParamSet& ps, const std::string& prefix, const Tensor& x,
                    std::span<const std::uint8_t> mask) {
    Tensor r = diff::conv1d(x, ps[prefix + ".conv1.w"], ps[prefix + ".conv1.b"]);
    r = diff::mask_rows(diff::relu(norm(ps, prefix + ".ln1", r)), mask);
    r = norm(ps, prefix + ".ln2", diff::conv1d(r, ps[prefix + ".conv2.w"], ps[prefix + ".conv2.b"]));
    Tensor skip = x;
    if (ps.contains(prefix + ".proj.w")) {
        const Tensor& pw = ps[prefix + ".proj.w"];
        skip = diff::conv1d(x, pw, diff::Tensor::zeros({pw.shape().back()}));
    }
    return diff::mask_rows(diff::relu(diff::add(skip, r)), mask);
}

Tensor resnet1d_forward(const ParamSet& ps, const Hyperparams& hp, const Tensor& features,
                        std::span<const std::uint8_t> mask, ForwardContext& ctx) {
    check_input(features, mask, "resnet1d_forward");
    Tensor h = diff::mask_rows(features, mask);
    h = diff::conv1d(h, ps["stem.conv.w"], ps["stem.conv.b"]);
    h = diff::mask_rows(diff::relu(norm(ps, "stem.ln", h)), mask);
    for (std::size_t i = 0; i < kResNetBlocks; ++i) h = resnet_block(ps, "block." + std::to_string(i), h, mask);
    Tensor pooled = diff::dropout(diff::masked_mean_pool(h, mask), hp.dropout, ctx.dropout);
    return head(ps, hp, pooled, ctx);
}

Tensor cross_attention_forward(const ParamSet& ps, const Hyperparams& hp, const SequenceInput& visual,
                               const SequenceInput& audio, ForwardContext& ctx) {
    check_input(visual.features, visual.mask, "cross_attention_forward(visual)");
    check_input(audio.features, audio.mask, "cross_attention_forward(audio)");
    const Stream v0{front_end(ps, "v.", hp, visual.features, visual.mask, ctx), visual.mask};
    const Stream a0{front_end(ps, "a.", hp, audio.features, audio.mask, ctx), audio.mask};
    Tensor hv = v0.h, ha = a0.h;
    for (std::uint32_t i = 0; i < hp.num_layers; ++i) {
        const std::string idx = "enc." + std::to_string(i) + ".";
        hv = encoder_block(ps, "v." + idx, hp, hv, visual.mask, &a0, ctx);
        ha = encoder_block(ps, "a." + idx, hp, ha, audio.mask, &v0, ctx);
    }
    const Tensor pv = diff::masked_mean_pool(norm(ps, "v.final_ln", hv), visual.mask);
    const Tensor pa = diff::masked_mean_pool(norm(ps, "a.final_ln", ha), audio.mask);
    const Tensor pooled[] = {pv, pa};
    return head(ps, hp, diff::concat_cols(pooled), ctx);
}

Tensor forward(const ParamSet& ps, const Hyperparams& hp, const ModelInput& input, ForwardContext& ctx) {
    if (hp.model == ModelKind::ResNet1d) {
        return resnet1d_forward(ps, hp, input.primary.features, input.primary.mask, ctx);
    }
    if (hp.fusion_mode == FusionMode::CrossAttention) {
        require(input.secondary.has_value(), ErrorKind::Data, "cross_attention mode needs an audio stream");
        return cross_attention_forward(ps, hp, input.primary, *input.secondary, ctx);
    }
    return te_forward(ps, hp, input.primary.features, input.primary.mask, ctx);
}

SequenceInput to_sequence_input(const featstore::FeatureSequence& seq) {
    require(!seq.empty(), ErrorKind::Data, "stream '" + seq.modality_id + "' has no frames");
    std::vector<double> v(seq.data.begin(), seq.data.end());
    return {Tensor::constant({seq.frames(), seq.dim}, std::move(v)), diff::Mask(seq.frames(), 1)};
}

SequenceInput pad_sequence(const SequenceInput& in, std::size_t frames) {
    const std::size_t t = in.features.rows(), d = in.features.cols();
    if (frames <= t) return in;
    std::vector<double> v(frames * d, 0.0);
    std::copy(in.features.values().begin(), in.features.values().end(), v.begin());
    diff::Mask m(frames, 0);
    std::copy(in.mask.begin(), in.mask.end(), m.begin());
    return {Tensor::constant({frames, d}, std::move(v)), std::move(m)};
}

ModelInput make_input(const featstore::FeatureSequence* visual, const featstore::FeatureSequence* audio,
                      const Hyperparams& hp) {
    auto need = [](const featstore::FeatureSequence* s, std::string_view m) -> const featstore::FeatureSequence& {
        require(s != nullptr && !s->empty(), ErrorKind::Data, "missing or empty '" + std::string(m) + "' stream");
        return *s;
    };
    switch (hp.fusion_mode) {
    case FusionMode::VisualOnly:
        return {to_sequence_input(need(visual, featstore::kVisual)), std::nullopt};
    case FusionMode::AudioOnly:
        return {to_sequence_input(need(audio, featstore::kAudio)), std::nullopt};
    case FusionMode::Concat: {
        const featstore::FeatureSequence parts[] = {need(visual, featstore::kVisual), need(audio, featstore::kAudio)};
        return {to_sequence_input(featstore::concat_streams(parts, featstore::AlignPolicy::Nearest)), std::nullopt};
    }
    case FusionMode::CrossAttention:
        return {to_sequence_input(need(visual, featstore::kVisual)), to_sequence_input(need(audio, featstore::kAudio))};
    }
    fail(ErrorKind::Config, "unknown fusion mode");
}

ModelInput make_input(const featstore::MultimodalSample& sample, const Hyperparams& hp) {
    try {
        return make_input(sample.stream(featstore::kVisual), sample.stream(featstore::kAudio), hp);
    } catch (const Error& e) {
        fail(e.kind(), "sample '" + sample.sample_id + "': " + e.what());
    }
}

featstore::EmotionVector to_emotion(const Tensor& out) {
    require(out.size() == kNumEmotions, ErrorKind::Validation, "model output must have 7 entries");
    featstore::EmotionVector v{};
    std::copy(out.values().begin(), out.values().end(), v.begin());
    return v;
}

featstore::EmotionVector fuse_forward(const ModelParams& params, const Hyperparams& hp,
                                      const featstore::FeatureSequence* visual, const featstore::FeatureSequence* audio,
                                      bool train_mode, std::uint64_t dropout_seed) {
    const ParamSet ps = ParamSet::bind(params, false);
    ForwardContext ctx = train_mode ? ForwardContext::training(dropout_seed, 0) : ForwardContext::eval();
    return to_emotion(forward(ps, hp, make_input(visual, audio, hp), ctx));
}

} // namespace eri::encoders
