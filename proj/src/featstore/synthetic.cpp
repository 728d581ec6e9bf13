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

#include "eri/featstore/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "eri/common/error.hpp"
#include "eri/common/rng.hpp"
#include "eri/featstore/featstore.hpp"

namespace eri::featstore {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kStructureStream = 0x5eed'57a7'1c00'0001ULL;
constexpr double kLogitGain = 0.6;

struct Structure {
    std::vector<double> visual_proj;  // visual_dim x latent_dim
    std::vector<double> audio_proj;   // audio_dim x latent_dim
    std::vector<double> visual_head;  // 7 x visual_dim
    std::vector<double> audio_head;   // 7 x audio_dim
    std::vector<double> bias;         // 7
};

Structure make_structure(const SynthSpec& spec, std::uint64_t seed) {
    Rng rng(hash_combine(seed, kStructureStream));
    Structure s;
    auto fill = [&rng](std::vector<double>& v, std::size_t n, double scale) {
        v.resize(n);
        for (auto& x : v) x = scale * rng.normal();
    };
    fill(s.visual_proj, std::size_t{spec.visual_dim} * spec.latent_dim, 1.0);
    fill(s.audio_proj, std::size_t{spec.audio_dim} * spec.latent_dim, 1.0);
    fill(s.visual_head, kNumEmotions * spec.visual_dim, 1.0 / std::sqrt(double(spec.visual_dim)));
    fill(s.audio_head, kNumEmotions * spec.audio_dim, 1.0 / std::sqrt(double(spec.audio_dim)));
    fill(s.bias, kNumEmotions, 0.3);
    return s;
}

FeatureSequence make_stream(Rng& rng, std::string modality, std::uint32_t dim, std::uint32_t frames, double hop,
                            const std::vector<double>& proj, const std::vector<double>& latent, double noise) {
    const std::size_t latent_dim = latent.size();
    FeatureSequence seq;
    seq.modality_id = std::move(modality);
    seq.dim = dim;
    seq.timestamps.resize(frames);
    seq.data.resize(std::size_t{frames} * dim);
    const double freq = rng.uniform(0.2, 1.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::uint32_t t = 0; t < frames; ++t) {
        seq.timestamps[t] = t * hop;
        const double wave = 0.5 * std::sin(2.0 * std::numbers::pi * freq * seq.timestamps[t] + phase);
        for (std::uint32_t d = 0; d < dim; ++d) {
            double v = 0.0;
            for (std::size_t k = 0; k < latent_dim; ++k) v += proj[d * latent_dim + k] * latent[k];
            v += wave * ((d % 2 == 0) ? 1.0 : -1.0) + noise * rng.normal();
            seq.data[std::size_t{t} * dim + d] = static_cast<float>(v);
        }
    }
    return seq;
}

std::vector<double> pooled(const FeatureSequence& seq) {
    std::vector<double> m(seq.dim, 0.0);
    for (std::size_t t = 0; t < seq.frames(); ++t) {
        auto r = seq.row(t);
        for (std::size_t d = 0; d < seq.dim; ++d) m[d] += r[d];
    }
    for (auto& v : m) v /= static_cast<double>(seq.frames());
    return m;
}

std::string sample_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%05zu", i);
    return buf;
}

} // namespace

DatasetManifest gen_synthetic(const SynthSpec& spec, std::uint64_t seed, const fs::path& out_dir) {
    const std::size_t total = std::size_t{spec.n_train} + spec.n_val + spec.n_test;
    require(total > 0, ErrorKind::Config, "synth: zero samples requested");
    require(spec.visual_dim > 0 && spec.audio_dim > 0, ErrorKind::Config, "synth: dims must be positive");
    require(spec.min_frames >= 1 && spec.min_frames <= spec.max_frames, ErrorKind::Config,
            "synth: frames range must satisfy 1 <= min_frames <= max_frames");
    require(spec.visual_hop > 0.0 && spec.audio_hop > 0.0, ErrorKind::Config, "synth: hops must be positive");
    require(spec.no_face_fraction >= 0.0 && spec.no_face_fraction <= 1.0, ErrorKind::Config,
            "synth: no_face_fraction must lie in [0,1]");
    require(spec.latent_dim >= 1, ErrorKind::Config, "synth: latent_dim must be positive");

    fs::create_directories(out_dir / "features");
    const Structure st = make_structure(spec, seed);

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    manifest.dims = {{std::string(kVisual), spec.visual_dim}, {std::string(kAudio), spec.audio_dim}};

    for (std::size_t i = 0; i < total; ++i) {
        Rng rng(hash_combine(seed, i));
        const Split split = i < spec.n_train ? Split::Train : (i < std::size_t{spec.n_train} + spec.n_val ? Split::Val
                                                                                                        : Split::Test);
        const auto frames = static_cast<std::uint32_t>(rng.uniform_int(spec.min_frames, spec.max_frames));
        const double duration = frames * spec.visual_hop;
        const auto audio_frames =
            std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(duration / spec.audio_hop)));

        std::vector<double> latent(spec.latent_dim);
        for (auto& z : latent) z = rng.normal();
        const bool no_face = split != Split::Test && rng.uniform() < spec.no_face_fraction;

        FeatureSequence visual = make_stream(rng, std::string(kVisual), spec.visual_dim, frames, spec.visual_hop,
                                             st.visual_proj, latent, spec.frame_noise);
        FeatureSequence audio = make_stream(rng, std::string(kAudio), spec.audio_dim, audio_frames, spec.audio_hop,
                                            st.audio_proj, latent, spec.frame_noise);

        const auto pv = pooled(visual);
        const auto pa = pooled(audio);
        EmotionVector label{};
        for (std::size_t e = 0; e < kNumEmotions; ++e) {
            double z = st.bias[e];
            for (std::size_t d = 0; d < pv.size(); ++d) z += kLogitGain * st.visual_head[e * pv.size() + d] * pv[d];
            for (std::size_t d = 0; d < pa.size(); ++d)
                z += spec.audio_weight * kLogitGain * st.audio_head[e * pa.size() + d] * pa[d];
            label[e] = 1.0 / (1.0 + std::exp(-z));
        }

        if (no_face) {
            // fallback content: a degraded view of the clean stream
            for (auto& v : visual.data) v = static_cast<float>(0.5 * v + rng.normal());
        }

        ManifestEntry entry;
        entry.sample_id = sample_name(i);
        entry.split = split;
        entry.face_detected = !no_face;
        if (split != Split::Test) entry.label = label;
        for (const FeatureSequence* seq : {&visual, &audio}) {
            const fs::path rel = fs::path("features") / (entry.sample_id + "." + seq->modality_id + ".erif");
            write_feature_file(*seq, out_dir / rel);
            entry.streams[seq->modality_id] = rel;
        }
        manifest.entries.push_back(std::move(entry));
    }

    write_manifest(manifest, out_dir / "manifest.jsonl");
    write_labels_csv(manifest, out_dir / "labels.csv");
    return manifest;
}

} // namespace eri::featstore
