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

#include "eri/cli/config.hpp"

#include <fstream>

#include "eri/common/error.hpp"

namespace eri::cli {

using nlohmann::json;

namespace {

std::uint32_t as_u32(const json& v, const std::string& key) {
    require(v.is_number_unsigned() && v.get<std::uint64_t>() <= 0xffffffffULL, ErrorKind::Config,
            "config key '" + key + "' must be a non-negative integer");
    return v.get<std::uint32_t>();
}

double as_f64(const json& v, const std::string& key) {
    require(v.is_number(), ErrorKind::Config, "config key '" + key + "' must be a number");
    return v.get<double>();
}

std::string as_str(const json& v, const std::string& key) {
    require(v.is_string(), ErrorKind::Config, "config key '" + key + "' must be a string");
    return v.get<std::string>();
}

Verbosity parse_verbosity(const std::string& s) {
    if (s == "quiet") return Verbosity::Quiet;
    if (s == "info") return Verbosity::Info;
    if (s == "debug") return Verbosity::Debug;
    fail(ErrorKind::Config, "config key 'log.verbosity' must be quiet, info or debug, got '" + s + "'");
}

const char* verbosity_name(Verbosity v) {
    return v == Verbosity::Quiet ? "quiet" : (v == Verbosity::Debug ? "debug" : "info");
}

void apply_search(tuner::SearchSpace& s, const std::string& field, const json& v, const std::string& key) {
    if (field == "lr_min") s.lr_min = as_f64(v, key);
    else if (field == "lr_max") s.lr_max = as_f64(v, key);
    else if (field == "batch_min") s.batch_min = as_u32(v, key);
    else if (field == "batch_max") s.batch_max = as_u32(v, key);
    else if (field == "hidden_min") s.hidden_min = as_u32(v, key);
    else if (field == "hidden_max") s.hidden_max = as_u32(v, key);
    else if (field == "trials") s.trials = as_u32(v, key);
    else if (field == "max_epochs_per_trial") s.max_epochs_per_trial = as_u32(v, key);
    else if (field == "dropout_range" || field == "layers_range") {
        require(v.is_array() && v.size() == 2, ErrorKind::Config, "config key '" + key + "' must be [lo, hi]");
        if (field == "dropout_range") s.dropout_range = std::pair{as_f64(v[0], key), as_f64(v[1], key)};
        else s.layers_range = std::pair{as_u32(v[0], key), as_u32(v[1], key)};
    } else {
        fail(ErrorKind::Config, "unknown config key '" + key + "'");
    }
}

void apply_synth(featstore::SynthSpec& s, const std::string& field, const json& v, const std::string& key) {
    if (field == "n_train") s.n_train = as_u32(v, key);
    else if (field == "n_val") s.n_val = as_u32(v, key);
    else if (field == "n_test") s.n_test = as_u32(v, key);
    else if (field == "visual_dim") s.visual_dim = as_u32(v, key);
    else if (field == "audio_dim") s.audio_dim = as_u32(v, key);
    else if (field == "min_frames") s.min_frames = as_u32(v, key);
    else if (field == "max_frames") s.max_frames = as_u32(v, key);
    else if (field == "visual_hop") s.visual_hop = as_f64(v, key);
    else if (field == "audio_hop") s.audio_hop = as_f64(v, key);
    else if (field == "no_face_fraction") s.no_face_fraction = as_f64(v, key);
    else if (field == "audio_weight") s.audio_weight = as_f64(v, key);
    else if (field == "frame_noise") s.frame_noise = as_f64(v, key);
    else if (field == "latent_dim") s.latent_dim = as_u32(v, key);
    else fail(ErrorKind::Config, "unknown config key '" + key + "'");
}

} // namespace

void apply_flat_config(RunConfig& cfg, const json& flat) {
    require(flat.is_object(), ErrorKind::Config, "config must be a JSON object of dotted keys");
    for (const auto& [key, v] : flat.items()) {
        const auto dot = key.find('.');
        const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string field = dot == std::string::npos ? key : key.substr(dot + 1);
        if (key == "seed") {
            require(v.is_number_unsigned(), ErrorKind::Config, "config key 'seed' must be a non-negative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "parallelism") {
            cfg.parallelism = as_u32(v, key);
            require(cfg.parallelism >= 1, ErrorKind::Config, "config key 'parallelism' must be >= 1");
        } else if (key == "log.verbosity") {
            cfg.verbosity = parse_verbosity(as_str(v, key));
        } else if (key == "paths.manifest") {
            cfg.manifest = as_str(v, key);
        } else if (key == "paths.out") {
            cfg.out_dir = as_str(v, key);
        } else if (key == "paths.checkpoint") {
            cfg.checkpoint = as_str(v, key);
        } else if (key == "eval.split") {
            cfg.split = as_str(v, key);
        } else if (key == "ensemble.members") {
            require(v.is_array(), ErrorKind::Config, "config key 'ensemble.members' must be an array of paths");
            cfg.members.clear();
            for (const auto& m : v) cfg.members.emplace_back(as_str(m, key));
        } else if (key == "ensemble.weights") {
            require(v.is_array(), ErrorKind::Config, "config key 'ensemble.weights' must be an array of numbers");
            cfg.member_weights.clear();
            for (const auto& w : v) cfg.member_weights.push_back(as_f64(w, key));
        } else if (section == "hp") {
            try {
                cfg.hp = encoders::hyperparams_from_json(json{{field, v}}, cfg.hp);
            } catch (const Error& e) {
                fail(ErrorKind::Config, "config key '" + key + "': " + e.what());
            }
        } else if (section == "search") {
            apply_search(cfg.search, field, v, key);
        } else if (section == "synth") {
            apply_synth(cfg.synth, field, v, key);
        } else {
            fail(ErrorKind::Config, "unknown config key '" + key + "'");
        }
    }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Config, "cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "config file " + path.string() + ": " + e.what());
    }
    apply_flat_config(base, j);
    return base;
}

json to_flat_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["parallelism"] = cfg.parallelism;
    j["log.verbosity"] = verbosity_name(cfg.verbosity);
    j["paths.manifest"] = cfg.manifest.generic_string();
    j["paths.out"] = cfg.out_dir.generic_string();
    j["paths.checkpoint"] = cfg.checkpoint.generic_string();
    j["eval.split"] = cfg.split;
    j["ensemble.members"] = json::array();
    for (const auto& m : cfg.members) j["ensemble.members"].push_back(m.generic_string());
    j["ensemble.weights"] = cfg.member_weights;
    const json hp = encoders::to_json(cfg.hp);
    for (const auto& [k, v] : hp.items()) j["hp." + k] = v;
    const json search = tuner::to_json(cfg.search);
    for (const auto& [k, v] : search.items()) {
        if (k != "base" && k != "loss_kind") j["search." + k] = v;
    }
    const auto& s = cfg.synth;
    j["synth.n_train"] = s.n_train;
    j["synth.n_val"] = s.n_val;
    j["synth.n_test"] = s.n_test;
    j["synth.visual_dim"] = s.visual_dim;
    j["synth.audio_dim"] = s.audio_dim;
    j["synth.min_frames"] = s.min_frames;
    j["synth.max_frames"] = s.max_frames;
    j["synth.visual_hop"] = s.visual_hop;
    j["synth.audio_hop"] = s.audio_hop;
    j["synth.no_face_fraction"] = s.no_face_fraction;
    j["synth.audio_weight"] = s.audio_weight;
    j["synth.frame_noise"] = s.frame_noise;
    j["synth.latent_dim"] = s.latent_dim;
    return j;
}

} // namespace eri::cli
