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

#include "eri/featstore/featstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eri/common/error.hpp"

namespace eri::featstore {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

FeatureHeader parse_header(std::span<const std::uint8_t> bytes, const std::string& origin) {
    require(bytes.size() >= kHeaderBytes, ErrorKind::Format, origin + ": truncated header");
    require(std::memcmp(bytes.data(), kFeatureMagic, 4) == 0, ErrorKind::Format, origin + ": bad magic (expected ERIF)");
    FeatureHeader h;
    h.version = get_u32(bytes.data() + 4);
    h.dim = get_u32(bytes.data() + 8);
    h.frames = get_u32(bytes.data() + 12);
    require(h.version == kFeatureVersion, ErrorKind::Format,
            origin + ": unsupported version " + std::to_string(h.version));
    require(h.dim > 0, ErrorKind::Format, origin + ": dim must be positive");
    return h;
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Data, "cannot open feature file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FeatureSequence decode_impl(std::span<const std::uint8_t> bytes, std::string modality_id, const std::string& origin) {
    const FeatureHeader h = parse_header(bytes, origin);
    const std::uint64_t expected =
        kHeaderBytes + std::uint64_t{h.frames} * 8 + std::uint64_t{h.frames} * std::uint64_t{h.dim} * 4;
    require(bytes.size() == expected, ErrorKind::Corruption,
            origin + ": payload length " + std::to_string(bytes.size()) + " does not match frames=" +
                std::to_string(h.frames) + " dim=" + std::to_string(h.dim) + " (expected " +
                std::to_string(expected) + ")");
    FeatureSequence seq;
    seq.modality_id = std::move(modality_id);
    seq.dim = h.dim;
    seq.timestamps.resize(h.frames);
    seq.data.resize(std::size_t{h.frames} * h.dim);
    const std::uint8_t* p = bytes.data() + kHeaderBytes;
    for (auto& t : seq.timestamps) {
        t = std::bit_cast<double>(get_u64(p));
        p += 8;
    }
    for (auto& v : seq.data) {
        v = std::bit_cast<float>(get_u32(p));
        p += 4;
    }
    try {
        seq.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Validation, origin + ": " + e.what());
    }
    return seq;
}

json entry_to_json(const ManifestEntry& e) {
    json j;
    j["sample_id"] = e.sample_id;
    j["split"] = std::string(split_name(e.split));
    j["face_detected"] = e.face_detected;
    if (e.label) {
        j["label"] = json::array();
        for (double v : *e.label) j["label"].push_back(v);
    } else {
        j["label"] = nullptr;
    }
    j["streams"] = json::object();
    for (const auto& [m, p] : e.streams) j["streams"][m] = p.generic_string();
    return j;
}

ManifestEntry entry_from_json(const json& j, const std::string& where) {
    ManifestEntry e;
    try {
        e.sample_id = j.at("sample_id").get<std::string>();
        e.split = parse_split(j.at("split").get<std::string>());
        e.face_detected = j.at("face_detected").get<bool>();
        const json& lab = j.at("label");
        if (!lab.is_null()) {
            require(lab.is_array() && lab.size() == kNumEmotions, ErrorKind::Validation,
                    where + ": label must be an array of 7 numbers or null");
            EmotionVector v{};
            for (std::size_t i = 0; i < kNumEmotions; ++i) v[i] = lab[i].get<double>();
            validate_emotion(v);
            e.label = v;
        }
        for (const auto& [m, p] : j.at("streams").items()) e.streams[m] = fs::path(p.get<std::string>());
    } catch (const json::exception& ex) {
        fail(ErrorKind::Format, where + ": " + ex.what());
    } catch (const Error& ex) {
        fail(ex.kind(), where + ": " + ex.what());
    }
    return e;
}

} // namespace

std::vector<std::uint8_t> encode_feature_sequence(const FeatureSequence& seq) {
    seq.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + seq.frames() * 8 + seq.data.size() * 4);
    out.insert(out.end(), kFeatureMagic, kFeatureMagic + 4);
    put_u32(out, kFeatureVersion);
    put_u32(out, seq.dim);
    put_u32(out, static_cast<std::uint32_t>(seq.frames()));
    for (double t : seq.timestamps) put_u64(out, std::bit_cast<std::uint64_t>(t));
    for (float v : seq.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureSequence decode_feature_sequence(std::span<const std::uint8_t> bytes, std::string modality_id) {
    return decode_impl(bytes, std::move(modality_id), "<memory>");
}

FeatureSequence read_feature_file(const fs::path& path, std::string modality_id) {
    const auto bytes = read_all(path);
    return decode_impl(bytes, std::move(modality_id), path.string());
}

FeatureHeader read_feature_header(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Data, "cannot open feature file: " + path.string());
    std::uint8_t buf[kHeaderBytes];
    in.read(reinterpret_cast<char*>(buf), kHeaderBytes);
    return parse_header({buf, static_cast<std::size_t>(in.gcount())}, path.string());
}

void write_feature_file(const FeatureSequence& seq, const fs::path& path) {
    const auto bytes = encode_feature_sequence(seq);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Data, "cannot open manifest: " + path.string());
    DatasetManifest m;
    m.base_dir = path.parent_path();
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            fail(ErrorKind::Format, where + ": " + ex.what());
        }
        ManifestEntry e = entry_from_json(j, where);
        require(seen.insert(e.sample_id).second, ErrorKind::Validation,
                where + ": duplicate sample_id '" + e.sample_id + "'");
        if (e.split != Split::Test) {
            require(e.label.has_value(), ErrorKind::Validation,
                    where + ": " + std::string(split_name(e.split)) + " sample '" + e.sample_id + "' has no label");
        }
        for (const auto& [mod, rel] : e.streams) {
            const fs::path file = m.resolve(rel);
            require(fs::exists(file), ErrorKind::Data, where + ": feature file not found: " + file.string());
            const FeatureHeader h = read_feature_header(file);
            auto [it, inserted] = m.dims.emplace(mod, h.dim);
            require(inserted || it->second == h.dim, ErrorKind::Data,
                    where + ": modality '" + mod + "' dim " + std::to_string(h.dim) + " in " + file.string() +
                        " differs from declared dim " + std::to_string(it->second));
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    for (const auto& e : manifest.entries) out << entry_to_json(e).dump() << '\n';
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

DatasetManifest filter_trainable(const DatasetManifest& manifest) {
    DatasetManifest out;
    out.base_dir = manifest.base_dir;
    out.dims = manifest.dims;
    for (const auto& e : manifest.entries) {
        if (e.split == Split::Train && !e.face_detected) continue;
        out.entries.push_back(e);
    }
    return out;
}

std::vector<std::size_t> nearest_indices(std::span<const double> reference, std::span<const double> other) {
    require(!other.empty(), ErrorKind::Validation, "nearest_indices: empty target timeline");
    std::vector<std::size_t> idx(reference.size());
    std::size_t j = 0;
    // both timelines are strictly increasing, so the best match only moves forward
    for (std::size_t i = 0; i < reference.size(); ++i) {
        while (j + 1 < other.size() && std::abs(other[j + 1] - reference[i]) < std::abs(other[j] - reference[i])) ++j;
        idx[i] = j;
    }
    return idx;
}

FeatureSequence concat_streams(std::span<const FeatureSequence> seqs, AlignPolicy policy) {
    require(!seqs.empty(), ErrorKind::Validation, "concat_streams: no input sequences");
    for (const auto& s : seqs) {
        require(!s.empty(), ErrorKind::Validation, "concat_streams: empty sequence '" + s.modality_id + "'");
    }
    if (seqs.size() == 1) return seqs[0];

    const FeatureSequence& ref = seqs[0];
    std::size_t rows = ref.frames();
    if (policy == AlignPolicy::Truncate) {
        for (const auto& s : seqs) rows = std::min(rows, s.frames());
    }

    std::vector<std::vector<std::size_t>> maps;
    std::uint32_t dim = 0;
    std::string id;
    for (const auto& s : seqs) {
        dim += s.dim;
        id += (id.empty() ? "" : "+") + s.modality_id;
        if (policy == AlignPolicy::Nearest) {
            maps.push_back(nearest_indices(std::span(ref.timestamps).first(rows), s.timestamps));
        } else {
            std::vector<std::size_t> m(rows);
            for (std::size_t t = 0; t < rows; ++t) m[t] = t;
            maps.push_back(std::move(m));
        }
    }

    FeatureSequence out;
    out.modality_id = id;
    out.dim = dim;
    out.timestamps.assign(ref.timestamps.begin(), ref.timestamps.begin() + static_cast<std::ptrdiff_t>(rows));
    out.data.reserve(rows * dim);
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t k = 0; k < seqs.size(); ++k) {
            auto r = seqs[k].row(maps[k][t]);
            out.data.insert(out.data.end(), r.begin(), r.end());
        }
    }
    return out;
}

MultimodalSample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry) {
    MultimodalSample s;
    s.sample_id = entry.sample_id;
    s.label = entry.label;
    s.split = entry.split;
    s.face_detected = entry.face_detected;
    for (const auto& [mod, rel] : entry.streams) {
        s.streams.emplace(mod, read_feature_file(manifest.resolve(rel), mod));
    }
    return s;
}

std::vector<MultimodalSample> load_split(const DatasetManifest& manifest, Split split) {
    std::vector<MultimodalSample> out;
    for (const auto& e : manifest.entries) {
        if (e.split == split) out.push_back(load_sample(manifest, e));
    }
    return out;
}

void write_labels_csv(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out << "sample_id";
    for (std::size_t i = 0; i < kNumEmotions; ++i) out << ",e" << i;
    out << '\n';
    char buf[32];
    for (const auto& e : manifest.entries) {
        if (!e.label) continue;
        out << e.sample_id;
        for (double v : *e.label) {
            std::snprintf(buf, sizeof buf, "%.6f", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace eri::featstore
