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

#include "eri/encoders/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "eri/common/error.hpp"

namespace eri::encoders {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        require(pos_ + n <= bytes_.size(), ErrorKind::Corruption, "checkpoint: truncated at byte " + std::to_string(pos_));
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    nlohmann::json header;
    header["architecture"] = ckpt.params.architecture;
    header["hyperparams"] = to_json(ckpt.hp);
    header["input_dims"] = ckpt.input_dims;
    header["seed"] = ckpt.hp.seed;
    header["metadata"] = ckpt.metadata;
    const std::string hdr = header.dump();

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(hdr.size()));
    out.insert(out.end(), hdr.begin(), hdr.end());
    put_u32(out, static_cast<std::uint32_t>(ckpt.params.tensors.size()));
    for (const auto& t : ckpt.params.tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (const auto& t : ckpt.params.tensors) {
        for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    require(bytes.size() >= 4 && std::memcmp(bytes.data(), kCheckpointMagic, 4) == 0, ErrorKind::Format,
            "checkpoint: bad magic (expected ERIC)");
    Reader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    require(version == kCheckpointVersion, ErrorKind::Format,
            "checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t hdr_len = r.u32();
    Checkpoint ckpt;
    try {
        const auto header = nlohmann::json::parse(r.str(hdr_len));
        ckpt.params.architecture = header.at("architecture").get<std::string>();
        ckpt.hp = hyperparams_from_json(header.at("hyperparams"));
        ckpt.input_dims = header.at("input_dims").get<InputDims>();
        ckpt.metadata = header.at("metadata");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Format, std::string("checkpoint header: ") + e.what());
    }
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedArray a;
        a.name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        for (std::uint32_t k = 0; k < rank; ++k) a.shape.push_back(r.u32());
        a.values.resize(diff::shape_size(a.shape));
        ckpt.params.tensors.push_back(std::move(a));
    }
    for (auto& t : ckpt.params.tensors) {
        for (auto& v : t.values) v = std::bit_cast<float>(r.u32());
    }
    require(r.done(), ErrorKind::Corruption, "checkpoint: trailing bytes after tensor data");
    return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Data, "cannot open checkpoint: " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return decode_checkpoint(bytes);
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

} // namespace eri::encoders
