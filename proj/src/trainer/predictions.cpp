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

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eri/common/error.hpp"
#include "eri/trainer/trainer.hpp"

namespace eri::trainer {

void write_predictions_csv(const Predictions& p, const std::filesystem::path& path) {
    require(p.sample_ids.size() == p.values.size(), ErrorKind::Validation, "predictions: id/value count mismatch");
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out << "sample_id";
    for (std::size_t e = 0; e < featstore::kNumEmotions; ++e) out << ",e" << e;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        out << p.sample_ids[i];
        for (double v : p.values[i]) {
            std::snprintf(buf, sizeof buf, "%.6f", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

Predictions read_predictions_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Data, "cannot open predictions: " + path.string());
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line.rfind("sample_id,", 0) == 0, ErrorKind::Format,
            path.string() + ": missing header");
    Predictions p;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        p.sample_ids.push_back(cell);
        featstore::EmotionVector v{};
        for (std::size_t e = 0; e < featstore::kNumEmotions; ++e) {
            require(static_cast<bool>(std::getline(ss, cell, ',')), ErrorKind::Format,
                    path.string() + ":" + std::to_string(lineno) + ": expected 8 columns");
            try {
                v[e] = std::stod(cell);
            } catch (const std::exception&) {
                fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        p.values.push_back(v);
    }
    return p;
}

} // namespace eri::trainer
