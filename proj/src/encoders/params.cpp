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

#include "eri/encoders/params.hpp"

#include "eri/common/error.hpp"
#include "eri/simd/kernels.hpp"

namespace eri::encoders {

const NamedArray* ModelParams::find(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

NamedArray* ModelParams::find(const std::string& name) {
    for (auto& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const NamedArray& ModelParams::at(const std::string& name) const {
    const NamedArray* t = find(name);
    require(t != nullptr, ErrorKind::Validation, "model parameters have no tensor named '" + name + "'");
    return *t;
}

std::size_t ModelParams::total_size() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.values.size();
    return n;
}

ParamSet ParamSet::bind(const ModelParams& params, bool requires_grad) {
    ParamSet ps;
    const auto& kt = simd::active();
    for (const auto& t : params.tensors) {
        std::vector<double> v(t.values.size());
        kt.widen(t.values.data(), v.data(), v.size());
        ps.tensors_.emplace(t.name, requires_grad ? diff::Tensor::parameter(t.shape, std::move(v))
                                                  : diff::Tensor::constant(t.shape, std::move(v)));
    }
    return ps;
}

const diff::Tensor& ParamSet::operator[](const std::string& name) const {
    auto it = tensors_.find(name);
    require(it != tensors_.end(), ErrorKind::Validation, "missing model parameter '" + name + "'");
    return it->second;
}

void ParamSet::zero_grad() {
    for (auto& [_, t] : tensors_) t.zero_grad();
}

void ParamSet::store(ModelParams& params) const {
    const auto& kt = simd::active();
    for (auto& t : params.tensors) {
        const diff::Tensor& src = (*this)[t.name];
        require(src.size() == t.values.size(), ErrorKind::Validation, "size mismatch storing '" + t.name + "'");
        kt.narrow(src.values().data(), t.values.data(), t.values.size());
    }
}

} // namespace eri::encoders
