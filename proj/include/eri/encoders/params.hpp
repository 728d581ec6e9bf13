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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eri/diffcore/tensor.hpp"

namespace eri::encoders {

/// One named parameter array in storage precision.
struct NamedArray {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> values;

    bool operator==(const NamedArray&) const = default;
};

/// Parameters of one model, ordered by name.
struct ModelParams {
    std::string architecture;
    std::vector<NamedArray> tensors;

    const NamedArray* find(const std::string& name) const;
    NamedArray* find(const std::string& name);
    /// Throws Validation if absent.
    const NamedArray& at(const std::string& name) const;
    std::size_t total_size() const;

    bool operator==(const ModelParams&) const = default;
};

/// Compute-precision view of ModelParams used to build graphs.
class ParamSet {
public:
    ParamSet() = default;
    /// Widens every array to a 64-bit graph leaf.
    static ParamSet bind(const ModelParams& params, bool requires_grad);

    const diff::Tensor& operator[](const std::string& name) const;
    bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
    const std::map<std::string, diff::Tensor>& tensors() const { return tensors_; }
    std::map<std::string, diff::Tensor>& tensors() { return tensors_; }

    void zero_grad();
    /// Narrows the current values back into params (names must match).
    void store(ModelParams& params) const;

private:
    std::map<std::string, diff::Tensor> tensors_;
};

} // namespace eri::encoders
