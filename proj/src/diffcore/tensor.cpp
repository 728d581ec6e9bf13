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

#include "eri/diffcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "eri/common/error.hpp"

namespace eri::diff {

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

namespace {

void check_shape(const Shape& shape, std::size_t n, const char* op) {
    require(!shape.empty(), ErrorKind::Validation, std::string(op) + ": tensor must have rank >= 1");
    for (auto d : shape) require(d > 0, ErrorKind::Validation, std::string(op) + ": zero extent in " + shape_str(shape));
    require(shape_size(shape) == n, ErrorKind::Validation,
            std::string(op) + ": " + std::to_string(n) + " values for shape " + shape_str(shape));
}

void check_finite(std::span<const double> v, const char* op) {
    for (double x : v) {
        if (!std::isfinite(x)) fail(ErrorKind::Numerical, std::string("non-finite value produced by ") + op);
    }
}

} // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    check_shape(shape, values.size(), "constant");
    check_finite(values, "constant");
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    return Tensor(std::move(n));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
    Tensor t = constant(std::move(shape), std::move(values));
    t.node_->requires_grad = true;
    return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    std::vector<double> v(shape_size(shape), 0.0);
    Tensor t = constant(std::move(shape), std::move(v));
    t.node_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::from_op(const char* op, Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                       BackwardFn backward) {
    check_shape(shape, values.size(), op);
    check_finite(values, op);
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->op = op;
    for (const auto& in : inputs) {
        if (in.requires_grad()) {
            n->requires_grad = true;
            n->parents.push_back(in.node_);
        }
    }
    if (n->requires_grad) n->backward = std::move(backward);
    return Tensor(std::move(n));
}

std::size_t Tensor::rows() const { return node_->shape.size() < 2 ? 1 : size() / node_->shape.back(); }

std::size_t Tensor::cols() const { return node_->shape.back(); }

double Tensor::item() const {
    require(size() == 1, ErrorKind::Validation, "item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

std::span<double> Tensor::grad_buffer() const {
    if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
    require(size() == 1, ErrorKind::Validation, "backward() needs a single-element output, got " + shape_str(shape()));
    if (!node_->requires_grad) return;

    // iterative post-order DFS gives a topological order
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (visited.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    for (Node* n : order) {
        if (n->grad.size() != n->value.size()) n->grad.assign(n->value.size(), 0.0);
    }
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward) n->backward(n->grad);
    }
    // intermediate gradients are not needed past this point
    for (Node* n : order) {
        if (n->backward) {
            n->grad.clear();
            n->grad.shrink_to_fit();
        }
    }
}

} // namespace eri::diff
