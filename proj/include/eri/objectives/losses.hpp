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

#include "eri/diffcore/tensor.hpp"

namespace eri::objectives {

/// Mean squared error over every entry of two B x 7 tensors.
diff::Tensor mse_loss(const diff::Tensor& pred, const diff::Tensor& target);

/// 1 - mean over emotions of the within-batch Pearson correlation. Degenerate
/// columns contribute correlation 0 and no gradient. Needs B >= 2.
diff::Tensor pcc_loss(const diff::Tensor& pred, const diff::Tensor& target);

} // namespace eri::objectives
