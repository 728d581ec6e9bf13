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

#include "eri/common/error.hpp"

namespace eri {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Format:
        return "format";
    case ErrorKind::Corruption:
        return "corruption";
    case ErrorKind::Validation:
        return "validation";
    case ErrorKind::Config:
        return "config";
    case ErrorKind::Data:
        return "data";
    case ErrorKind::Numerical:
        return "numerical";
    case ErrorKind::Io:
        return "io";
    }
    return "unknown";
}

} // namespace eri
