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

#include <string>
#include <vector>

#include "eri/cli/config.hpp"
#include "eri/common/error.hpp"

namespace eri::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

int exit_code_for(ErrorKind kind);

// Each command writes its artifacts plus run_summary.json into cfg.out_dir.
int cmd_synth(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_tune(const RunConfig& cfg);
int cmd_ensemble(const RunConfig& cfg);
int cmd_labelcorr(const RunConfig& cfg);

/// Full entry point: parses argv, resolves config, dispatches.
int run_cli(int argc, char** argv);

} // namespace eri::cli
