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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "eri/cli/commands.hpp"
#include "eri/cli/config.hpp"
#include "support/test_util.hpp"

using namespace eri;
using namespace eri::cli;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "eri");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

json summary(const std::filesystem::path& dir) { return json::parse(test::read_text(dir / "run_summary.json")); }

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(test::read_text(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

// small dataset and model so the pipeline runs in a fraction of a second
void write_small_config(const std::filesystem::path& p) {
    std::ofstream(p) << json{{"synth.n_train", 20},     {"synth.n_val", 6},         {"synth.n_test", 2},
                             {"synth.visual_dim", 5},   {"synth.audio_dim", 3},     {"hp.hidden_dim", 8},
                             {"hp.num_heads", 2},       {"hp.num_layers", 1},       {"hp.max_epochs", 2},
                             {"search.hidden_min", 8},  {"search.hidden_max", 16},  {"search.max_epochs_per_trial", 2},
                             {"log.verbosity", "quiet"}}
                            .dump();
}

} // namespace

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ErrorKind::Config) == 2);
    for (auto k : {ErrorKind::Data, ErrorKind::Format, ErrorKind::Corruption, ErrorKind::Validation})
        CHECK(exit_code_for(k) == 3);
    CHECK(exit_code_for(ErrorKind::Numerical) == 4);
    CHECK(exit_code_for(ErrorKind::Io) == 4);
}

TEST_CASE("synth, train, eval, tune, ensemble and labelcorr") {
    test::TempDir dir("cli");
    const auto cfg = dir / "cfg.json";
    write_small_config(cfg);
    const auto data = (dir / "data").string(), manifest = (dir / "data/manifest.jsonl").string();

    REQUIRE(run({"synth", "--config", cfg.string(), "--out", data}) == 0);
    CHECK(summary(dir / "data").at("status") == "ok");
    CHECK(summary(dir / "data").at("seed") == 42);

    REQUIRE(run({"train", "--config", cfg.string(), "--manifest", manifest, "--out", (dir / "t1").string()}) == 0);
    for (auto f : {"checkpoint.eri", "history.jsonl", "metrics.json", "predictions_val.csv", "run_summary.json"})
        CHECK(std::filesystem::exists(dir / ("t1/" + std::string(f))));
    const auto s = summary(dir / "t1");
    CHECK(s.at("exit_code") == 0);
    CHECK(s.at("config").at("hp.hidden_dim") == 8);

    REQUIRE(run({"eval", "--config", cfg.string(), "--manifest", manifest, "--checkpoint",
                 (dir / "t1/checkpoint.eri").string(), "--out", (dir / "e").string()}) == 0);
    const auto metrics = json::parse(test::read_text(dir / "e/metrics.json"));
    CHECK(metrics.at("mean_pcc") == json::parse(test::read_text(dir / "t1/metrics.json")).at("mean_pcc"));
    CHECK(std::filesystem::exists(dir / "e/predictions_val.csv"));

    REQUIRE(run({"eval", "--config", cfg.string(), "--manifest", manifest, "--checkpoint",
                 (dir / "t1/checkpoint.eri").string(), "--split", "test", "--out", (dir / "et").string()}) == 3);
    CHECK(summary(dir / "et").at("status") == "error");

    REQUIRE(run({"train", "--config", cfg.string(), "--manifest", manifest, "--seed", "7", "--loss", "pcc", "--out",
                 (dir / "t2").string()}) == 0);
    CHECK(summary(dir / "t2").at("seed") == 7);
    CHECK(summary(dir / "t2").at("config").at("hp.loss_kind") == "pcc");

    REQUIRE(run({"ensemble", "--config", cfg.string(), "--manifest", manifest, "--member",
                 (dir / "t1/checkpoint.eri").string(), "--member", (dir / "t2/checkpoint.eri").string(), "--out",
                 (dir / "en").string()}) == 0);
    const auto report = read_csv(dir / "en/ensemble_report.csv");
    REQUIRE(report.size() == 3);
    CHECK(report[0] == std::vector<std::string>{"k", "member_id", "mean_pcc"});
    CHECK(std::filesystem::exists(dir / "en/ensemble_predictions.csv"));

    REQUIRE(run({"tune", "--config", cfg.string(), "--manifest", manifest, "--trials", "3", "--parallelism", "2",
                 "--out", (dir / "tu").string()}) == 0);
    const auto trials = test::read_text(dir / "tu/trials.jsonl");
    CHECK(std::count(trials.begin(), trials.end(), '\n') == 3);
    CHECK(summary(dir / "tu").at("config").at("search.trials") == 3);

    REQUIRE(run({"labelcorr", "--manifest", manifest, "--out", (dir / "lc").string()}) == 0);
    const auto corr = read_csv(dir / "lc/label_corr.csv");
    REQUIRE(corr.size() == 8);
    for (std::size_t i = 1; i <= 7; ++i) {
        REQUIRE(corr[i].size() == 8);
        CHECK(std::stod(corr[i][i]) == doctest::Approx(1.0).epsilon(1e-6));
        for (std::size_t j = 1; j <= 7; ++j) CHECK(corr[i][j] == corr[j][i]);
    }
}

TEST_CASE("error contract") {
    test::TempDir dir("clierr");
    const auto missing = (dir / "nowhere/manifest.jsonl").string();
    CHECK(run({"train", "--manifest", missing, "--out", (dir / "o").string()}) == 3);
    const auto s = summary(dir / "o");
    CHECK(s.at("status") == "error");
    CHECK(s.at("exit_code") == 3);
    CHECK(s.at("seed") == 42);
    CHECK(s.at("error").at("message").get<std::string>().find(missing) != std::string::npos);

    CHECK(run({"train", "--out", (dir / "o2").string()}) == 2);
    CHECK(run({"train", "--loss", "huber", "--out", (dir / "o3").string()}) == 2);
    CHECK(run({"bogus"}) == 2);
    CHECK(run({"train", "--manifest", missing}) == 2);

    std::ofstream(dir / "bad.json") << R"({"hp.hidden": 3})";
    CHECK(run({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "o4").string()}) == 2);
    std::ofstream(dir / "typed.json") << R"({"hp.batch_size": "big"})";
    CHECK(run({"train", "--config", (dir / "typed.json").string(), "--out", (dir / "o5").string()}) == 2);
    std::ofstream(dir / "broken.json") << "{";
    CHECK(run({"train", "--config", (dir / "broken.json").string(), "--out", (dir / "o6").string()}) == 2);
}

TEST_CASE("precedence: flag over file over default") {
    RunConfig d;
    CHECK(d.seed == 42);
    test::TempDir dir("cliprec");
    std::ofstream(dir / "c.json") << R"({"seed": 5, "hp.fusion_mode": "concat", "paths.out": "/x"})";
    const auto f = load_config_file(dir / "c.json");
    CHECK(f.seed == 5);
    CHECK(f.hp.fusion_mode == encoders::FusionMode::Concat);
    CHECK(f.hp.learning_rate == d.hp.learning_rate);

    write_small_config(dir / "small.json");
    REQUIRE(run({"synth", "--config", (dir / "small.json").string(), "--out", (dir / "data").string()}) == 0);
    std::ofstream(dir / "c2.json") << R"({"seed": 5, "hp.fusion_mode": "concat", "hp.hidden_dim": 8,
        "hp.num_heads": 2, "hp.num_layers": 1, "hp.max_epochs": 1, "log.verbosity": "quiet"})";
    REQUIRE(run({"train", "--config", (dir / "c2.json").string(), "--manifest",
                 (dir / "data/manifest.jsonl").string(), "--seed", "9", "--fusion", "cross_attention", "--out",
                 (dir / "o").string()}) == 0);
    const auto s = summary(dir / "o");
    CHECK(s.at("seed") == 9);
    CHECK(s.at("config").at("hp.fusion_mode") == "cross_attention");
    CHECK(s.at("config").at("hp.hidden_dim") == 8);

    const auto flat = to_flat_json(f);
    RunConfig again;
    apply_flat_config(again, flat);
    CHECK(to_flat_json(again) == flat);
}

TEST_CASE("reruns reproduce artifact bytes") {
    test::TempDir dir("clirerun");
    write_small_config(dir / "c.json");
    const auto cfg = (dir / "c.json").string();
    REQUIRE(run({"synth", "--config", cfg, "--out", (dir / "data").string()}) == 0);
    const auto manifest = (dir / "data/manifest.jsonl").string();
    const auto out = dir / "run";
    const std::vector<std::string> files = {"checkpoint.eri", "metrics.json", "predictions_val.csv",
                                            "run_summary.json"};
    std::vector<std::vector<std::uint8_t>> first;
    REQUIRE(run({"train", "--config", cfg, "--manifest", manifest, "--out", out.string()}) == 0);
    for (const auto& f : files) first.push_back(test::read_bytes(out / f));
    std::filesystem::remove_all(out);
    REQUIRE(run({"train", "--config", cfg, "--manifest", manifest, "--out", out.string()}) == 0);
    for (std::size_t i = 0; i < files.size(); ++i) {
        CAPTURE(files[i]);
        CHECK(test::read_bytes(out / files[i]) == first[i]);
    }
}
