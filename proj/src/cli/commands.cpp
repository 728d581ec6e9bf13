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

#include "eri/cli/commands.hpp"

#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "eri/encoders/checkpoint.hpp"
#include "eri/ensembler/ensembler.hpp"
#include "eri/featstore/featstore.hpp"
#include "eri/objectives/metrics.hpp"
#include "eri/simd/kernels.hpp"
#include "eri/trainer/trainer.hpp"
#include "eri/tuner/tuner.hpp"

namespace eri::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const RunConfig& cfg, Verbosity level, const std::string& msg) {
    if (static_cast<int>(cfg.verbosity) >= static_cast<int>(level)) std::cerr << "[eri] " << msg << '\n';
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path.string());
}

featstore::DatasetManifest open_manifest(const RunConfig& cfg) {
    require(!cfg.manifest.empty(), ErrorKind::Config, "paths.manifest (--manifest) is required");
    require(fs::exists(cfg.manifest), ErrorKind::Data, "manifest not found: " + cfg.manifest.string());
    return featstore::read_manifest(cfg.manifest);
}

featstore::Split split_of(const RunConfig& cfg) {
    try {
        return featstore::parse_split(cfg.split);
    } catch (const Error& e) {
        fail(ErrorKind::Config, std::string("eval.split: ") + e.what());
    }
}

using Body = std::function<json(const RunConfig&)>;

int run_command(const char* name, const RunConfig& cfg, const Body& body) {
    if (cfg.out_dir.empty()) {
        std::cerr << "[eri] " << name << ": paths.out (--out) is required\n";
        return kExitConfig;
    }
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir)) {
        std::cerr << "[eri] " << name << ": output dir not writable: " << cfg.out_dir.string() << '\n';
        return kExitConfig;
    }

    json summary;
    summary["command"] = name;
    summary["seed"] = cfg.seed;
    summary["config"] = to_flat_json(cfg);
    int code = kExitOk;
    try {
        log(cfg, Verbosity::Debug, std::string("kernels: ") + simd::active().name);
        summary["results"] = body(cfg);
        summary["status"] = "ok";
    } catch (const Error& e) {
        code = exit_code_for(e.kind());
        summary["status"] = "error";
        summary["error"] = {{"kind", error_kind_name(e.kind())}, {"message", e.what()}};
        std::cerr << "[eri] " << name << " failed (" << error_kind_name(e.kind()) << "): " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = kExitRuntime;
        summary["status"] = "error";
        summary["error"] = {{"kind", "runtime"}, {"message", e.what()}};
        std::cerr << "[eri] " << name << " failed: " << e.what() << '\n';
    }
    summary["exit_code"] = code;
    try {
        write_json(summary, cfg.out_dir / "run_summary.json");
    } catch (const Error& e) {
        std::cerr << "[eri] could not write run summary: " << e.what() << '\n';
        if (code == kExitOk) code = kExitRuntime;
    }
    return code;
}

} // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config:
        return kExitConfig;
    case ErrorKind::Format:
    case ErrorKind::Corruption:
    case ErrorKind::Validation:
    case ErrorKind::Data:
        return kExitData;
    case ErrorKind::Numerical:
    case ErrorKind::Io:
        return kExitRuntime;
    }
    return kExitRuntime;
}

int cmd_synth(const RunConfig& cfg) {
    return run_command("synth", cfg, [](const RunConfig& c) {
        const auto m = featstore::gen_synthetic(c.synth, c.seed, c.out_dir);
        log(c, Verbosity::Info, "wrote " + std::to_string(m.entries.size()) + " samples to " + c.out_dir.string());
        return json{{"manifest", (c.out_dir / "manifest.jsonl").generic_string()},
                    {"n_train", m.count(featstore::Split::Train)},
                    {"n_val", m.count(featstore::Split::Val)},
                    {"n_test", m.count(featstore::Split::Test)}};
    });
}

int cmd_train(const RunConfig& cfg) {
    return run_command("train", cfg, [](const RunConfig& c) {
        c.hp.validate();
        const auto manifest = open_manifest(c);
        auto hp = c.hp;
        hp.seed = c.seed;
        const auto result = trainer::train(manifest, hp);
        for (const auto& e : result.history.epochs) {
            log(c, Verbosity::Info,
                "epoch " + std::to_string(e.epoch) + " loss=" + std::to_string(e.train_loss) +
                    " val_mean_pcc=" + std::to_string(e.val_mean_pcc));
        }
        encoders::write_checkpoint(result.checkpoint, c.out_dir / "checkpoint.eri");
        trainer::write_history_jsonl(result.history, c.out_dir / "history.jsonl");
        const auto preds = trainer::predict(result.checkpoint, manifest, featstore::Split::Val);
        trainer::write_predictions_csv(preds, c.out_dir / "predictions_val.csv");
        const auto report = trainer::evaluate(result.checkpoint, manifest, featstore::Split::Val);
        write_json(objectives::to_json(report), c.out_dir / "metrics.json");
        return json{{"checkpoint", (c.out_dir / "checkpoint.eri").generic_string()},
                    {"best_epoch", result.history.best_epoch},
                    {"epochs_run", result.history.epochs.size()},
                    {"val", objectives::to_json(report)}};
    });
}

int cmd_eval(const RunConfig& cfg) {
    return run_command("eval", cfg, [](const RunConfig& c) {
        const auto split = split_of(c);
        require(!c.checkpoint.empty(), ErrorKind::Config, "paths.checkpoint (--checkpoint) is required");
        const auto manifest = open_manifest(c);
        const auto ckpt = encoders::read_checkpoint(c.checkpoint);
        const auto report = trainer::evaluate(ckpt, manifest, split);
        const auto preds = trainer::predict(ckpt, manifest, split);
        const std::string tag(featstore::split_name(split));
        trainer::write_predictions_csv(preds, c.out_dir / ("predictions_" + tag + ".csv"));
        write_json(objectives::to_json(report), c.out_dir / "metrics.json");
        log(c, Verbosity::Info, tag + " mean_pcc=" + std::to_string(report.mean_pcc));
        return json{{"split", tag}, {"metrics", objectives::to_json(report)}};
    });
}

int cmd_tune(const RunConfig& cfg) {
    return run_command("tune", cfg, [](const RunConfig& c) {
        auto space = c.search;
        space.base = c.hp;
        space.loss_kind = c.hp.loss_kind;
        space.validate();
        const auto manifest = open_manifest(c);
        const auto result = tuner::run_search(manifest, space, c.seed, c.parallelism);
        tuner::write_search_results(result, c.out_dir);
        const auto& best = result.records[result.best_trial_id];
        log(c, Verbosity::Info,
            "best trial " + std::to_string(best.trial_id) + " score=" + std::to_string(best.final_score));
        return json{{"best_trial_id", best.trial_id},
                    {"best_score", best.final_score},
                    {"trials", result.records.size()}};
    });
}

int cmd_ensemble(const RunConfig& cfg) {
    return run_command("ensemble", cfg, [](const RunConfig& c) {
        const auto split = split_of(c);
        ensembler::EnsembleSpec spec;
        spec.members = c.members;
        spec.weights = c.member_weights;
        spec.validate();
        for (const auto& m : spec.members)
            require(fs::exists(m), ErrorKind::Data, "ensemble member not found: " + m.string());
        const auto manifest = open_manifest(c);
        const auto preds = ensembler::ensemble_predict(spec, manifest, split);
        trainer::write_predictions_csv(preds, c.out_dir / "ensemble_predictions.csv");
        json results{{"split", std::string(featstore::split_name(split))}, {"members", spec.members.size()}};
        if (manifest.count_labeled(split) >= 2 && manifest.count_labeled(split) == manifest.count(split)) {
            const auto rows = ensembler::incremental_report(spec, manifest, split);
            ensembler::write_report_csv(rows, c.out_dir / "ensemble_report.csv");
            const auto report = objectives::mean_pcc(preds.values, trainer::split_labels(manifest, split));
            write_json(objectives::to_json(report), c.out_dir / "metrics.json");
            results["metrics"] = objectives::to_json(report);
            for (const auto& r : rows)
                log(c, Verbosity::Info, "k=" + std::to_string(r.k) + " mean_pcc=" + std::to_string(r.mean_pcc));
        }
        return results;
    });
}

int cmd_labelcorr(const RunConfig& cfg) {
    return run_command("labelcorr", cfg, [](const RunConfig& c) {
        const auto manifest = open_manifest(c);
        const auto labels = trainer::split_labels(manifest, featstore::Split::Train);
        const auto m = objectives::label_corr_matrix(labels);
        objectives::write_corr_csv(m, featstore::default_emotion_names(), c.out_dir / "label_corr.csv");
        return json{{"n_labels", labels.size()}, {"csv", (c.out_dir / "label_corr.csv").generic_string()}};
    });
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Emotional reaction intensity toolkit: synthesize, train, evaluate, tune and ensemble"};
    app.require_subcommand(1);

    std::string config_path, manifest, out, checkpoint, split, loss, fusion, model, verbosity;
    std::uint64_t seed = 0;
    std::uint32_t parallelism = 1, trials = 0, max_epochs = 0;
    std::vector<std::string> members;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config with flat dotted keys");
        sub->add_option("--manifest", manifest, "dataset manifest (JSON lines)");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "run seed");
        sub->add_option("--parallelism", parallelism, "concurrent trials (tune)")->check(CLI::PositiveNumber);
        sub->add_option("--loss", loss, "loss kind")->check(CLI::IsMember({"mse", "pcc"}));
        sub->add_option("--fusion", fusion, "fusion mode")
            ->check(CLI::IsMember({"visual_only", "audio_only", "concat", "cross_attention"}));
        sub->add_option("--trials", trials, "number of search trials");
        sub->add_option("--model", model, "model architecture")->check(CLI::IsMember({"te", "resnet1d"}));
        sub->add_option("--max-epochs", max_epochs, "training epochs");
        sub->add_option("--checkpoint", checkpoint, "checkpoint to evaluate");
        sub->add_option("--member", members, "ensemble member checkpoint (repeatable)");
        sub->add_option("--split", split, "train, val or test");
        sub->add_option("--verbosity", verbosity, "quiet, info or debug");
    };

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const std::vector<Command> commands = {
        {"synth", "generate a synthetic dataset", cmd_synth},
        {"train", "train one model", cmd_train},
        {"eval", "score a checkpoint on a split", cmd_eval},
        {"tune", "random search with successive halving", cmd_tune},
        {"ensemble", "average member checkpoints", cmd_ensemble},
        {"labelcorr", "emotion label correlation matrix", cmd_labelcorr},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        subs.push_back(app.add_subcommand(c.name, c.help));
        add_common(subs.back());
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    std::size_t which = 0;
    while (which < subs.size() && !subs[which]->parsed()) ++which;
    CLI::App* sub = subs[which];
    auto given = [sub](const char* flag) { return sub->count(flag) > 0; };

    RunConfig cfg;
    try {
        if (given("--config")) cfg = load_config_file(config_path, cfg);
        json flags = json::object();
        if (given("--manifest")) flags["paths.manifest"] = manifest;
        if (given("--out")) flags["paths.out"] = out;
        if (given("--checkpoint")) flags["paths.checkpoint"] = checkpoint;
        if (given("--seed")) flags["seed"] = seed;
        if (given("--parallelism")) flags["parallelism"] = parallelism;
        if (given("--loss")) flags["hp.loss_kind"] = loss;
        if (given("--fusion")) flags["hp.fusion_mode"] = fusion;
        if (given("--model")) flags["hp.model"] = model;
        if (given("--max-epochs")) flags["hp.max_epochs"] = max_epochs;
        if (given("--trials")) flags["search.trials"] = trials;
        if (given("--split")) flags["eval.split"] = split;
        if (given("--verbosity")) flags["log.verbosity"] = verbosity;
        if (given("--member")) flags["ensemble.members"] = members;
        apply_flat_config(cfg, flags);
    } catch (const Error& e) {
        std::cerr << "[eri] config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return commands[which].run(cfg);
}

} // namespace eri::cli
