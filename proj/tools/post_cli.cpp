// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// post: synthetic data, fold planning, training, evaluation, scoring and the HTTP service.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "post/dataset.hpp"
#include "post/error.hpp"
#include "post/models/config.hpp"
#include "post/models/trainer.hpp"
#include "post/pipeline/evaluate.hpp"
#include "post/pipeline/infer.hpp"
#include "post/pipeline/run_store.hpp"
#include "post/pipeline/service.hpp"
#include "post/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace post;

namespace {

void log_line(const std::string& s) { std::cerr << s << std::endl; }

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

bool is_detector_config(const json& j) { return j.value("model_kind", std::string()) == "detector"; }

models::TrainData fold_data(const std::vector<Sample>& samples, const FoldPlan& plan, int fold) {
    std::map<std::string, const Sample*> by_id;
    for (const auto& s : samples) by_id[s.record.image_id] = &s;
    models::TrainData d;
    for (const auto& id : plan.train_ids(fold)) d.train.push_back(by_id.at(id));
    for (const auto& id : plan.val_ids(fold)) d.val.push_back(by_id.at(id));
    return d;
}

std::shared_ptr<const pipeline::BoxPredictor> load_detector(const std::string& path) {
    auto m = models::load_model(path);
    return std::make_shared<pipeline::NetBoxPredictor>(std::shared_ptr<const models::Detector>(models::make_detector(m)));
}

std::shared_ptr<const pipeline::LandmarkPredictor> load_landmarks(const std::string& path) {
    auto m = models::load_model(path);
    return std::make_shared<pipeline::NetLandmarkPredictor>(
        std::shared_ptr<const models::LandmarkNet>(models::make_landmark_net(m)));
}

pipeline::InterpretationTable load_table(const std::string& path) {
    if (path.empty()) return {};
    return pipeline::interpretation_table_from_json(models::load_config_json(path));
}

pipeline::ScoringService* g_service = nullptr;
void on_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"POST toolkit: urethral plate scoring from glans images"};
    app.require_subcommand(1);

    // synth
    int synth_count = 300;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated corpus");
    synth->add_option("--count", synth_count, "Number of images")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "Corpus seed");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // plan
    std::string plan_manifest, plan_out;
    int plan_k = 5;
    double plan_val = 0.2;
    std::uint64_t plan_seed = 0;
    auto* plan = app.add_subcommand("plan", "Write a k-fold plan for a manifest");
    plan->add_option("--manifest", plan_manifest)->required()->check(CLI::ExistingFile);
    plan->add_option("--k", plan_k)->check(CLI::Range(2, 100));
    plan->add_option("--val-frac", plan_val)->check(CLI::Range(0.0, 0.9));
    plan->add_option("--seed", plan_seed);
    plan->add_option("--out", plan_out, "Plan JSON")->required();

    // train
    std::string train_kind, train_manifest, train_plan, train_config, train_out;
    int train_fold = 0;
    auto* train = app.add_subcommand("train", "Train one model on one fold's training split");
    train->add_option("--kind", train_kind)->required()->check(CLI::IsMember({"detector", "landmarks"}));
    train->add_option("--manifest", train_manifest)->required()->check(CLI::ExistingFile);
    train->add_option("--fold-plan", train_plan)->required()->check(CLI::ExistingFile);
    train->add_option("--config", train_config)->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Weights file (.postw); sidecar and log are written next to it")->required();
    train->add_option("--fold", train_fold);

    // eval
    std::string eval_manifest, eval_plan, eval_out, eval_runs, eval_models;
    std::vector<std::string> eval_configs;
    int eval_fold = -1;
    auto* eval = app.add_subcommand("eval", "Cross-validated evaluation with per-fold training");
    eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
    eval->add_option("--fold-plan", eval_plan)->required()->check(CLI::ExistingFile);
    eval->add_option("--configs", eval_configs,
                     "Config files; one detector config (model_kind=detector) plus landmark configs, one ablation row each")
        ->delimiter(',')
        ->check(CLI::ExistingFile);
    eval->add_option("--out", eval_out, "Report JSON (default stdout)");
    eval->add_option("--runs", eval_runs, "Run store directory");
    eval->add_option("--model-dir", eval_models, "Keep fold models and training logs here");
    eval->add_option("--fold", eval_fold, "Only this fold");

    // score
    std::string score_image, score_det, score_lm, score_table;
    bool score_json = false;
    auto* score = app.add_subcommand("score", "Score one image");
    score->add_option("image", score_image)->required()->check(CLI::ExistingFile);
    score->add_option("--detector", score_det)->required()->check(CLI::ExistingFile);
    score->add_option("--landmarks", score_lm)->required()->check(CLI::ExistingFile);
    score->add_option("--interpretation", score_table)->check(CLI::ExistingFile);
    score->add_flag("--json", score_json, "Print the full report as JSON");

    // serve
    std::string serve_host = "127.0.0.1", serve_token, serve_det, serve_lm, serve_table, serve_runs, serve_origin;
    int serve_port = 8080, serve_threads = 4;
    double serve_max_mb = 10.0;
    auto* serve = app.add_subcommand("serve", "Run the scoring HTTP API");
    serve->add_option("--port", serve_port)->check(CLI::Range(1, 65535));
    serve->add_option("--host", serve_host);
    serve->add_option("--token-file", serve_token)->required()->check(CLI::ExistingFile);
    serve->add_option("--detector", serve_det)->required()->check(CLI::ExistingFile);
    serve->add_option("--landmarks", serve_lm)->required()->check(CLI::ExistingFile);
    serve->add_option("--interpretation", serve_table)->check(CLI::ExistingFile);
    serve->add_option("--threads", serve_threads)->check(CLI::Range(1, 256));
    serve->add_option("--max-body-mb", serve_max_mb)->check(CLI::PositiveNumber);
    serve->add_option("--runs", serve_runs, "Persist score reports here");
    serve->add_option("--allow-origin", serve_origin, "CORS origin of the review UI");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto corpus = synth_corpus(synth_count, synth_seed);
            const auto manifest = write_corpus(corpus, synth_out);
            std::cout << manifest.string() << "\n";
        } else if (*plan) {
            const auto p = plan_folds(load_manifest(plan_manifest), plan_k, plan_val, plan_seed);
            save_fold_plan(p, plan_out);
        } else if (*train) {
            const auto samples = pipeline::load_samples(train_manifest);
            const auto p = load_fold_plan(train_plan);
            if (train_fold < 0 || train_fold >= p.k) throw Error(ErrorCode::InvalidArgument, "fold out of range");
            const auto data = fold_data(samples, p, train_fold);
            const json cfg = train_config.empty() ? json::object() : models::load_config_json(train_config);
            fs::path weights(train_out);
            if (weights.has_parent_path()) fs::create_directories(weights.parent_path());
            std::ofstream log(weights.string() + ".log.jsonl");
            models::TrainOptions opts;
            opts.jsonl = &log;
            opts.on_epoch = [](const models::EpochRecord& r) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "epoch %d lr %.2e train %.5f val %.5f", r.epoch, r.lr, r.train_loss,
                              r.val_loss);
                log_line(buf);
            };
            const auto m = train_kind == "detector"
                               ? models::train_detector(models::detector_config_from_json(cfg), data, opts)
                               : models::train_landmarks(models::landmark_config_from_json(cfg), data, opts);
            models::save_model(m, weights);
            std::cout << m.sidecar().dump(2) << "\n";
        } else if (*eval) {
            models::DetectorConfig det;
            std::vector<models::LandmarkNetConfig> variants;
            bool have_detector = false;
            for (const auto& path : eval_configs) {
                const json j = models::load_config_json(path);
                if (is_detector_config(j)) {
                    if (have_detector) throw Error(ErrorCode::InvalidArgument, "more than one detector config");
                    det = models::detector_config_from_json(j);
                    have_detector = true;
                } else {
                    variants.push_back(models::landmark_config_from_json(j));
                }
            }
            if (variants.empty()) variants.emplace_back();
            const auto samples = pipeline::load_samples(eval_manifest);
            const auto p = load_fold_plan(eval_plan);
            std::optional<fs::path> model_dir;
            if (!eval_models.empty()) model_dir = eval_models;
            pipeline::TrainingFactory factory(det, variants, model_dir, log_line);
            pipeline::EvalOptions opts;
            opts.progress = log_line;
            if (eval_fold >= 0) opts.only_fold = eval_fold;
            const auto result = pipeline::evaluate(samples, p, factory, opts);
            json out = result.table();
            out["detector_config"] = models::to_json(det);
            out["data_hash"] = data_hash([&] {
                std::vector<ImageRecord> r;
                for (const auto& s : samples) r.push_back(s.record);
                return r;
            }());
            if (!eval_runs.empty()) out["run_id"] = pipeline::RunStore(eval_runs).append("eval", out);
            write_json(out, eval_out);
        } else if (*score) {
            const auto det = load_detector(score_det);
            const auto lm = load_landmarks(score_lm);
            const Image img = load_image(score_image);
            const auto r = pipeline::infer(img, fs::path(score_image).filename().string(), *det, *lm, load_table(score_table));
            if (score_json) {
                std::cout << pipeline::to_json(r).dump(2) << "\n";
            } else {
                std::printf("%s POST %.4f (left %.4f, right %.4f)\n", r.image_id.c_str(), r.post.score,
                            r.post.ratio_left, r.post.ratio_right);
                if (r.interpretation) std::printf("%s\n", r.interpretation->c_str());
            }
        } else if (*serve) {
            pipeline::ServiceOptions opts;
            opts.token = pipeline::read_token_file(serve_token);
            opts.threads = serve_threads;
            opts.max_body_bytes = static_cast<std::size_t>(serve_max_mb * 1024 * 1024);
            opts.interpretation = load_table(serve_table);
            opts.allow_origin = serve_origin;
            if (!serve_runs.empty()) opts.runs = std::make_shared<pipeline::RunStore>(serve_runs);
            pipeline::ScoringService svc(load_detector(serve_det), load_landmarks(serve_lm), std::move(opts));
            g_service = &svc;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            log_line("listening on " + serve_host + ":" + std::to_string(serve_port));
            if (!svc.listen(serve_host, serve_port)) throw Error(ErrorCode::IoError, "cannot bind port " + std::to_string(serve_port));
            g_service = nullptr;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
