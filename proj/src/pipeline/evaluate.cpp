// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/pipeline/evaluate.hpp"

#include <fstream>
#include <map>
#include <set>

#include "post/error.hpp"

namespace post::pipeline {

using nlohmann::json;

TrainingFactory::TrainingFactory(models::DetectorConfig detector, std::vector<models::LandmarkNetConfig> variants,
                                 std::optional<std::filesystem::path> model_dir,
                                 std::function<void(const std::string&)> progress)
    : detector_(std::move(detector)), variants_(std::move(variants)), dir_(std::move(model_dir)),
      progress_(std::move(progress)) {
    detector_.validate();
    if (variants_.empty()) throw Error(ErrorCode::InvalidArgument, "at least one landmark config is required");
    for (const auto& v : variants_) v.validate();
}

json TrainingFactory::variant_config(std::size_t v) const { return models::to_json(variants_.at(v)); }

namespace {

template <typename Train, typename Config>
models::TrainedModel fit(Train&& train, const Config& cfg, const models::TrainData& data,
                         const std::optional<std::filesystem::path>& dir, int fold, const std::string& stem,
                         const std::function<void(const std::string&)>& progress) {
    std::ofstream log;
    models::TrainOptions opts;
    std::filesystem::path weights;
    if (dir) {
        const auto fold_dir = *dir / ("fold" + std::to_string(fold));
        std::filesystem::create_directories(fold_dir);
        weights = fold_dir / (stem + ".postw");
        log.open(fold_dir / (stem + ".log.jsonl"));
        opts.jsonl = &log;
    }
    if (progress) {
        opts.on_epoch = [&](const models::EpochRecord& r) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "fold %d %s epoch %d lr %.2e train %.5f val %.5f", fold, stem.c_str(),
                          r.epoch, r.lr, r.train_loss, r.val_loss);
            progress(buf);
        };
    }
    models::TrainedModel m = train(cfg, data, opts);
    if (dir) models::save_model(m, weights);
    return m;
}

}  // namespace

std::unique_ptr<BoxPredictor> TrainingFactory::detector(int fold, const models::TrainData& data) {
    const auto m = fit(models::train_detector, detector_, data, dir_, fold, "detector", progress_);
    return std::make_unique<NetBoxPredictor>(std::shared_ptr<const models::Detector>(models::make_detector(m)));
}

std::unique_ptr<LandmarkPredictor> TrainingFactory::landmarks(int fold, std::size_t variant,
                                                              const models::TrainData& data) {
    const auto m = fit(models::train_landmarks, variants_.at(variant), data, dir_, fold,
                       "landmarks" + std::to_string(variant), progress_);
    return std::make_unique<NetLandmarkPredictor>(
        std::shared_ptr<const models::LandmarkNet>(models::make_landmark_net(m)));
}

std::vector<Sample> load_samples(const std::filesystem::path& manifest) {
    std::vector<Sample> out;
    for (auto& r : load_manifest(manifest)) {
        if (!r.accepted()) continue;
        Sample s;
        s.image = load_image(resolve_image_path(manifest, r));
        if (s.image.width != r.width || s.image.height != r.height) {
            throw Error(ErrorCode::SchemaError, "image size of '" + r.image_id + "' differs from the manifest");
        }
        s.record = std::move(r);
        out.push_back(std::move(s));
    }
    return out;
}

void check_fold_isolation(const FoldPlan& plan, int fold, const std::vector<std::string>& train,
                          const std::vector<std::string>& val, const std::vector<std::string>& test) {
    const std::set<std::string> tr(train.begin(), train.end()), va(val.begin(), val.end()), te(test.begin(), test.end());
    auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        for (const auto& x : a) {
            if (b.count(x)) return false;
        }
        return true;
    };
    if (!disjoint(tr, va) || !disjoint(tr, te) || !disjoint(va, te)) {
        throw Error(ErrorCode::InvalidArgument, "fold " + std::to_string(fold) + " mixes records across splits");
    }
    for (const auto& id : te) {
        const auto it = plan.assignments.find(id);
        if (it == plan.assignments.end() || it->second != fold) {
            throw Error(ErrorCode::InvalidArgument, "record '" + id + "' is not in test fold " + std::to_string(fold));
        }
    }
    for (const auto& id : tr) {
        const auto it = plan.assignments.find(id);
        if (it == plan.assignments.end() || it->second == fold) {
            throw Error(ErrorCode::InvalidArgument, "record '" + id + "' leaks into training of fold " + std::to_string(fold));
        }
    }
}

namespace {

struct FoldDetection {
    double map = 0.0;
    double sensitivity = 0.0;
};

// Box used for landmark evaluation: the top detection, else the best
// low-confidence candidate, else the whole image.
BoundingBox eval_box(const BoxPredictor& det, const Sample& s) {
    auto boxes = det.detect(s.image, s.record.image_id, det.conf_threshold());
    if (boxes.empty()) boxes = det.detect(s.image, s.record.image_id, det.eval_conf_threshold());
    if (!boxes.empty()) return boxes.front();
    return {0, 0, double(s.image.width), double(s.image.height), 0.0};
}

NmeResult landmark_metrics(const std::vector<const Sample*>& test, const std::vector<BoundingBox>& boxes,
                           const LandmarkPredictor& lp, double fr_threshold) {
    std::vector<double> nmes, mses;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Sample& s = *test[i];
        const LandmarkLocation loc = locate_landmarks_in_box(s.image, s.record.image_id, boxes[i], lp);
        nmes.push_back(nme(loc.landmarks, s.record.landmarks));
        if (loc.heatmaps) {
            try {
                const HeatmapStack target = encode(apply_transform(loc.crop_transform, s.record.landmarks), lp.codec());
                mses.push_back(mse_loss(*loc.heatmaps, target));
            } catch (const Error& e) {
                // ground truth outside the detector crop has no heatmap target
                if (e.code() != ErrorCode::OutOfFrame) throw;
            }
        }
    }
    return summarize_nme(std::move(nmes), std::move(mses), fr_threshold);
}

}  // namespace

EvaluationResult evaluate(const std::vector<Sample>& samples, const FoldPlan& plan, ModelFactory& factory,
                          const EvalOptions& opts) {
    std::map<std::string, const Sample*> by_id;
    for (const auto& s : samples) by_id[s.record.image_id] = &s;
    for (const auto& [id, f] : plan.assignments) {
        if (!by_id.count(id)) throw Error(ErrorCode::InvalidArgument, "plan references unknown record '" + id + "'");
    }
    const std::size_t variants = factory.landmark_variants();
    std::vector<std::vector<FoldMetrics>> per_variant(variants);

    auto resolve = [&](const std::vector<std::string>& ids) {
        std::vector<const Sample*> out;
        for (const auto& id : ids) out.push_back(by_id.at(id));
        return out;
    };
    auto say = [&](const std::string& msg) {
        if (opts.progress) opts.progress(msg);
    };

    for (int fold = 0; fold < plan.k; ++fold) {
        if (opts.only_fold && *opts.only_fold != fold) continue;
        auto mark_failed = [&](const std::string& why, std::size_t from_variant) {
            say("fold " + std::to_string(fold) + " failed: " + why);
            for (std::size_t v = from_variant; v < variants; ++v) {
                FoldMetrics fm;
                fm.fold = fold;
                fm.failed = true;
                fm.error = why;
                per_variant[v].push_back(fm);
            }
        };
        try {
            const auto train_ids = plan.train_ids(fold), val_ids = plan.val_ids(fold), test_ids = plan.test_ids(fold);
            check_fold_isolation(plan, fold, train_ids, val_ids, test_ids);
            const models::TrainData data{resolve(train_ids), resolve(val_ids)};
            const auto test = resolve(test_ids);

            say("fold " + std::to_string(fold) + ": training detector on " + std::to_string(data.train.size()) +
                " images");
            const auto det = factory.detector(fold, data);
            std::vector<DetectionRecord> records;
            std::vector<BoundingBox> boxes;
            for (const Sample* s : test) {
                records.push_back({s->record.image_id,
                                   det->detect(s->image, s->record.image_id, det->eval_conf_threshold()),
                                   {s->record.gt_box}});
                boxes.push_back(eval_box(*det, *s));
            }
            FoldDetection fd;
            fd.map = mean_average_precision({average_precision(records, opts.iou_threshold)});
            fd.sensitivity = sensitivity(records, opts.iou_threshold, opts.sensitivity_conf);
            say("fold " + std::to_string(fold) + ": mAP " + std::to_string(fd.map) + ", sensitivity " +
                std::to_string(fd.sensitivity));

            for (std::size_t v = 0; v < variants; ++v) {
                FoldMetrics fm;
                fm.fold = fold;
                fm.map = fd.map;
                fm.sensitivity = fd.sensitivity;
                try {
                    const auto lp = factory.landmarks(fold, v, data);
                    fm.landmarks = landmark_metrics(test, boxes, *lp, opts.fr_threshold);
                    say("fold " + std::to_string(fold) + " variant " + std::to_string(v) + ": NME " +
                        std::to_string(fm.landmarks.mean) + ", FR " + std::to_string(fm.landmarks.failure_rate));
                } catch (const std::exception& e) {
                    fm.failed = true;
                    fm.error = e.what();
                    say("fold " + std::to_string(fold) + " variant " + std::to_string(v) + " failed: " + e.what());
                }
                per_variant[v].push_back(std::move(fm));
            }
        } catch (const std::exception& e) {
            // variants already recorded for this fold keep their result
            std::size_t from = 0;
            while (from < variants && !per_variant[from].empty() && per_variant[from].back().fold == fold) ++from;
            mark_failed(e.what(), from);
        }
    }

    EvaluationResult result;
    for (std::size_t v = 0; v < variants; ++v) {
        EvalReport rep;
        try {
            rep = aggregate_folds(per_variant[v]);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyInput) throw;
            rep.folds = per_variant[v];
            rep.failed_folds = static_cast<int>(per_variant[v].size());
        }
        rep.config = factory.variant_config(v);
        result.reports.push_back(std::move(rep));
    }
    return result;
}

json EvaluationResult::table() const {
    json rows = json::array();
    for (const auto& r : reports) {
        json row = {{"stages", r.config.value("stages", json())},
                    {"stream_widths", r.config.value("stream_widths", json())},
                    {"fusion", r.config.value("fusion", json())},
                    {"heatmap_size", r.config.value("heatmap_size", json())},
                    {"nme_mean", r.nme_mean},
                    {"nme_std", r.nme_std},
                    {"fr_at_0p1", r.fr_at_0p1},
                    {"mse_mean", r.mse_mean},
                    {"mse_std", r.mse_std},
                    {"map", r.map},
                    {"sensitivity", r.sensitivity},
                    {"failed_folds", r.failed_folds}};
        rows.push_back(row);
    }
    return {{"rows", rows},
            {"reports", [&] {
                 json a = json::array();
                 for (const auto& r : reports) a.push_back(to_json(r));
                 return a;
             }()},
            {"reference",
             {{"note", "published values on a private clinical dataset; not reproducible here"},
              {"map", 0.995},
              {"sensitivity", 0.991},
              {"nme_mean", 0.07152},
              {"nme_std", 0.004},
              {"fr_at_0p1", 0.202},
              {"mse", 0.001}}}};
}

}  // namespace post::pipeline
