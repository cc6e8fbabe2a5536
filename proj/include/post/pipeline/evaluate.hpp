// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "post/dataset.hpp"
#include "post/metrics.hpp"
#include "post/models/config.hpp"
#include "post/models/trainer.hpp"
#include "post/pipeline/infer.hpp"

namespace post::pipeline {

/// Produces per-fold predictors. The training implementation fits real
/// networks; tests substitute stubs.
class ModelFactory {
public:
    virtual ~ModelFactory() = default;
    virtual std::unique_ptr<BoxPredictor> detector(int fold, const models::TrainData& data) = 0;
    /// Number of landmark configurations compared (ablation rows).
    virtual std::size_t landmark_variants() const = 0;
    virtual nlohmann::json variant_config(std::size_t variant) const = 0;
    virtual std::unique_ptr<LandmarkPredictor> landmarks(int fold, std::size_t variant,
                                                         const models::TrainData& data) = 0;
};

class TrainingFactory final : public ModelFactory {
public:
    /// With `model_dir`, fold models and JSONL logs are written to
    /// <model_dir>/fold<k>/{detector,landmarks<v>}.postw (+ .json sidecar, .log.jsonl).
    TrainingFactory(models::DetectorConfig detector, std::vector<models::LandmarkNetConfig> variants,
                    std::optional<std::filesystem::path> model_dir = std::nullopt,
                    std::function<void(const std::string&)> progress = {});

    std::unique_ptr<BoxPredictor> detector(int fold, const models::TrainData& data) override;
    std::size_t landmark_variants() const override { return variants_.size(); }
    nlohmann::json variant_config(std::size_t v) const override;
    std::unique_ptr<LandmarkPredictor> landmarks(int fold, std::size_t variant, const models::TrainData& data) override;

private:
    models::DetectorConfig detector_;
    std::vector<models::LandmarkNetConfig> variants_;
    std::optional<std::filesystem::path> dir_;
    std::function<void(const std::string&)> progress_;
};

struct EvalOptions {
    double iou_threshold = 0.5;
    double sensitivity_conf = 0.25;
    double fr_threshold = 0.1;
    std::optional<int> only_fold;  ///< evaluate a single fold
    std::function<void(const std::string&)> progress;
};

struct EvaluationResult {
    /// One report per landmark variant; detection metrics are shared.
    std::vector<EvalReport> reports;
    /// Ablation table: config columns plus NME/MSE/FR/mAP per variant.
    nlohmann::json table() const;
};

/// Loads every accepted record of a manifest with its image.
std::vector<Sample> load_samples(const std::filesystem::path& manifest);

/// Per fold: fit the detector, score AP/sensitivity on the test fold, then for
/// each landmark variant fit the net and measure NME in the original frame on
/// crops produced by that fold's detector. A fold that throws is marked failed.
EvaluationResult evaluate(const std::vector<Sample>& samples, const FoldPlan& plan, ModelFactory& factory,
                          const EvalOptions& opts = {});

/// Throws InvalidArgument unless train/val/test of `fold` are pairwise disjoint
/// and test matches the plan's assignments.
void check_fold_isolation(const FoldPlan& plan, int fold, const std::vector<std::string>& train,
                          const std::vector<std::string>& val, const std::vector<std::string>& test);

}  // namespace post::pipeline
