// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "post/models/config.hpp"
#include "post/nn/tensor.hpp"

namespace post::models {

struct EpochRecord {
    int epoch = 0;  ///< zero-based
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool early_stopped = false;
};

/// Stops once `patience` consecutive epochs fail to improve (strictly) on the
/// best validation loss. patience <= 0 disables stopping.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}
    /// Returns true when this epoch improved the best loss.
    bool update(double val_loss);
    bool should_stop() const noexcept { return patience_ > 0 && stale_ >= patience_; }
    double best() const noexcept { return best_; }

private:
    int patience_;
    int stale_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// Learning rate as a function of the zero-based epoch.
using LrSchedule = std::function<double(int epoch)>;

/// Base rate until the first drop epoch, then the rate of the latest drop reached.
LrSchedule step_schedule(double base, std::vector<LrDrop> drops);
/// Linear warmup from 10% over `warmup` epochs, then linear decay to 1% at the last epoch.
LrSchedule warmup_linear_schedule(double base, int warmup, int epochs);

/// What the loop needs from a model; stubs implement it in tests.
class TrainingTask {
public:
    virtual ~TrainingTask() = default;
    virtual double train_epoch(int epoch, double lr) = 0;
    virtual double validate() = 0;
    virtual std::vector<nn::Tensor> snapshot() const = 0;
    virtual void restore(const std::vector<nn::Tensor>& weights) = 0;
};

struct LoopOptions {
    int epochs = 1;
    int patience = 15;
    LrSchedule lr;
    std::ostream* jsonl = nullptr;  ///< one {epoch, lr, train_loss, val_loss} object per line
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Runs epochs until the cap or early stop and restores the best-validation
/// weights. Throws NonFiniteLoss on NaN/inf losses (best weights are restored first).
TrainHistory run_training(TrainingTask& task, const LoopOptions& opts);

}  // namespace post::models
