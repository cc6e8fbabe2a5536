// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "post/error.hpp"

namespace post::models {

nlohmann::json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch}, {"lr", r.lr}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}};
}

EpochRecord epoch_record_from_json(const nlohmann::json& j) {
    try {
        return {j.at("epoch").get<int>(), j.at("lr").get<double>(), j.at("train_loss").get<double>(),
                j.at("val_loss").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("history entry: ") + e.what());
    }
}

bool EarlyStopping::update(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        stale_ = 0;
        return true;
    }
    ++stale_;
    return false;
}

LrSchedule step_schedule(double base, std::vector<LrDrop> drops) {
    std::sort(drops.begin(), drops.end(), [](const LrDrop& a, const LrDrop& b) { return a.epoch < b.epoch; });
    return [base, drops](int epoch) {
        double lr = base;
        for (const auto& d : drops) {
            if (epoch >= d.epoch) lr = d.learning_rate;
        }
        return lr;
    };
}

LrSchedule warmup_linear_schedule(double base, int warmup, int epochs) {
    return [=](int epoch) {
        if (epoch < warmup) return base * (0.1 + 0.9 * epoch / warmup);
        const int span = std::max(1, epochs - 1 - warmup);
        const double frac = std::min(1.0, static_cast<double>(epoch - warmup) / span);
        return base * (1.0 - 0.99 * frac);
    };
}

TrainHistory run_training(TrainingTask& task, const LoopOptions& opts) {
    if (!opts.lr) throw Error(ErrorCode::InvalidArgument, "training loop needs a learning-rate schedule");
    TrainHistory h;
    EarlyStopping stop(opts.patience);
    std::vector<nn::Tensor> best = task.snapshot();

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        EpochRecord r;
        r.epoch = epoch;
        r.lr = opts.lr(epoch);
        r.train_loss = task.train_epoch(epoch, r.lr);
        r.val_loss = std::isfinite(r.train_loss) ? task.validate() : r.train_loss;
        h.epochs.push_back(r);
        if (opts.jsonl) *opts.jsonl << to_json(r).dump() << '\n' << std::flush;
        if (opts.on_epoch) opts.on_epoch(r);

        if (!std::isfinite(r.train_loss) || !std::isfinite(r.val_loss)) {
            task.restore(best);
            std::ostringstream msg;
            msg << "epoch " << epoch << " (lr " << r.lr << "): train_loss " << r.train_loss << ", val_loss "
                << r.val_loss << "; best epoch " << h.best_epoch << " val_loss " << h.best_val_loss;
            throw Error(ErrorCode::NonFiniteLoss, msg.str());
        }
        if (stop.update(r.val_loss)) {
            h.best_epoch = epoch;
            h.best_val_loss = r.val_loss;
            best = task.snapshot();
        }
        if (stop.should_stop()) {
            h.early_stopped = true;
            break;
        }
    }
    task.restore(best);
    return h;
}

}  // namespace post::models
