// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>

#include "post/error.hpp"
#include "post/hash.hpp"
#include "post/nn/optim.hpp"

namespace post::models {

using nlohmann::json;

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string TrainedModel::weights_hash() const {
    Fnv1a h;
    h.update(weights.data(), weights.size());
    return h.hex();
}

json TrainedModel::sidecar() const {
    json hist = json::array();
    for (const auto& e : history) hist.push_back(to_json(e));
    return {{"model_kind", model_kind}, {"config", config},       {"seed", seed},
            {"data_hash", data_hash},   {"val_loss", val_loss},   {"created_at", created_at},
            {"history", hist},          {"weights_hash", weights_hash()}};
}

std::filesystem::path sidecar_path(const std::filesystem::path& weights) {
    return std::filesystem::path(weights.string() + ".json");
}

void save_model(const TrainedModel& m, const std::filesystem::path& weights) {
    if (weights.has_parent_path()) std::filesystem::create_directories(weights.parent_path());
    {
        std::ofstream f(weights, std::ios::binary);
        f.write(reinterpret_cast<const char*>(m.weights.data()), static_cast<std::streamsize>(m.weights.size()));
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + weights.string());
    }
    std::ofstream s(sidecar_path(weights));
    s << m.sidecar().dump(2) << '\n';
    if (!s) throw Error(ErrorCode::IoError, "cannot write " + sidecar_path(weights).string());
}

TrainedModel load_model(const std::filesystem::path& weights) {
    TrainedModel m;
    std::ifstream f(weights, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + weights.string());
    m.weights.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

    std::ifstream s(sidecar_path(weights));
    if (!s) throw Error(ErrorCode::IoError, "missing sidecar " + sidecar_path(weights).string());
    try {
        const json j = json::parse(s);
        m.model_kind = j.at("model_kind").get<std::string>();
        m.config = j.at("config");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.data_hash = j.at("data_hash").get<std::string>();
        m.val_loss = j.at("val_loss").get<double>();
        m.created_at = j.at("created_at").get<std::string>();
        if (j.contains("history")) {
            for (const auto& e : j.at("history")) m.history.push_back(epoch_record_from_json(e));
        }
        if (j.contains("weights_hash") && j.at("weights_hash").get<std::string>() != m.weights_hash()) {
            throw Error(ErrorCode::IoError, "weights do not match the sidecar hash: " + weights.string());
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, sidecar_path(weights).string() + ": " + e.what());
    }
    return m;
}

std::unique_ptr<Detector> make_detector(const TrainedModel& m) {
    if (m.model_kind != "detector") throw Error(ErrorCode::ConfigMismatch, "model is a " + m.model_kind);
    auto d = std::make_unique<Detector>(detector_config_from_json(m.config));
    d->params().deserialize(m.weights);
    return d;
}

std::unique_ptr<LandmarkNet> make_landmark_net(const TrainedModel& m) {
    if (m.model_kind != "landmarks") throw Error(ErrorCode::ConfigMismatch, "model is a " + m.model_kind);
    auto n = std::make_unique<LandmarkNet>(landmark_config_from_json(m.config));
    n->params().deserialize(m.weights);
    return n;
}

bool make_landmark_example(const Sample& s, const LandmarkNetConfig& cfg, const AugmentSpec* spec,
                           LandmarkExample& out) {
    const int in = cfg.input_size;
    const FrameTransform crop = build_crop_transform(s.record.gt_box, cfg.crop_margin, {in, in}, s.image.size());
    Affine2 m = Affine2::from(crop);
    if (spec) m = augmentation_affine(*spec, {in, in}) * m;
    LandmarkSet lm = transform_landmarks(s.record.landmarks, m);
    lm.frame = Frame::crop;
    for (const auto& p : lm.points) {
        if (!(p.x >= 0 && p.x < in && p.y >= 0 && p.y < in)) return false;
    }
    out.planar.resize(std::size_t(3) * in * in);
    warp_to_planar(s.image, m, in, in, out.planar);
    out.target = encode(lm, cfg.codec());
    out.crop_landmarks = lm;
    return true;
}

bool make_detector_example(const Sample& s, const DetectorConfig& cfg, const AugmentSpec* spec,
                           DetectorExample& out) {
    ImageRecord r = s.record;
    Affine2 aug;
    if (spec) {
        try {
            r = augment_record(s.record, *spec);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::LandmarkOutOfFrame) return false;
            throw;
        }
        aug = augmentation_affine(*spec, s.image.size());
    }
    const FrameTransform lb = letterbox_transform(s.image.size(), cfg.input_size);
    const int in = cfg.input_size;
    out.planar.resize(std::size_t(3) * in * in);
    warp_to_planar(s.image, Affine2::from(lb) * aug, in, in, out.planar);
    const Point2 lo = apply_transform(lb, Point2{r.gt_box.x_min, r.gt_box.y_min});
    const Point2 hi = apply_transform(lb, Point2{r.gt_box.x_max, r.gt_box.y_max});
    out.target = {lo.x, lo.y, hi.x, hi.y, 1.0};
    return true;
}

namespace {

constexpr int kMaxAugmentAttempts = 10;

void require_data(const TrainData& d) {
    if (d.train.empty()) throw Error(ErrorCode::DataEmpty, "training split is empty");
    if (d.val.empty()) throw Error(ErrorCode::DataEmpty, "validation split is empty");
}

std::string hash_of(const TrainData& d) {
    std::vector<ImageRecord> recs;
    for (const Sample* s : d.train) recs.push_back(s->record);
    for (const Sample* s : d.val) recs.push_back(s->record);
    return data_hash(recs);
}

// Draws augmentations until `make` accepts one; falls back to no augmentation.
template <typename Example, typename Make>
void draw_example(const AugmentRanges& ranges, Rng& rng, Example& ex, Make&& make) {
    for (int attempt = 0; attempt < kMaxAugmentAttempts; ++attempt) {
        const AugmentSpec spec = draw_augment(ranges, rng);
        if (make(&spec, ex)) return;
    }
    if (!make(nullptr, ex)) throw Error(ErrorCode::LandmarkOutOfFrame, "sample does not fit even unaugmented");
}

nn::Tensor stack_planar(const std::vector<const std::vector<float>*>& xs, int size) {
    nn::Tensor t({static_cast<int>(xs.size()), 3, size, size});
    for (std::size_t i = 0; i < xs.size(); ++i) std::copy(xs[i]->begin(), xs[i]->end(), t.sample(static_cast<int>(i)));
    return t;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::derive(seed, 0x0de7, static_cast<std::uint64_t>(epoch));
    rng.shuffle(order.begin(), order.end());
    return order;
}

class LandmarkTask final : public TrainingTask {
public:
    LandmarkTask(LandmarkNet& net, const TrainData& data)
        : net_(net), cfg_(net.config()), data_(data),
          opt_(net.params(), static_cast<float>(cfg_.optimizer.beta1), static_cast<float>(cfg_.optimizer.beta2)) {
        for (const Sample* s : data_.val) {
            LandmarkExample ex;
            if (!make_landmark_example(*s, cfg_, nullptr, ex)) {
                throw Error(ErrorCode::OutOfFrame, "validation landmarks of '" + s->record.image_id + "' leave the crop");
            }
            val_.push_back(std::move(ex));
        }
    }

    double train_epoch(int epoch, double lr) override {
        const auto order = epoch_order(data_.train.size(), cfg_.seed, epoch);
        double total = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg_.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg_.batch_size);
            std::vector<LandmarkExample> batch(b1 - b0);
            for (std::size_t i = b0; i < b1; ++i) {
                const Sample& s = *data_.train[order[i]];
                Rng rng = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(epoch) + 1, order[i]);
                draw_example(cfg_.augment, rng, batch[i - b0], [&](const AugmentSpec* spec, LandmarkExample& ex) {
                    return make_landmark_example(s, cfg_, spec, ex);
                });
            }
            total += step(batch, lr) * static_cast<double>(batch.size());
        }
        return total / static_cast<double>(order.size());
    }

    double validate() override {
        double total = 0.0;
        for (std::size_t b0 = 0; b0 < val_.size(); b0 += cfg_.batch_size) {
            const std::size_t b1 = std::min(val_.size(), b0 + cfg_.batch_size);
            nn::Graph g(false);
            auto [x, t] = tensors(val_, b0, b1);
            total += nn::mse(g, net_.forward(g, g.input(std::move(x))), t)->value[0] * static_cast<double>(b1 - b0);
        }
        return total / static_cast<double>(val_.size());
    }

    std::vector<nn::Tensor> snapshot() const override { return net_.params().snapshot(); }
    void restore(const std::vector<nn::Tensor>& w) override { net_.params().restore(w); }

private:
    std::pair<nn::Tensor, nn::Tensor> tensors(const std::vector<LandmarkExample>& exs, std::size_t b0,
                                              std::size_t b1) const {
        std::vector<const std::vector<float>*> xs;
        for (std::size_t i = b0; i < b1; ++i) xs.push_back(&exs[i].planar);
        const int hm = cfg_.heatmap_size;
        nn::Tensor t({static_cast<int>(b1 - b0), static_cast<int>(kNumLandmarks), hm, hm});
        for (std::size_t i = b0; i < b1; ++i) {
            const auto& v = exs[i].target.values;
            std::transform(v.begin(), v.end(), t.sample(static_cast<int>(i - b0)),
                           [](double d) { return static_cast<float>(d); });
        }
        return {stack_planar(xs, cfg_.input_size), std::move(t)};
    }

    double step(const std::vector<LandmarkExample>& batch, double lr) {
        nn::Graph g(true);
        auto [x, t] = tensors(batch, 0, batch.size());
        nn::Var loss = nn::mse(g, net_.forward(g, g.input(std::move(x))), t);
        g.backward(loss);
        opt_.step(static_cast<float>(lr));
        return loss->value[0];
    }

    LandmarkNet& net_;
    const LandmarkNetConfig& cfg_;
    const TrainData& data_;
    nn::Adam opt_;
    std::vector<LandmarkExample> val_;
};

class DetectorTask final : public TrainingTask {
public:
    DetectorTask(Detector& det, const TrainData& data)
        : det_(det), cfg_(det.config()), data_(data),
          opt_(det.params(), static_cast<float>(cfg_.optimizer.momentum),
               static_cast<float>(cfg_.optimizer.weight_decay)) {
        for (const Sample* s : data_.val) {
            DetectorExample ex;
            make_detector_example(*s, cfg_, nullptr, ex);
            val_.push_back(std::move(ex));
        }
    }

    double train_epoch(int epoch, double lr) override {
        const auto order = epoch_order(data_.train.size(), cfg_.seed, epoch);
        double total = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg_.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg_.batch_size);
            std::vector<DetectorExample> batch(b1 - b0);
            for (std::size_t i = b0; i < b1; ++i) {
                const Sample& s = *data_.train[order[i]];
                Rng rng = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(epoch) + 1, order[i]);
                draw_example(cfg_.augment, rng, batch[i - b0], [&](const AugmentSpec* spec, DetectorExample& ex) {
                    return make_detector_example(s, cfg_, spec, ex);
                });
            }
            nn::Graph g(true);
            auto [x, targets] = tensors(batch, 0, batch.size());
            nn::Var loss = nn::custom_loss(g, det_.forward(g, g.input(std::move(x))),
                                           [&](const nn::Tensor& raw, nn::Tensor& grad) {
                                               return detection_loss(raw, targets, cfg_, grad).total;
                                           });
            g.backward(loss);
            opt_.step(static_cast<float>(lr));
            total += loss->value[0] * static_cast<double>(batch.size());
        }
        return total / static_cast<double>(order.size());
    }

    double validate() override {
        double total = 0.0;
        for (std::size_t b0 = 0; b0 < val_.size(); b0 += cfg_.batch_size) {
            const std::size_t b1 = std::min(val_.size(), b0 + cfg_.batch_size);
            nn::Graph g(false);
            auto [x, targets] = tensors(val_, b0, b1);
            nn::Var y = det_.forward(g, g.input(std::move(x)));
            nn::Tensor grad;
            total += detection_loss(y->value, targets, cfg_, grad).total * static_cast<double>(b1 - b0);
        }
        return total / static_cast<double>(val_.size());
    }

    std::vector<nn::Tensor> snapshot() const override { return det_.params().snapshot(); }
    void restore(const std::vector<nn::Tensor>& w) override { det_.params().restore(w); }

private:
    std::pair<nn::Tensor, std::vector<BoundingBox>> tensors(const std::vector<DetectorExample>& exs, std::size_t b0,
                                                            std::size_t b1) const {
        std::vector<const std::vector<float>*> xs;
        std::vector<BoundingBox> targets;
        for (std::size_t i = b0; i < b1; ++i) {
            xs.push_back(&exs[i].planar);
            targets.push_back(exs[i].target);
        }
        return {stack_planar(xs, cfg_.input_size), std::move(targets)};
    }

    Detector& det_;
    const DetectorConfig& cfg_;
    const TrainData& data_;
    nn::Sgd opt_;
    std::vector<DetectorExample> val_;
};

template <typename Config>
TrainedModel finish(const char* kind, const Config& cfg, const nn::ParameterStore& store, const TrainData& data,
                    const TrainHistory& h) {
    TrainedModel m;
    m.model_kind = kind;
    m.config = to_json(cfg);
    m.seed = cfg.seed;
    m.data_hash = hash_of(data);
    m.val_loss = h.best_val_loss;
    m.created_at = utc_timestamp();
    m.history = h.epochs;
    m.weights = store.serialize();
    return m;
}

LoopOptions loop_options(int epochs, int patience, LrSchedule lr, const TrainOptions& opts) {
    LoopOptions lo;
    lo.epochs = epochs;
    lo.patience = patience;
    lo.lr = std::move(lr);
    lo.jsonl = opts.jsonl;
    lo.on_epoch = opts.on_epoch;
    return lo;
}

}  // namespace

TrainedModel train_detector(const DetectorConfig& cfg, const TrainData& data, const TrainOptions& opts) {
    require_data(data);
    Detector det(cfg);
    if (cfg.pretrained_init) det.params().load(*cfg.pretrained_init);
    DetectorTask task(det, data);
    const auto h = run_training(
        task, loop_options(cfg.epochs, cfg.early_stop_patience,
                           warmup_linear_schedule(cfg.optimizer.learning_rate, cfg.warmup_epochs, cfg.epochs), opts));
    return finish("detector", cfg, det.params(), data, h);
}

TrainedModel train_landmarks(const LandmarkNetConfig& cfg, const TrainData& data, const TrainOptions& opts) {
    require_data(data);
    LandmarkNet net(cfg);
    if (cfg.pretrained_init) net.params().load(*cfg.pretrained_init);
    LandmarkTask task(net, data);
    const auto h = run_training(task, loop_options(cfg.epochs, cfg.early_stop_patience,
                                                   step_schedule(cfg.optimizer.learning_rate, cfg.lr_drops), opts));
    return finish("landmarks", cfg, net.params(), data, h);
}

std::vector<double> overfit_single(LandmarkNet& net, const Sample& s, int steps, double learning_rate) {
    const auto& cfg = net.config();
    LandmarkExample ex;
    if (!make_landmark_example(s, cfg, nullptr, ex)) {
        throw Error(ErrorCode::OutOfFrame, "landmarks of '" + s.record.image_id + "' leave the crop");
    }
    nn::Tensor target({1, static_cast<int>(kNumLandmarks), cfg.heatmap_size, cfg.heatmap_size});
    std::transform(ex.target.values.begin(), ex.target.values.end(), target.data(),
                   [](double d) { return static_cast<float>(d); });
    const nn::Tensor x = stack_planar({&ex.planar}, cfg.input_size);
    nn::Adam opt(net.params(), static_cast<float>(cfg.optimizer.beta1), static_cast<float>(cfg.optimizer.beta2));
    std::vector<double> losses;
    for (int i = 0; i < steps; ++i) {
        nn::Graph g(true);
        nn::Var loss = nn::mse(g, net.forward(g, g.input(x)), target);
        g.backward(loss);
        opt.step(static_cast<float>(learning_rate));
        losses.push_back(loss->value[0]);
    }
    return losses;
}

}  // namespace post::models
