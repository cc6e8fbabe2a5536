// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "../support/stubs.hpp"
#include "post/error.hpp"
#include "post/models/trainer.hpp"
#include "post/synth.hpp"

using namespace post;
using namespace post::models;

namespace {

LandmarkNetConfig tiny_landmarks() {
    LandmarkNetConfig c;
    c.stages = 2;
    c.stream_widths = {4, 8};
    c.stem_width = 8;
    c.blocks_per_stream = 1;
    c.input_size = 64;
    c.heatmap_size = 16;
    c.batch_size = 4;
    c.epochs = 6;
    c.optimizer.learning_rate = 1e-3;
    c.lr_drops = {};
    return c;
}

DetectorConfig tiny_detector() {
    DetectorConfig c;
    c.widths = {4, 8, 8};
    c.neck_width = 8;
    c.grid_size = 8;
    c.input_size = 32;
    c.epochs = 3;
    c.batch_size = 4;
    return c;
}

}  // namespace

TEST_CASE("early stopping: constant validation loss stops after 15 stale epochs") {
    testing::ScriptedTask task([](int) { return 1.0; });
    LoopOptions opts;
    opts.epochs = 100;
    opts.patience = 15;
    opts.lr = [](int) { return 1e-4; };
    const auto h = run_training(task, opts);
    CHECK(h.epochs.size() == 16);
    CHECK(h.early_stopped);
    CHECK(h.best_epoch == 0);
    CHECK(task.weight() == 0.0f);  // best weights restored
}

TEST_CASE("early stopping: improvement resets the counter; best weights are restored") {
    // improves until epoch 9, then flat
    testing::ScriptedTask task([](int e) { return e <= 9 ? 10.0 - e : 5.0; });
    LoopOptions opts;
    opts.epochs = 100;
    opts.patience = 15;
    opts.lr = [](int) { return 1e-4; };
    const auto h = run_training(task, opts);
    CHECK(h.best_epoch == 9);
    CHECK(h.epochs.size() == 25);
    CHECK(task.weight() == 9.0f);

    testing::ScriptedTask capped([](int e) { return 100.0 - e; });
    opts.epochs = 7;
    const auto hc = run_training(capped, opts);
    CHECK(hc.epochs.size() == 7);
    CHECK(!hc.early_stopped);
}

TEST_CASE("step schedule: default drops give 1e-5 at epoch 50 and 1e-6 at epoch 70") {
    const LandmarkNetConfig cfg;
    testing::ScriptedTask task([](int e) { return 1000.0 - e; });
    std::ostringstream log;
    LoopOptions opts;
    opts.epochs = cfg.epochs;
    opts.patience = cfg.early_stop_patience;
    opts.lr = step_schedule(cfg.optimizer.learning_rate, cfg.lr_drops);
    opts.jsonl = &log;
    run_training(task, opts);
    std::istringstream in(log.str());
    std::string line;
    std::vector<EpochRecord> recs;
    while (std::getline(in, line)) recs.push_back(epoch_record_from_json(nlohmann::json::parse(line)));
    REQUIRE(recs.size() == 100);
    CHECK(recs[49].lr == doctest::Approx(1e-4));
    CHECK(recs[50].lr == doctest::Approx(1e-5));
    CHECK(recs[69].lr == doctest::Approx(1e-5));
    CHECK(recs[70].lr == doctest::Approx(1e-6));
    CHECK(recs[99].lr == doctest::Approx(1e-6));
    for (int e = 0; e < 100; ++e) CHECK(recs[e].epoch == e);
}

TEST_CASE("warmup then linear decay") {
    const auto lr = warmup_linear_schedule(0.01, 3, 50);
    CHECK(lr(0) == doctest::Approx(0.001));
    CHECK(lr(3) == doctest::Approx(0.01));
    CHECK(lr(49) == doctest::Approx(0.0001));
    for (int e = 0; e < 3; ++e) CHECK(lr(e) < lr(e + 1));
    for (int e = 3; e < 49; ++e) CHECK(lr(e) > lr(e + 1));
}

TEST_CASE("non-finite loss aborts with the best weights restored") {
    testing::ScriptedTask task([](int e) { return e < 4 ? 5.0 - e : std::numeric_limits<double>::quiet_NaN(); });
    LoopOptions opts;
    opts.epochs = 20;
    opts.lr = [](int) { return 1e-3; };
    try {
        run_training(task, opts);
        FAIL("NaN accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteLoss);
    }
    CHECK(task.weight() == 3.0f);
}

TEST_CASE("single-sample overfit drives heatmap MSE below 1e-3 in 200 steps") {
    LandmarkNetConfig cfg;
    cfg.stream_widths = {8, 16, 32, 64};
    cfg.stem_width = 16;
    cfg.blocks_per_stream = 1;
    cfg.input_size = 128;
    cfg.heatmap_size = 32;
    const auto s = synth_generate(sample_synth_params(3), "one");
    const Sample sample{s.record, s.image};
    LandmarkNet net(cfg);
    const auto losses = overfit_single(net, sample, 200, 1e-3);
    REQUIRE(losses.size() == 200);
    LandmarkExample ex;
    REQUIRE(make_landmark_example(sample, cfg, nullptr, ex));
    const double mse = mse_loss(net.predict(ex.planar), ex.target);
    MESSAGE("first loss " << losses.front() << ", final eval MSE " << mse);
    CHECK(mse < 1e-3);
    CHECK(losses.back() < losses.front());
}

TEST_CASE("training: deterministic, loss falls, model round trips through disk") {
    const auto corpus = to_samples(synth_corpus(12, 4));
    TrainData data;
    for (int i = 0; i < 8; ++i) data.train.push_back(&corpus[i]);
    for (int i = 8; i < 12; ++i) data.val.push_back(&corpus[i]);

    const auto cfg = tiny_landmarks();
    const TrainedModel a = train_landmarks(cfg, data);
    const TrainedModel b = train_landmarks(cfg, data);
    CHECK(a.val_loss == b.val_loss);
    CHECK(a.weights == b.weights);
    REQUIRE(a.history.size() == 6);
    CHECK(a.history[5].train_loss < a.history[0].train_loss);
    CHECK(a.model_kind == "landmarks");
    CHECK(a.data_hash.size() == 16);

    const auto dir = std::filesystem::temp_directory_path() / "post_train_test";
    std::filesystem::create_directories(dir);
    save_model(a, dir / "lm.postw");
    const auto side = nlohmann::json::parse(std::ifstream(sidecar_path(dir / "lm.postw")));
    for (const char* k : {"model_kind", "config", "seed", "data_hash", "val_loss", "created_at"}) CHECK(side.contains(k));
    const TrainedModel back = load_model(dir / "lm.postw");
    CHECK(back.weights == a.weights);
    CHECK(back.config == a.config);
    const auto net = make_landmark_net(back);
    CHECK(net->params().hash() == make_landmark_net(a)->params().hash());
    CHECK_THROWS_AS(make_detector(back), Error);

    const TrainedModel det = train_detector(tiny_detector(), data);
    CHECK(det.model_kind == "detector");
    CHECK(std::isfinite(det.val_loss));
    std::filesystem::remove_all(dir);

    TrainData empty;
    try {
        train_landmarks(cfg, empty);
        FAIL("empty data accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DataEmpty);
    }
}
