// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/models/landmark_net.hpp"

#include "post/error.hpp"

namespace post::models {

LandmarkNet::LandmarkNet(const LandmarkNetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = Rng::derive(cfg_.seed, 0x1a4d);
    const auto& w = cfg_.stream_widths;
    stem1_ = make_conv_bn(store_, "stem.1", 3, cfg_.stem_width, 3, 2, rng);
    stem2_ = make_conv_bn(store_, "stem.2", cfg_.stem_width, cfg_.stem_width, 3, 2, rng);
    stem_to_stream_ = make_conv_bn(store_, "stem.to_stream", cfg_.stem_width, w[0], 3, 1, rng);

    for (int s = 0; s < cfg_.stages; ++s) {
        Stage st;
        const std::string prefix = "stage" + std::to_string(s + 1);
        const int streams = s + 1;
        if (s > 0) st.transition = make_conv_bn(store_, prefix + ".transition", w[s - 1], w[s], 3, 2, rng);
        st.blocks.resize(streams);
        for (int i = 0; i < streams; ++i) {
            for (int b = 0; b < cfg_.blocks_per_stream; ++b) {
                st.blocks[i].push_back(make_basic_block(
                    store_, prefix + ".stream" + std::to_string(i) + ".block" + std::to_string(b), w[i], rng));
            }
        }
        if (streams > 1) {
            st.fuse.assign(streams, std::vector<Fuse>(streams));
            for (int i = 0; i < streams; ++i) {
                for (int j = 0; j < streams; ++j) {
                    const std::string name = prefix + ".fuse" + std::to_string(j) + "to" + std::to_string(i);
                    auto& path = st.fuse[i][j].path;
                    if (j > i) {
                        path.push_back(make_conv_bn(store_, name, w[j], w[i], 1, 1, rng));
                    } else if (j < i) {
                        for (int k = 0; k < i - j; ++k) {
                            const int out = (k == i - j - 1) ? w[i] : w[j];
                            path.push_back(make_conv_bn(store_, name + "." + std::to_string(k), w[j], out, 3, 2, rng));
                        }
                    }
                }
            }
        }
        stages_.push_back(std::move(st));
    }
    int total = 0;
    for (int c : w) total += c;
    head_w_ = &store_.add_conv_weight("head.w", {static_cast<int>(kNumLandmarks), total, 1, 1}, rng);
    head_b_ = &store_.add("head.b", {1, static_cast<int>(kNumLandmarks), 1, 1}, 0.0f);
    // start the head near zero output, which is close to the mean target
    for (std::size_t i = 0; i < head_w_->value.numel(); ++i) head_w_->value[i] *= 0.1f;
}

nn::Var LandmarkNet::forward(nn::Graph& g, nn::Var x, std::vector<std::vector<nn::Shape>>* stage_shapes) const {
    const nn::Shape in = x->value.shape();
    if (in.c != 3 || in.h != cfg_.input_size || in.w != cfg_.input_size) {
        throw Error(ErrorCode::ConfigMismatch,
                    "landmark net expects (N,3," + std::to_string(cfg_.input_size) + "," + std::to_string(cfg_.input_size) +
                        ") input, got " + in.str());
    }
    nn::Var h = stem_to_stream_(g, stem2_(g, stem1_(g, x)));
    std::vector<nn::Var> streams{h};
    for (const Stage& st : stages_) {
        if (st.transition) streams.push_back((*st.transition)(g, streams.back()));
        for (std::size_t i = 0; i < streams.size(); ++i) {
            for (const auto& block : st.blocks[i]) streams[i] = block(g, streams[i]);
        }
        if (!st.fuse.empty()) {
            std::vector<nn::Var> fused(streams.size());
            for (std::size_t i = 0; i < streams.size(); ++i) {
                nn::Var acc = streams[i];
                for (std::size_t j = 0; j < streams.size(); ++j) {
                    if (j == i) continue;
                    const auto& path = st.fuse[i][j].path;
                    nn::Var v = streams[j];
                    if (j > i) {
                        v = nn::upsample_nearest(g, path[0](g, v, false), 1 << (j - i));
                    } else {
                        for (std::size_t k = 0; k < path.size(); ++k) v = path[k](g, v, k + 1 < path.size());
                    }
                    acc = nn::add(g, acc, v);
                }
                fused[i] = nn::relu(g, acc);
            }
            streams = std::move(fused);
        }
        if (stage_shapes) {
            std::vector<nn::Shape> shapes;
            for (nn::Var v : streams) shapes.push_back(v->value.shape());
            stage_shapes->push_back(std::move(shapes));
        }
    }
    std::vector<nn::Var> up;
    for (std::size_t i = 0; i < streams.size(); ++i) up.push_back(nn::upsample_bilinear(g, streams[i], 1 << i));
    return nn::conv2d(g, nn::concat_channels(g, up), *head_w_, head_b_, 1, 0);
}

HeatmapStack LandmarkNet::predict(const std::vector<float>& planar_crop) const {
    const int in = cfg_.input_size;
    if (planar_crop.size() != std::size_t(3) * in * in) {
        throw Error(ErrorCode::ConfigMismatch, "crop buffer does not match input_size " + std::to_string(in));
    }
    nn::Graph g(false);
    nn::Tensor x({1, 3, in, in});
    std::copy(planar_crop.begin(), planar_crop.end(), x.data());
    nn::Var y = forward(g, g.input(std::move(x)));
    const nn::Shape s = y->value.shape();
    HeatmapStack hm(s.c, s.h, s.w);
    for (std::size_t i = 0; i < hm.values.size(); ++i) hm.values[i] = y->value[i];
    return hm;
}

std::vector<float> crop_planar(const Image& img, const FrameTransform& crop_from_original, int size) {
    std::vector<float> out(std::size_t(3) * size * size);
    warp_to_planar(img, Affine2::from(crop_from_original), size, size, out);
    return out;
}

}  // namespace post::models
