// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "post/error.hpp"
#include "post/nn/graph.hpp"
#include "post/nn/kernels.hpp"
#include "post/nn/optim.hpp"
#include "post/random.hpp"

using namespace post;
using namespace post::nn;

namespace {

std::vector<float> random_vec(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
    return v;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - b[i]));
    return m;
}

std::vector<float> transpose(const std::vector<float>& m, int rows, int cols) {
    std::vector<float> t(m.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t[std::size_t(c) * rows + r] = m[std::size_t(r) * cols + c];
    return t;
}

Tensor random_tensor(Shape s, Rng& rng) {
    Tensor t(s);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.uniform(-1, 1));
    return t;
}

}  // namespace

TEST_CASE("gemm variants match the naive reference") {
    Rng rng(1);
    for (auto [M, N, K] : {std::tuple{1, 1, 1}, {5, 7, 3}, {17, 130, 33}, {64, 600, 9}, {3, 1030, 70}}) {
        const auto A = random_vec(std::size_t(M) * K, rng);
        const auto B = random_vec(std::size_t(K) * N, rng);
        auto C0 = random_vec(std::size_t(M) * N, rng);
        auto C1 = C0, C2 = C0, C3 = C0;
        kernels::reference::gemm_nn(M, N, K, A.data(), B.data(), C0.data(), 0.5f);
        kernels::gemm_nn(M, N, K, A.data(), B.data(), C1.data(), 0.5f);
        kernels::gemm_nt(M, N, K, A.data(), transpose(B, K, N).data(), C2.data(), 0.5f);
        kernels::gemm_tn(M, N, K, transpose(A, M, K).data(), B.data(), C3.data(), 0.5f);
        CHECK(max_abs_diff(C0, C1) < 1e-4);
        CHECK(max_abs_diff(C0, C2) < 1e-4);
        CHECK(max_abs_diff(C0, C3) < 1e-4);
    }
}

TEST_CASE("conv forward/backward match the naive reference") {
    Rng rng(2);
    const kernels::ConvShape shapes[] = {
        {2, 3, 9, 11, 4, 3, 1, 1},
        {3, 4, 10, 10, 5, 3, 2, 1},
        {2, 6, 7, 5, 3, 1, 1, 0},
        {1, 2, 8, 8, 3, 1, 2, 0},
    };
    for (const auto& s : shapes) {
        const std::size_t xn = std::size_t(s.batch) * s.in_c * s.in_h * s.in_w;
        const std::size_t wn = std::size_t(s.out_c) * s.in_c * s.kernel * s.kernel;
        const std::size_t yn = std::size_t(s.batch) * s.out_c * s.out_h() * s.out_w();
        const auto x = random_vec(xn, rng), w = random_vec(wn, rng), b = random_vec(s.out_c, rng);
        const auto dy = random_vec(yn, rng);
        std::vector<float> y0(yn), y1(yn);
        kernels::reference::conv2d_forward(s, x.data(), w.data(), b.data(), y0.data());
        kernels::conv2d_forward(s, x.data(), w.data(), b.data(), y1.data());
        CHECK(max_abs_diff(y0, y1) < 1e-4);

        std::vector<float> dx0(xn), dx1(xn, 7.0f), dw0(wn), dw1(wn), db0(s.out_c), db1(s.out_c);
        kernels::reference::conv2d_backward(s, x.data(), w.data(), dy.data(), dx0.data(), dw0.data(), db0.data());
        kernels::conv2d_backward(s, x.data(), w.data(), dy.data(), dx1.data(), dw1.data(), db1.data());
        CHECK(max_abs_diff(dx0, dx1) < 1e-4);
        CHECK(max_abs_diff(dw0, dw1) < 1e-3);
        CHECK(max_abs_diff(db0, db1) < 1e-4);
    }
}

TEST_CASE("batch norm and bilinear upsample match the reference") {
    Rng rng(3);
    const int n = 3, c = 4, plane = 37;
    const auto x = random_vec(std::size_t(n) * c * plane, rng);
    const auto gamma = random_vec(c, rng), beta = random_vec(c, rng);
    std::vector<float> y0(x.size()), y1(x.size()), m0(c), m1(c), s0(c), s1(c);
    kernels::reference::batch_norm_forward_train(n, c, plane, x.data(), gamma.data(), beta.data(), 1e-5f, y0.data(),
                                                 m0.data(), s0.data());
    kernels::batch_norm_forward_train(n, c, plane, x.data(), gamma.data(), beta.data(), 1e-5f, y1.data(), m1.data(),
                                      s1.data());
    CHECK(max_abs_diff(y0, y1) < 1e-4);
    CHECK(max_abs_diff(m0, m1) < 1e-6);

    const int h = 5, w = 7;
    for (int factor : {2, 4, 8}) {
        const auto src = random_vec(std::size_t(6) * h * w, rng);
        std::vector<float> u0(std::size_t(6) * h * w * factor * factor), u1(u0.size());
        kernels::reference::upsample_bilinear_forward(6, h, w, factor, src.data(), u0.data());
        kernels::upsample_bilinear_forward(6, h, w, factor, src.data(), u1.data());
        CHECK(max_abs_diff(u0, u1) < 1e-5);
    }
}

TEST_CASE("bilinear upsample of a constant plane is constant; backward is the adjoint") {
    Rng rng(4);
    const int h = 4, w = 3, f = 4;
    std::vector<float> ones(h * w, 2.5f), up(h * w * f * f);
    kernels::upsample_bilinear_forward(1, h, w, f, ones.data(), up.data());
    for (float v : up) CHECK(v == doctest::Approx(2.5f));

    // <U x, y> == <x, U^T y>
    const auto x = random_vec(h * w, rng), y = random_vec(up.size(), rng);
    std::vector<float> ux(up.size()), uty(h * w, 0.0f);
    kernels::upsample_bilinear_forward(1, h, w, f, x.data(), ux.data());
    kernels::upsample_bilinear_backward(1, h, w, f, y.data(), uty.data());
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < ux.size(); ++i) lhs += double(ux[i]) * y[i];
    for (std::size_t i = 0; i < uty.size(); ++i) rhs += double(x[i]) * uty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));

    std::vector<float> nx(h * w * f * f), nty(h * w, 0.0f);
    kernels::upsample_nearest_forward(1, h, w, f, x.data(), nx.data());
    kernels::upsample_nearest_backward(1, h, w, f, y.data(), nty.data());
    lhs = rhs = 0;
    for (std::size_t i = 0; i < nx.size(); ++i) lhs += double(nx[i]) * y[i];
    for (std::size_t i = 0; i < nty.size(); ++i) rhs += double(x[i]) * nty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

namespace {

// Small two-branch network touching every differentiable op.
struct TinyNet {
    ParameterStore store;
    Parameter *w1, *b1, *w2, *w3, *w4;
    BatchNormParams bn;

    explicit TinyNet(Rng& rng) {
        w1 = &store.add_conv_weight("w1", {4, 2, 3, 3}, rng);
        b1 = &store.add("b1", {1, 4, 1, 1}, 0.1f);
        w2 = &store.add_conv_weight("w2", {6, 4, 3, 3}, rng);
        w3 = &store.add_conv_weight("w3", {4, 6, 1, 1}, rng);
        w4 = &store.add_conv_weight("w4", {3, 8, 1, 1}, rng);
        bn.gamma = &store.add("g", {1, 6, 1, 1}, 1.2f);
        bn.beta = &store.add("be", {1, 6, 1, 1}, 0.1f);
        bn.running_mean = &store.add("rm", {1, 6, 1, 1}, 0.0f, false);
        bn.running_var = &store.add("rv", {1, 6, 1, 1}, 1.0f, false);
    }

    Var forward(Graph& g, Var x) {
        Var a = relu(g, conv2d(g, x, *w1, b1, 1, 1));                  // 4 @ 8x8
        Var lo = batch_norm(g, conv2d(g, a, *w2, nullptr, 2, 1), bn);  // 6 @ 4x4
        Var up1 = upsample_nearest(g, conv2d(g, lo, *w3, nullptr, 1, 0), 2);
        Var fused = add(g, a, up1);
        Var cat = concat_channels(g, {fused, upsample_bilinear(g, conv2d(g, lo, *w3, nullptr, 1, 0), 2)});
        return conv2d(g, cat, *w4, nullptr, 1, 0);
    }
};

double loss_at(TinyNet& net, const Tensor& x, const Tensor& target) {
    Graph g(true);
    return mse(g, net.forward(g, g.input(x)), target)->value[0];
}

}  // namespace

TEST_CASE("graph gradients match central finite differences") {
    Rng rng(5);
    TinyNet net(rng);
    const Tensor x = random_tensor({2, 2, 8, 8}, rng);
    const Tensor target = random_tensor({2, 3, 8, 8}, rng);

    Graph g(true);
    Var loss = mse(g, net.forward(g, g.input(x)), target);
    g.backward(loss);

    const double h = 2e-3;
    int checked = 0;
    for (const auto& p : net.store.all()) {
        if (!p->trainable) continue;
        for (int trial = 0; trial < 6; ++trial) {
            const std::size_t i = rng.below(p->value.numel());
            const float orig = p->value[i];
            p->value[i] = static_cast<float>(orig + h);
            const double up = loss_at(net, x, target);
            p->value[i] = static_cast<float>(orig - h);
            const double down = loss_at(net, x, target);
            p->value[i] = orig;
            const double numeric = (up - down) / (2 * h);
            INFO(p->name, "[", i, "]");
            CHECK(p->grad[i] == doctest::Approx(numeric).epsilon(2e-2).scale(1e-3));
            ++checked;
        }
    }
    CHECK(checked == 42);
}

TEST_CASE("eval graph uses running statistics and records no tape") {
    Rng rng(6);
    TinyNet net(rng);
    const Tensor x = random_tensor({1, 2, 8, 8}, rng);
    Graph g(false);
    Var y = net.forward(g, g.input(x));
    CHECK(!y->requires_grad);
    CHECK(!y->backward);
    CHECK(y->value.shape() == Shape{1, 3, 8, 8});
}

TEST_CASE("weight blob round trip and hash") {
    Rng rng(7);
    TinyNet a(rng), b(rng);
    CHECK(a.store.hash() != b.store.hash());
    b.store.deserialize(a.store.serialize());
    CHECK(a.store.hash() == b.store.hash());

    ParameterStore other;
    other.add("w1", {1, 1, 1, 1});
    CHECK_THROWS_AS(other.deserialize(a.store.serialize()), Error);
}

TEST_CASE("optimizers descend a quadratic") {
    for (int kind = 0; kind < 2; ++kind) {
        ParameterStore store;
        Parameter& p = store.add("p", {1, 1, 1, 4}, 3.0f, true, false);
        std::unique_ptr<Optimizer> opt;
        if (kind == 0) opt = std::make_unique<Sgd>(store, 0.9f, 0.0f);
        else opt = std::make_unique<Adam>(store, 0.9f, 0.99f);
        for (int it = 0; it < 400; ++it) {
            for (int i = 0; i < 4; ++i) p.grad[i] = 2.0f * (p.value[i] - float(i));
            opt->step(kind == 0 ? 0.02f : 0.05f);
        }
        for (int i = 0; i < 4; ++i) CHECK(p.value[i] == doctest::Approx(float(i)).epsilon(1e-2).scale(1e-2));
    }
}
