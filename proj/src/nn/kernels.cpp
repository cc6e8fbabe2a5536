// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <omp.h>

namespace post::kernels {

namespace {

inline void scale_rows(float* C, std::size_t count, float beta) {
    if (beta == 0.0f) {
        std::fill(C, C + count, 0.0f);
    } else if (beta != 1.0f) {
        for (std::size_t i = 0; i < count; ++i) C[i] *= beta;
    }
}

// Output columns [lo, hi) whose input column ox*stride - pad + kx is inside [0, in_w).
inline void valid_range(int ow, int in_w, int stride, int pad, int kx, int& lo, int& hi) {
    lo = 0;
    while (lo < ow && lo * stride - pad + kx < 0) ++lo;
    hi = ow;
    while (hi > lo && (hi - 1) * stride - pad + kx >= in_w) --hi;
}

void im2col(const ConvShape& s, const float* x, float* col) {
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    const std::size_t plane = std::size_t(oh) * ow;
    for (int c = 0; c < s.in_c; ++c) {
        const float* xc = x + std::size_t(c) * s.in_h * s.in_w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                int lo, hi;
                valid_range(ow, s.in_w, s.stride, s.pad, kx, lo, hi);
                float* dst = col + (std::size_t(c) * k * k + ky * k + kx) * plane;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride - s.pad + ky;
                    float* row = dst + std::size_t(oy) * ow;
                    if (iy < 0 || iy >= s.in_h) {
                        std::fill(row, row + ow, 0.0f);
                        continue;
                    }
                    const float* src = xc + std::size_t(iy) * s.in_w;
                    std::fill(row, row + lo, 0.0f);
                    std::fill(row + hi, row + ow, 0.0f);
                    const int shift = kx - s.pad;
                    if (s.stride == 1) {
                        std::copy(src + lo + shift, src + hi + shift, row + lo);
                    } else {
                        for (int ox = lo; ox < hi; ++ox) row[ox] = src[ox * s.stride + shift];
                    }
                }
            }
        }
    }
}

void col2im(const ConvShape& s, const float* col, float* x) {
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    const std::size_t plane = std::size_t(oh) * ow;
    std::fill(x, x + std::size_t(s.in_c) * s.in_h * s.in_w, 0.0f);
    for (int c = 0; c < s.in_c; ++c) {
        float* xc = x + std::size_t(c) * s.in_h * s.in_w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                int lo, hi;
                valid_range(ow, s.in_w, s.stride, s.pad, kx, lo, hi);
                const float* src = col + (std::size_t(c) * k * k + ky * k + kx) * plane;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride - s.pad + ky;
                    if (iy < 0 || iy >= s.in_h) continue;
                    float* dst = xc + std::size_t(iy) * s.in_w;
                    const float* row = src + std::size_t(oy) * ow;
                    const int shift = kx - s.pad;
                    if (s.stride == 1) {
#pragma omp simd
                        for (int ox = lo; ox < hi; ++ox) dst[ox + shift] += row[ox];
                    } else {
                        for (int ox = lo; ox < hi; ++ox) dst[ox * s.stride + shift] += row[ox];
                    }
                }
            }
        }
    }
}

bool is_pointwise(const ConvShape& s) { return s.kernel == 1 && s.stride == 1 && s.pad == 0; }

}  // namespace

void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C, float beta) {
    constexpr int kColBlock = 512;
    scale_rows(C, std::size_t(M) * N, beta);
    for (int j0 = 0; j0 < N; j0 += kColBlock) {
        const int nb = std::min(kColBlock, N - j0);
        int i = 0;
        for (; i + 4 <= M; i += 4) {
            float* c0 = C + std::size_t(i) * N + j0;
            float* c1 = c0 + N;
            float* c2 = c1 + N;
            float* c3 = c2 + N;
            const float* a = A + std::size_t(i) * K;
            for (int k = 0; k < K; ++k) {
                const float a0 = a[k], a1 = a[K + k], a2 = a[2 * K + k], a3 = a[3 * K + k];
                const float* b = B + std::size_t(k) * N + j0;
#pragma omp simd
                for (int j = 0; j < nb; ++j) {
                    const float bj = b[j];
                    c0[j] += a0 * bj;
                    c1[j] += a1 * bj;
                    c2[j] += a2 * bj;
                    c3[j] += a3 * bj;
                }
            }
        }
        for (; i < M; ++i) {
            float* c = C + std::size_t(i) * N + j0;
            const float* a = A + std::size_t(i) * K;
            for (int k = 0; k < K; ++k) {
                const float av = a[k];
                const float* b = B + std::size_t(k) * N + j0;
#pragma omp simd
                for (int j = 0; j < nb; ++j) c[j] += av * b[j];
            }
        }
    }
}

void gemm_nt(int M, int N, int K, const float* A, const float* B, float* C, float beta) {
    auto out = [beta](float& c, float acc) { c = (beta == 0.0f ? 0.0f : beta * c) + acc; };
    int i = 0;
    for (; i + 4 <= M; i += 4) {
        const float* a0 = A + std::size_t(i) * K;
        const float* a1 = a0 + K;
        const float* a2 = a1 + K;
        const float* a3 = a2 + K;
        for (int j = 0; j < N; ++j) {
            const float* b = B + std::size_t(j) * K;
            float s0 = 0.0f, s1 = 0.0f, s2 = 0.0f, s3 = 0.0f;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
            for (int k = 0; k < K; ++k) {
                const float bk = b[k];
                s0 += a0[k] * bk;
                s1 += a1[k] * bk;
                s2 += a2[k] * bk;
                s3 += a3[k] * bk;
            }
            out(C[std::size_t(i) * N + j], s0);
            out(C[std::size_t(i + 1) * N + j], s1);
            out(C[std::size_t(i + 2) * N + j], s2);
            out(C[std::size_t(i + 3) * N + j], s3);
        }
    }
    for (; i < M; ++i) {
        const float* a = A + std::size_t(i) * K;
        for (int j = 0; j < N; ++j) {
            const float* b = B + std::size_t(j) * K;
            float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            out(C[std::size_t(i) * N + j], acc);
        }
    }
}

void gemm_tn(int M, int N, int K, const float* A, const float* B, float* C, float beta) {
    scale_rows(C, std::size_t(M) * N, beta);
    for (int i = 0; i < M; ++i) {
        float* c = C + std::size_t(i) * N;
        for (int k = 0; k < K; ++k) {
            const float a = A[std::size_t(k) * M + i];
            if (a == 0.0f) continue;
            const float* b = B + std::size_t(k) * N;
#pragma omp simd
            for (int j = 0; j < N; ++j) c[j] += a * b[j];
        }
    }
}

void conv2d_forward(const ConvShape& s, const float* x, const float* w, const float* bias, float* y) {
    const int oh = s.out_h(), ow = s.out_w();
    const int kdim = s.in_c * s.kernel * s.kernel;
    const std::size_t out_plane = std::size_t(oh) * ow;
    const std::size_t in_size = std::size_t(s.in_c) * s.in_h * s.in_w;
    const bool pointwise = is_pointwise(s);

#pragma omp parallel
    {
        std::vector<float> col(pointwise ? 0 : std::size_t(kdim) * out_plane);
#pragma omp for schedule(static)
        for (int n = 0; n < s.batch; ++n) {
            const float* xn = x + n * in_size;
            float* yn = y + std::size_t(n) * s.out_c * out_plane;
            const float* cols = xn;
            if (!pointwise) {
                im2col(s, xn, col.data());
                cols = col.data();
            }
            if (bias) {
                for (int o = 0; o < s.out_c; ++o) std::fill(yn + o * out_plane, yn + (o + 1) * out_plane, bias[o]);
                gemm_nn(s.out_c, static_cast<int>(out_plane), kdim, w, cols, yn, 1.0f);
            } else {
                gemm_nn(s.out_c, static_cast<int>(out_plane), kdim, w, cols, yn, 0.0f);
            }
        }
    }
}

void conv2d_backward(const ConvShape& s, const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db) {
    const int oh = s.out_h(), ow = s.out_w();
    const int kdim = s.in_c * s.kernel * s.kernel;
    const std::size_t out_plane = std::size_t(oh) * ow;
    const std::size_t in_size = std::size_t(s.in_c) * s.in_h * s.in_w;
    const std::size_t wsize = std::size_t(s.out_c) * kdim;
    const bool pointwise = is_pointwise(s);

#pragma omp parallel
    {
        std::vector<float> col(pointwise ? 0 : std::size_t(kdim) * out_plane);
        std::vector<float> dcol(pointwise || !dx ? 0 : std::size_t(kdim) * out_plane);
        std::vector<float> dw_local(wsize, 0.0f);
        std::vector<float> db_local(db ? s.out_c : 0, 0.0f);

#pragma omp for schedule(static)
        for (int n = 0; n < s.batch; ++n) {
            const float* xn = x + n * in_size;
            const float* dyn = dy + std::size_t(n) * s.out_c * out_plane;
            const float* cols = xn;
            if (!pointwise) {
                im2col(s, xn, col.data());
                cols = col.data();
            }
            gemm_nt(s.out_c, kdim, static_cast<int>(out_plane), dyn, cols, dw_local.data(), 1.0f);
            if (db) {
                for (int o = 0; o < s.out_c; ++o) {
                    float acc = 0.0f;
                    const float* d = dyn + o * out_plane;
#pragma omp simd reduction(+ : acc)
                    for (std::size_t i = 0; i < out_plane; ++i) acc += d[i];
                    db_local[o] += acc;
                }
            }
            if (dx) {
                float* dxn = dx + n * in_size;
                if (pointwise) {
                    gemm_tn(kdim, static_cast<int>(out_plane), s.out_c, w, dyn, dxn, 0.0f);
                } else {
                    gemm_tn(kdim, static_cast<int>(out_plane), s.out_c, w, dyn, dcol.data(), 0.0f);
                    col2im(s, dcol.data(), dxn);
                }
            }
        }
#pragma omp critical(post_conv_reduce)
        {
            for (std::size_t i = 0; i < wsize; ++i) dw[i] += dw_local[i];
            if (db) {
                for (int o = 0; o < s.out_c; ++o) db[o] += db_local[o];
            }
        }
    }
}

void batch_norm_forward_train(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                              float eps, float* y, float* mean, float* invstd) {
    const std::size_t chw = std::size_t(c) * plane;
    const double count = static_cast<double>(n) * plane;
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (int b = 0; b < n; ++b) {
            const float* p = x + b * chw + std::size_t(ch) * plane;
            float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
            for (int i = 0; i < plane; ++i) acc += p[i];
            sum += acc;
        }
        const double mu = sum / count;
        double ss = 0.0;
        for (int b = 0; b < n; ++b) {
            const float* p = x + b * chw + std::size_t(ch) * plane;
            const float m = static_cast<float>(mu);
            float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
            for (int i = 0; i < plane; ++i) acc += (p[i] - m) * (p[i] - m);
            ss += acc;
        }
        const float is = static_cast<float>(1.0 / std::sqrt(ss / count + eps));
        mean[ch] = static_cast<float>(mu);
        invstd[ch] = is;
        const float g = gamma[ch] * is, sh = beta[ch] - static_cast<float>(mu) * g;
        for (int b = 0; b < n; ++b) {
            const float* p = x + b * chw + std::size_t(ch) * plane;
            float* q = y + b * chw + std::size_t(ch) * plane;
#pragma omp simd
            for (int i = 0; i < plane; ++i) q[i] = p[i] * g + sh;
        }
    }
}

void batch_norm_forward_eval(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                             const float* running_mean, const float* running_var, float eps, float* y) {
    const std::size_t chw = std::size_t(c) * plane;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c; ++ch) {
            const float g = gamma[ch] / std::sqrt(running_var[ch] + eps);
            const float sh = beta[ch] - running_mean[ch] * g;
            const float* p = x + b * chw + std::size_t(ch) * plane;
            float* q = y + b * chw + std::size_t(ch) * plane;
#pragma omp simd
            for (int i = 0; i < plane; ++i) q[i] = p[i] * g + sh;
        }
    }
}

void batch_norm_backward(int n, int c, int plane, const float* x, const float* dy, const float* gamma,
                         const float* mean, const float* invstd, float* dx, float* dgamma, float* dbeta) {
    const std::size_t chw = std::size_t(c) * plane;
    const double count = static_cast<double>(n) * plane;
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch) {
        const float mu = mean[ch], is = invstd[ch];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < n; ++b) {
            const float* p = x + b * chw + std::size_t(ch) * plane;
            const float* d = dy + b * chw + std::size_t(ch) * plane;
            float a0 = 0.0f, a1 = 0.0f;
#pragma omp simd reduction(+ : a0, a1)
            for (int i = 0; i < plane; ++i) {
                a0 += d[i];
                a1 += d[i] * (p[i] - mu) * is;
            }
            sum_dy += a0;
            sum_dy_xhat += a1;
        }
        dbeta[ch] += static_cast<float>(sum_dy);
        dgamma[ch] += static_cast<float>(sum_dy_xhat);
        if (!dx) continue;
        const float k = gamma[ch] * is;
        const float m_dy = static_cast<float>(sum_dy / count), m_dyx = static_cast<float>(sum_dy_xhat / count);
        for (int b = 0; b < n; ++b) {
            const float* p = x + b * chw + std::size_t(ch) * plane;
            const float* d = dy + b * chw + std::size_t(ch) * plane;
            float* q = dx + b * chw + std::size_t(ch) * plane;
#pragma omp simd
            for (int i = 0; i < plane; ++i) q[i] = k * (d[i] - m_dy - (p[i] - mu) * is * m_dyx);
        }
    }
}

void upsample_nearest_forward(int planes, int h, int w, int factor, const float* x, float* y) {
    const int oh = h * factor, ow = w * factor;
#pragma omp parallel for schedule(static)
    for (int p = 0; p < planes; ++p) {
        const float* src = x + std::size_t(p) * h * w;
        float* dst = y + std::size_t(p) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            const float* row = src + std::size_t(oy / factor) * w;
            float* out = dst + std::size_t(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) out[ox] = row[ox / factor];
        }
    }
}

void upsample_nearest_backward(int planes, int h, int w, int factor, const float* dy, float* dx) {
    const int oh = h * factor, ow = w * factor;
#pragma omp parallel for schedule(static)
    for (int p = 0; p < planes; ++p) {
        const float* src = dy + std::size_t(p) * oh * ow;
        float* dst = dx + std::size_t(p) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            float* row = dst + std::size_t(oy / factor) * w;
            const float* g = src + std::size_t(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) row[ox / factor] += g[ox];
        }
    }
}

namespace {

struct Tap {
    int i0, i1;
    float w0, w1;
};

std::vector<Tap> bilinear_taps(int in, int factor) {
    std::vector<Tap> taps(std::size_t(in) * factor);
    for (int o = 0; o < in * factor; ++o) {
        const float src = std::max((o + 0.5f) / factor - 0.5f, 0.0f);
        const int i0 = std::min(static_cast<int>(src), in - 1);
        const int i1 = std::min(i0 + 1, in - 1);
        const float l = src - i0;
        taps[o] = {i0, i1, 1.0f - l, l};
    }
    return taps;
}

}  // namespace

void upsample_bilinear_forward(int planes, int h, int w, int factor, const float* x, float* y) {
    const int oh = h * factor, ow = w * factor;
    const auto ty = bilinear_taps(h, factor), tx = bilinear_taps(w, factor);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < planes; ++p) {
        const float* src = x + std::size_t(p) * h * w;
        float* dst = y + std::size_t(p) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            const Tap& vy = ty[oy];
            const float* r0 = src + std::size_t(vy.i0) * w;
            const float* r1 = src + std::size_t(vy.i1) * w;
            float* out = dst + std::size_t(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
                const Tap& vx = tx[ox];
                out[ox] = vy.w0 * (vx.w0 * r0[vx.i0] + vx.w1 * r0[vx.i1]) + vy.w1 * (vx.w0 * r1[vx.i0] + vx.w1 * r1[vx.i1]);
            }
        }
    }
}

void upsample_bilinear_backward(int planes, int h, int w, int factor, const float* dy, float* dx) {
    const int oh = h * factor, ow = w * factor;
    const auto ty = bilinear_taps(h, factor), tx = bilinear_taps(w, factor);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < planes; ++p) {
        const float* src = dy + std::size_t(p) * oh * ow;
        float* dst = dx + std::size_t(p) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            const Tap& vy = ty[oy];
            float* r0 = dst + std::size_t(vy.i0) * w;
            float* r1 = dst + std::size_t(vy.i1) * w;
            const float* g = src + std::size_t(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
                const Tap& vx = tx[ox];
                r0[vx.i0] += vy.w0 * vx.w0 * g[ox];
                r0[vx.i1] += vy.w0 * vx.w1 * g[ox];
                r1[vx.i0] += vy.w1 * vx.w0 * g[ox];
                r1[vx.i1] += vy.w1 * vx.w1 * g[ox];
            }
        }
    }
}

namespace reference {

void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C, float beta) {
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < N; ++j) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += static_cast<double>(A[std::size_t(i) * K + k]) * B[std::size_t(k) * N + j];
            float& c = C[std::size_t(i) * N + j];
            c = static_cast<float>(acc + (beta == 0.0f ? 0.0 : static_cast<double>(beta) * c));
        }
    }
}

void conv2d_forward(const ConvShape& s, const float* x, const float* w, const float* bias, float* y) {
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    for (int n = 0; n < s.batch; ++n) {
        for (int o = 0; o < s.out_c; ++o) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias ? bias[o] : 0.0;
                    for (int c = 0; c < s.in_c; ++c) {
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = oy * s.stride - s.pad + ky;
                            if (iy < 0 || iy >= s.in_h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ox * s.stride - s.pad + kx;
                                if (ix < 0 || ix >= s.in_w) continue;
                                acc += static_cast<double>(x[((std::size_t(n) * s.in_c + c) * s.in_h + iy) * s.in_w + ix]) *
                                       w[((std::size_t(o) * s.in_c + c) * k + ky) * k + kx];
                            }
                        }
                    }
                    y[((std::size_t(n) * s.out_c + o) * oh + oy) * ow + ox] = static_cast<float>(acc);
                }
            }
        }
    }
}

void conv2d_backward(const ConvShape& s, const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db) {
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    if (dx) std::fill(dx, dx + std::size_t(s.batch) * s.in_c * s.in_h * s.in_w, 0.0f);
    for (int n = 0; n < s.batch; ++n) {
        for (int o = 0; o < s.out_c; ++o) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const float g = dy[((std::size_t(n) * s.out_c + o) * oh + oy) * ow + ox];
                    if (db) db[o] += g;
                    for (int c = 0; c < s.in_c; ++c) {
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = oy * s.stride - s.pad + ky;
                            if (iy < 0 || iy >= s.in_h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ox * s.stride - s.pad + kx;
                                if (ix < 0 || ix >= s.in_w) continue;
                                const std::size_t xi = ((std::size_t(n) * s.in_c + c) * s.in_h + iy) * s.in_w + ix;
                                const std::size_t wi = ((std::size_t(o) * s.in_c + c) * k + ky) * k + kx;
                                dw[wi] += g * x[xi];
                                if (dx) dx[xi] += g * w[wi];
                            }
                        }
                    }
                }
            }
        }
    }
}

void batch_norm_forward_train(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                              float eps, float* y, float* mean, float* invstd) {
    const double count = static_cast<double>(n) * plane;
    for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0, sq = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int i = 0; i < plane; ++i) sum += x[(std::size_t(b) * c + ch) * plane + i];
        }
        const double mu = sum / count;
        for (int b = 0; b < n; ++b) {
            for (int i = 0; i < plane; ++i) {
                const double d = x[(std::size_t(b) * c + ch) * plane + i] - mu;
                sq += d * d;
            }
        }
        const double is = 1.0 / std::sqrt(sq / count + eps);
        mean[ch] = static_cast<float>(mu);
        invstd[ch] = static_cast<float>(is);
        for (int b = 0; b < n; ++b) {
            for (int i = 0; i < plane; ++i) {
                const std::size_t idx = (std::size_t(b) * c + ch) * plane + i;
                y[idx] = static_cast<float>(gamma[ch] * (x[idx] - mu) * is + beta[ch]);
            }
        }
    }
}

void upsample_bilinear_forward(int planes, int h, int w, int factor, const float* x, float* y) {
    const int oh = h * factor, ow = w * factor;
    auto coord = [&](int o, int in, int& i0, int& i1, double& l) {
        double src = (o + 0.5) / factor - 0.5;
        if (src < 0) src = 0;
        i0 = std::min(static_cast<int>(std::floor(src)), in - 1);
        i1 = std::min(i0 + 1, in - 1);
        l = src - i0;
    };
    for (int p = 0; p < planes; ++p) {
        for (int oy = 0; oy < oh; ++oy) {
            int y0, y1;
            double ly;
            coord(oy, h, y0, y1, ly);
            for (int ox = 0; ox < ow; ++ox) {
                int x0, x1;
                double lx;
                coord(ox, w, x0, x1, lx);
                const float* s = x + std::size_t(p) * h * w;
                const double v = (1 - ly) * ((1 - lx) * s[y0 * w + x0] + lx * s[y0 * w + x1]) +
                                 ly * ((1 - lx) * s[y1 * w + x0] + lx * s[y1 * w + x1]);
                y[(std::size_t(p) * oh + oy) * ow + ox] = static_cast<float>(v);
            }
        }
    }
}

}  // namespace reference

}  // namespace post::kernels
