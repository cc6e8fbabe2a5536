// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Raw NCHW float kernels. The top-level functions are the OpenMP-parallel
// implementations used for training and inference; `reference::` holds
// straightforward serial loops kept as the oracle for tests and the benchmark.

namespace post::kernels {

struct ConvShape {
    int batch = 1;
    int in_c = 0, in_h = 0, in_w = 0;
    int out_c = 0;
    int kernel = 3;
    int stride = 1;
    int pad = 1;

    int out_h() const noexcept { return (in_h + 2 * pad - kernel) / stride + 1; }
    int out_w() const noexcept { return (in_w + 2 * pad - kernel) / stride + 1; }
};

/// C(MxN) = A(MxK) * B(KxN) + beta * C
void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C, float beta);
/// C(MxN) = A(MxK) * B^T, with B stored NxK
void gemm_nt(int M, int N, int K, const float* A, const float* B, float* C, float beta);
/// C(MxN) = A^T * B(KxN), with A stored KxM
void gemm_tn(int M, int N, int K, const float* A, const float* B, float* C, float beta);

/// Weights are (out_c, in_c, k, k); bias may be null.
void conv2d_forward(const ConvShape& s, const float* x, const float* w, const float* bias, float* y);
/// dx (nullable) is overwritten; dw and db (nullable) accumulate.
void conv2d_backward(const ConvShape& s, const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db);

/// Batch statistics; writes per-channel mean and 1/sqrt(var + eps).
void batch_norm_forward_train(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                              float eps, float* y, float* mean, float* invstd);
void batch_norm_forward_eval(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                             const float* running_mean, const float* running_var, float eps, float* y);
/// dx is overwritten; dgamma/dbeta accumulate.
void batch_norm_backward(int n, int c, int plane, const float* x, const float* dy, const float* gamma,
                         const float* mean, const float* invstd, float* dx, float* dgamma, float* dbeta);

/// `planes` independent h x w planes upsampled by an integer factor.
void upsample_nearest_forward(int planes, int h, int w, int factor, const float* x, float* y);
/// dx accumulates.
void upsample_nearest_backward(int planes, int h, int w, int factor, const float* dy, float* dx);
/// Half-pixel-centered bilinear (align_corners = false, edge clamped).
void upsample_bilinear_forward(int planes, int h, int w, int factor, const float* x, float* y);
/// dx accumulates.
void upsample_bilinear_backward(int planes, int h, int w, int factor, const float* dy, float* dx);

namespace reference {

void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C, float beta);
void conv2d_forward(const ConvShape& s, const float* x, const float* w, const float* bias, float* y);
void conv2d_backward(const ConvShape& s, const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db);
void batch_norm_forward_train(int n, int c, int plane, const float* x, const float* gamma, const float* beta,
                              float eps, float* y, float* mean, float* invstd);
void upsample_bilinear_forward(int planes, int h, int w, int factor, const float* x, float* y);

}  // namespace reference

}  // namespace post::kernels
