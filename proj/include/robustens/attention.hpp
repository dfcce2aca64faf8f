#pragma once

// Single-head self-attention over a short sequence, with hand-written reverse
// accumulation. No positional encodings and mean pooling at the end, so the
// pooled output is invariant to permuting the sequence.

#include <cmath>
#include <cstddef>
#include <vector>

#include "robustens/common.hpp"

namespace robustens {

// Dense row-major matrix, just enough for the inference network.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// out = x * w, with x (T x d) and w (d x e)
inline Mat matmul(const Mat& x, const Mat& w) {
    Mat out(x.rows, w.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double xv = x.at(i, k);
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < w.cols; ++j) out.at(i, j) += xv * w.at(k, j);
        }
    return out;
}

// out += x^T * y, with x (T x d), y (T x e), out (d x e)
inline void accumulate_at_b(const Mat& x, const Mat& y, Mat& out) {
    for (std::size_t t = 0; t < x.rows; ++t)
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double xv = x.at(t, i);
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out.at(i, j) += xv * y.at(t, j);
        }
}

// out = x * w^T, with x (T x e), w (d x e)
inline Mat matmul_bt(const Mat& x, const Mat& w) {
    Mat out(x.rows, w.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < w.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.cols; ++k) s += x.at(i, k) * w.at(j, k);
            out.at(i, j) = s;
        }
    return out;
}

struct AttentionParams {
    std::size_t dim = 0;
    Mat wq, wk, wv, wo;  // each dim x dim

    explicit AttentionParams(std::size_t d = 0)
        : dim(d), wq(d, d), wk(d, d), wv(d, d), wo(d, d) {}

    void init(Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
        for (Mat* w : {&wq, &wk, &wv, &wo})
            for (double& v : w->a) v = rng.uniform(-bound, bound);
    }
};

struct AttentionCache {
    Mat x, q, k, v, attn, mix;  // attn is T x T, everything else T x dim
};

struct AttentionGrads {
    Mat wq, wk, wv, wo;

    explicit AttentionGrads(std::size_t d = 0) : wq(d, d), wk(d, d), wv(d, d), wo(d, d) {}
};

// Runs the block over x (T x d) and mean-pools to a single d-vector.
inline std::vector<double> attention_forward(const AttentionParams& p, const Mat& x,
                                             AttentionCache& cache) {
    const std::size_t t_len = x.rows;
    const std::size_t d = p.dim;
    cache.x = x;
    cache.q = matmul(x, p.wq);
    cache.k = matmul(x, p.wk);
    cache.v = matmul(x, p.wv);

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    cache.attn = Mat(t_len, t_len);
    for (std::size_t i = 0; i < t_len; ++i) {
        double row_max = -1e300;
        for (std::size_t j = 0; j < t_len; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += cache.q.at(i, k) * cache.k.at(j, k);
            s *= scale;
            cache.attn.at(i, j) = s;
            if (s > row_max) row_max = s;
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < t_len; ++j) {
            const double e = std::exp(cache.attn.at(i, j) - row_max);
            cache.attn.at(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < t_len; ++j) cache.attn.at(i, j) /= denom;
    }

    cache.mix = matmul(cache.attn, cache.v);
    Mat out = matmul(cache.mix, p.wo);

    std::vector<double> pooled(d, 0.0);
    for (std::size_t i = 0; i < t_len; ++i)
        for (std::size_t j = 0; j < d; ++j) pooled[j] += out.at(i, j);
    for (double& v : pooled) v /= static_cast<double>(t_len);
    return pooled;
}

// Backpropagates d(loss)/d(pooled) through the cached forward pass.
// Parameter gradients accumulate into `grads`; returns d(loss)/dx (T x d).
inline Mat attention_backward(const AttentionParams& p, const AttentionCache& cache,
                              const std::vector<double>& d_pooled, AttentionGrads& grads) {
    const std::size_t t_len = cache.x.rows;
    const std::size_t d = p.dim;
    const double inv_t = 1.0 / static_cast<double>(t_len);

    Mat d_out(t_len, d);
    for (std::size_t i = 0; i < t_len; ++i)
        for (std::size_t j = 0; j < d; ++j) d_out.at(i, j) = d_pooled[j] * inv_t;

    accumulate_at_b(cache.mix, d_out, grads.wo);
    Mat d_mix = matmul_bt(d_out, p.wo);

    Mat d_attn = matmul_bt(d_mix, cache.v);  // (T x T)
    Mat d_v(t_len, d);
    for (std::size_t j = 0; j < t_len; ++j)
        for (std::size_t i = 0; i < t_len; ++i) {
            const double a = cache.attn.at(i, j);
            if (a == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) d_v.at(j, k) += a * d_mix.at(i, k);
        }

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Mat d_scores(t_len, t_len);
    for (std::size_t i = 0; i < t_len; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < t_len; ++j) dot += d_attn.at(i, j) * cache.attn.at(i, j);
        for (std::size_t j = 0; j < t_len; ++j)
            d_scores.at(i, j) = cache.attn.at(i, j) * (d_attn.at(i, j) - dot) * scale;
    }

    Mat d_q = matmul(d_scores, cache.k);
    Mat d_k(t_len, d);
    for (std::size_t j = 0; j < t_len; ++j)
        for (std::size_t i = 0; i < t_len; ++i) {
            const double s = d_scores.at(i, j);
            if (s == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) d_k.at(j, k) += s * cache.q.at(i, k);
        }

    accumulate_at_b(cache.x, d_q, grads.wq);
    accumulate_at_b(cache.x, d_k, grads.wk);
    accumulate_at_b(cache.x, d_v, grads.wv);

    Mat d_x = matmul_bt(d_q, p.wq);
    const Mat d_x_k = matmul_bt(d_k, p.wk);
    const Mat d_x_v = matmul_bt(d_v, p.wv);
    for (std::size_t i = 0; i < d_x.a.size(); ++i) d_x.a[i] += d_x_k.a[i] + d_x_v.a[i];
    return d_x;
}

}  // namespace robustens
