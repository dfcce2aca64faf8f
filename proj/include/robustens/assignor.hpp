#pragma once

// The weight assignor: an inference network mapping a prediction matrix to the
// posterior mean of each cell's log-normal weight. One scalar lift feeds two
// single-head attention blocks (one shared across rows, one across columns);
// pooled row/column embeddings meet in a two-layer MLP that emits the per-cell
// posterior mean. The posterior variance is pinned to the prior's.
//
// Everything here is differentiated by hand; gradients are exact for the
// fixed-noise K-sample ELBO estimate.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "robustens/attention.hpp"
#include "robustens/common.hpp"
#include "robustens/matrix.hpp"
#include "robustens/prior.hpp"

namespace robustens {

struct AssignorConfig {
    std::size_t embed_dim = 16;   // d
    std::size_t hidden_dim = 32;  // h
    std::size_t k_train = 16;     // ELBO samples during training
    std::size_t k_eval = 64;      // ELBO / MC samples at inference

    void validate() const {
        if (embed_dim < 1 || hidden_dim < 1) throw ValidationError("assignor dims must be >= 1");
        if (k_train < 1 || k_eval < 1) throw ValidationError("assignor sample counts must be >= 1");
    }
};

// Named view into one parameter tensor; used by the optimizer, the
// checkpointer, and the finite-difference tests.
struct TensorRef {
    std::string name;
    double* data;
    std::size_t size;
};

struct AssignorParams {
    std::size_t embed_dim = 0;
    std::size_t hidden_dim = 0;
    std::vector<double> lift_scale, lift_shift;  // d each: cell = p * scale + shift
    AttentionParams row_block, col_block;
    Mat mlp_w1;                  // h x 2d
    std::vector<double> mlp_b1;  // h
    std::vector<double> mlp_w2;  // h
    double mlp_b2 = 0.0;

    AssignorParams() = default;

    AssignorParams(std::size_t d, std::size_t h)
        : embed_dim(d),
          hidden_dim(h),
          lift_scale(d, 0.0),
          lift_shift(d, 0.0),
          row_block(d),
          col_block(d),
          mlp_w1(h, 2 * d),
          mlp_b1(h, 0.0),
          mlp_w2(h, 0.0),
          mlp_b2(0.0) {}

    static AssignorParams init(const AssignorConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        AssignorParams p(cfg.embed_dim, cfg.hidden_dim);
        Rng rng(derive_seed_str(seed, "assignor-init"));
        for (double& v : p.lift_scale) v = rng.uniform(-1.0, 1.0);
        for (double& v : p.lift_shift) v = rng.uniform(-1.0, 1.0);
        p.row_block.init(rng);
        p.col_block.init(rng);
        const double w1_bound = 1.0 / std::sqrt(static_cast<double>(2 * cfg.embed_dim));
        for (double& v : p.mlp_w1.a) v = rng.uniform(-w1_bound, w1_bound);
        const double w2_bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
        for (double& v : p.mlp_w2) v = rng.uniform(-w2_bound, w2_bound);
        // Start the posterior mean near the prior's scale for calm matrices.
        p.mlp_b2 = 1.0;
        return p;
    }

    std::vector<TensorRef> tensors() {
        return {
            {"lift_scale", lift_scale.data(), lift_scale.size()},
            {"lift_shift", lift_shift.data(), lift_shift.size()},
            {"row_wq", row_block.wq.a.data(), row_block.wq.a.size()},
            {"row_wk", row_block.wk.a.data(), row_block.wk.a.size()},
            {"row_wv", row_block.wv.a.data(), row_block.wv.a.size()},
            {"row_wo", row_block.wo.a.data(), row_block.wo.a.size()},
            {"col_wq", col_block.wq.a.data(), col_block.wq.a.size()},
            {"col_wk", col_block.wk.a.data(), col_block.wk.a.size()},
            {"col_wv", col_block.wv.a.data(), col_block.wv.a.size()},
            {"col_wo", col_block.wo.a.data(), col_block.wo.a.size()},
            {"mlp_w1", mlp_w1.a.data(), mlp_w1.a.size()},
            {"mlp_b1", mlp_b1.data(), mlp_b1.size()},
            {"mlp_w2", mlp_w2.data(), mlp_w2.size()},
            {"mlp_b2", &mlp_b2, 1},
        };
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (const auto& t : tensors()) n += t.size;
        return n;
    }

    std::vector<double> flatten() {
        std::vector<double> flat;
        flat.reserve(parameter_count());
        for (const auto& t : tensors()) flat.insert(flat.end(), t.data, t.data + t.size);
        return flat;
    }

    void set_from_flat(const std::vector<double>& flat) {
        std::size_t off = 0;
        for (auto& t : tensors()) {
            for (std::size_t i = 0; i < t.size; ++i) t.data[i] = flat[off + i];
            off += t.size;
        }
        if (off != flat.size()) throw ShapeMismatch("assignor flat parameter size mismatch");
    }
};

// Gradient holder with the same tensor layout as AssignorParams.
struct AssignorGrads {
    AssignorParams g;  // reuse the layout; values are gradients

    AssignorGrads(std::size_t d, std::size_t h) : g(d, h) { g.mlp_b2 = 0.0; }

    std::vector<TensorRef> tensors() { return g.tensors(); }
    std::vector<double> flatten() { return g.flatten(); }
};

// Posterior over intermediate weights: one Gaussian mean per cell, shared
// variance equal to the prior variance.
struct PosteriorParams {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> mean;  // row-major
    double variance = 1.0;

    double mean_at(std::size_t m, std::size_t n) const { return mean[m * cols + n]; }
};

struct AssignorCache {
    std::size_t rows = 0, cols = 0;
    std::vector<Mat> row_inputs, col_inputs;          // lifted sequences
    std::vector<AttentionCache> row_caches, col_caches;
    std::vector<std::vector<double>> z_row, z_col;    // pooled embeddings
    std::vector<double> mlp_pre;                      // (rows*cols) x h pre-activations
    std::vector<double> posterior_mean;
};

namespace detail {

inline void lift_cell(const AssignorParams& p, double prob, double* out) {
    for (std::size_t i = 0; i < p.embed_dim; ++i)
        out[i] = prob * p.lift_scale[i] + p.lift_shift[i];
}

}  // namespace detail

inline PosteriorParams infer_posterior(const PredictionMatrix& pm, const AssignorParams& params,
                                       double posterior_variance, AssignorCache* cache_out = nullptr) {
    const std::size_t rows = pm.detector_count();
    const std::size_t cols = pm.sample_count();
    const std::size_t d = params.embed_dim;
    const std::size_t h = params.hidden_dim;

    AssignorCache local;
    AssignorCache& cache = cache_out ? *cache_out : local;
    cache.rows = rows;
    cache.cols = cols;

    cache.row_inputs.assign(rows, Mat(cols, d));
    cache.col_inputs.assign(cols, Mat(rows, d));
    std::vector<double> lifted(d);
    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) {
            detail::lift_cell(params, pm.at(m, n), lifted.data());
            for (std::size_t i = 0; i < d; ++i) {
                cache.row_inputs[m].at(n, i) = lifted[i];
                cache.col_inputs[n].at(m, i) = lifted[i];
            }
        }

    cache.row_caches.assign(rows, AttentionCache{});
    cache.col_caches.assign(cols, AttentionCache{});
    cache.z_row.resize(rows);
    cache.z_col.resize(cols);
    for (std::size_t m = 0; m < rows; ++m)
        cache.z_row[m] = attention_forward(params.row_block, cache.row_inputs[m], cache.row_caches[m]);
    for (std::size_t n = 0; n < cols; ++n)
        cache.z_col[n] = attention_forward(params.col_block, cache.col_inputs[n], cache.col_caches[n]);

    cache.mlp_pre.assign(rows * cols * h, 0.0);
    cache.posterior_mean.assign(rows * cols, 0.0);
    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) {
            const std::size_t cell = m * cols + n;
            double* pre = cache.mlp_pre.data() + cell * h;
            for (std::size_t j = 0; j < h; ++j) {
                double s = params.mlp_b1[j];
                for (std::size_t i = 0; i < d; ++i) {
                    s += params.mlp_w1.at(j, i) * cache.z_row[m][i];
                    s += params.mlp_w1.at(j, d + i) * cache.z_col[n][i];
                }
                pre[j] = s;
            }
            double out = params.mlp_b2;
            for (std::size_t j = 0; j < h; ++j)
                if (pre[j] > 0.0) out += params.mlp_w2[j] * pre[j];
            cache.posterior_mean[cell] = out;
        }

    for (double v : cache.posterior_mean)
        if (!std::isfinite(v)) throw NonFiniteActivation("posterior mean is not finite");

    PosteriorParams post;
    post.rows = rows;
    post.cols = cols;
    post.variance = posterior_variance;
    post.mean = cache.posterior_mean;
    return post;
}

// Backpropagates d(loss)/d(posterior mean) into parameter gradients.
inline void assignor_backward(const AssignorParams& params, const AssignorCache& cache,
                              const PredictionMatrix& pm, const std::vector<double>& d_mean,
                              AssignorGrads& grads) {
    const std::size_t rows = cache.rows;
    const std::size_t cols = cache.cols;
    const std::size_t d = params.embed_dim;
    const std::size_t h = params.hidden_dim;

    std::vector<std::vector<double>> dz_row(rows, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> dz_col(cols, std::vector<double>(d, 0.0));

    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) {
            const std::size_t cell = m * cols + n;
            const double dout = d_mean[cell];
            if (dout == 0.0) continue;
            const double* pre = cache.mlp_pre.data() + cell * h;
            grads.g.mlp_b2 += dout;
            for (std::size_t j = 0; j < h; ++j) {
                if (pre[j] <= 0.0) continue;
                grads.g.mlp_w2[j] += dout * pre[j];
                const double dpre = dout * params.mlp_w2[j];
                grads.g.mlp_b1[j] += dpre;
                for (std::size_t i = 0; i < d; ++i) {
                    grads.g.mlp_w1.at(j, i) += dpre * cache.z_row[m][i];
                    grads.g.mlp_w1.at(j, d + i) += dpre * cache.z_col[n][i];
                    dz_row[m][i] += dpre * params.mlp_w1.at(j, i);
                    dz_col[n][i] += dpre * params.mlp_w1.at(j, d + i);
                }
            }
        }

    AttentionGrads row_grads(d), col_grads(d);
    std::vector<double> d_lift_scale(d, 0.0), d_lift_shift(d, 0.0);

    for (std::size_t m = 0; m < rows; ++m) {
        const Mat dx = attention_backward(params.row_block, cache.row_caches[m], dz_row[m], row_grads);
        for (std::size_t n = 0; n < cols; ++n) {
            const double prob = pm.at(m, n);
            for (std::size_t i = 0; i < d; ++i) {
                d_lift_scale[i] += prob * dx.at(n, i);
                d_lift_shift[i] += dx.at(n, i);
            }
        }
    }
    for (std::size_t n = 0; n < cols; ++n) {
        const Mat dx = attention_backward(params.col_block, cache.col_caches[n], dz_col[n], col_grads);
        for (std::size_t m = 0; m < rows; ++m) {
            const double prob = pm.at(m, n);
            for (std::size_t i = 0; i < d; ++i) {
                d_lift_scale[i] += prob * dx.at(m, i);
                d_lift_shift[i] += dx.at(m, i);
            }
        }
    }

    for (std::size_t i = 0; i < d; ++i) {
        grads.g.lift_scale[i] += d_lift_scale[i];
        grads.g.lift_shift[i] += d_lift_shift[i];
    }
    for (std::size_t i = 0; i < d * d; ++i) {
        grads.g.row_block.wq.a[i] += row_grads.wq.a[i];
        grads.g.row_block.wk.a[i] += row_grads.wk.a[i];
        grads.g.row_block.wv.a[i] += row_grads.wv.a[i];
        grads.g.row_block.wo.a[i] += row_grads.wo.a[i];
        grads.g.col_block.wq.a[i] += col_grads.wq.a[i];
        grads.g.col_block.wk.a[i] += col_grads.wk.a[i];
        grads.g.col_block.wv.a[i] += col_grads.wv.a[i];
        grads.g.col_block.wo.a[i] += col_grads.wo.a[i];
    }
}

// ---------------------------------------------------------------------------
// Sampling, KL, ELBO

// Intermediate weights from explicit standard-normal noise, one value per cell.
inline WeightMatrix sample_weights(const PosteriorParams& post, const std::vector<double>& noise) {
    if (noise.size() != post.mean.size())
        throw ShapeMismatch("noise grid does not match posterior shape");
    const double sigma = std::sqrt(post.variance);
    std::vector<double> w(post.mean.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(post.mean[i] + sigma * noise[i]);
    return WeightMatrix(post.rows, post.cols, std::move(w));
}

inline WeightMatrix sample_weights(const PosteriorParams& post, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> noise(post.mean.size());
    for (double& v : noise) v = rng.normal();
    return sample_weights(post, noise);
}

// Cell-wise expected intermediate weights exp(mean + variance/2).
inline WeightMatrix expected_weights(const PosteriorParams& post) {
    std::vector<double> w(post.mean.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::exp(post.mean[i] + 0.5 * post.variance);
    return WeightMatrix(post.rows, post.cols, std::move(w));
}

// KL between two log-normals; equals the KL of the underlying Gaussians.
inline double kl_lognormal(const LogNormalParams& q, const LogNormalParams& p) {
    if (!(q.variance > 0.0) || !(p.variance > 0.0))
        throw ValidationError("log-normal KL needs positive variances");
    const double dm = q.mean - p.mean;
    return 0.5 * std::log(p.variance / q.variance) +
           (q.variance + dm * dm) / (2.0 * p.variance) - 0.5;
}

inline double kl_to_prior_total(const PosteriorParams& post, const PriorGrid& prior) {
    if (post.mean.size() != prior.mean.size())
        throw ShapeMismatch("posterior and prior grids differ in shape");
    double total = 0.0;
    for (std::size_t i = 0; i < post.mean.size(); ++i)
        total += kl_lognormal({post.mean[i], post.variance}, {prior.mean[i], prior.variance});
    return total;
}

struct ElboResult {
    double elbo = 0.0;
    double mean_log_likelihood = 0.0;
    double kl_total = 0.0;
};

// K-sample reparameterized ELBO estimate under noise drawn once from `seed`.
// If d_neg_elbo_d_mean is given, it receives the exact gradient of -ELBO with
// respect to each posterior mean under that fixed noise.
inline ElboResult elbo_from_posterior(const PredictionMatrix& pm, int label,
                                      const PosteriorParams& post, const PriorGrid& prior,
                                      std::size_t k_samples, std::uint64_t seed,
                                      std::vector<double>* d_neg_elbo_d_mean = nullptr) {
    if (k_samples < 1) throw ValidationError("ELBO needs at least one sample");
    const std::size_t cells = post.mean.size();
    const double sigma = std::sqrt(post.variance);
    const double y = static_cast<double>(label);

    Rng rng(derive_seed_str(seed, "elbo-noise"));
    if (d_neg_elbo_d_mean) d_neg_elbo_d_mean->assign(cells, 0.0);

    std::vector<double> raw(cells);
    double loglik_sum = 0.0;
    const auto& probs = pm.values();
    for (std::size_t k = 0; k < k_samples; ++k) {
        double total = 0.0;
        double dot = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            raw[i] = std::exp(post.mean[i] + sigma * rng.normal());
            total += raw[i];
            dot += raw[i] * probs[i];
        }
        if (!(total > 0.0) || !std::isfinite(total))
            throw NonFiniteActivation("reparameterized weights overflowed");
        const double p_bar = dot / total;
        const double p_clamped = clamp_probability(p_bar);
        loglik_sum += y * std::log(p_clamped) + (1.0 - y) * std::log(1.0 - p_clamped);

        if (d_neg_elbo_d_mean) {
            const bool interior = (p_bar > 1e-7 && p_bar < 1.0 - 1e-7);
            if (interior) {
                const double dll_dp = y / p_clamped - (1.0 - y) / (1.0 - p_clamped);
                const double coeff = -dll_dp / (static_cast<double>(k_samples) * total);
                for (std::size_t i = 0; i < cells; ++i)
                    (*d_neg_elbo_d_mean)[i] += coeff * raw[i] * (probs[i] - p_bar);
            }
        }
    }

    ElboResult res;
    res.mean_log_likelihood = loglik_sum / static_cast<double>(k_samples);
    res.kl_total = kl_to_prior_total(post, prior);
    res.elbo = res.mean_log_likelihood - res.kl_total;

    if (d_neg_elbo_d_mean) {
        for (std::size_t i = 0; i < cells; ++i)
            (*d_neg_elbo_d_mean)[i] += (post.mean[i] - prior.mean[i]) / prior.variance;
    }
    return res;
}

inline double elbo(const PredictionMatrix& pm, int label, const AssignorParams& params,
                   const PriorGrid& prior, std::size_t k_samples, std::uint64_t seed) {
    const PosteriorParams post = infer_posterior(pm, params, prior.variance);
    return elbo_from_posterior(pm, label, post, prior, k_samples, seed).elbo;
}

// Exact gradient of -ELBO with respect to every assignor parameter, for one
// (matrix, label) instance under fixed noise. Returns the forward ELBO too.
inline ElboResult assignor_gradients(const PredictionMatrix& pm, int label,
                                     const AssignorParams& params, const PriorGrid& prior,
                                     std::size_t k_samples, std::uint64_t seed,
                                     AssignorGrads& grads) {
    AssignorCache cache;
    const PosteriorParams post = infer_posterior(pm, params, prior.variance, &cache);
    std::vector<double> d_mean;
    const ElboResult res =
        elbo_from_posterior(pm, label, post, prior, k_samples, seed, &d_mean);
    assignor_backward(params, cache, pm, d_mean, grads);
    return res;
}

}  // namespace robustens
