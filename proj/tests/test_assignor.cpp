#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "robustens/assignor.hpp"
#include "robustens/matrix.hpp"
#include "robustens/prior.hpp"

using namespace robustens;

namespace {

PredictionMatrix seeded_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    Rng rng(seed);
    std::vector<double> values(rows * cols);
    for (double& v : values) v = 0.05 + 0.9 * rng.uniform01();
    return PredictionMatrix(rows, cols - 1, std::move(values));
}

AssignorParams small_params(std::uint64_t seed) {
    AssignorConfig cfg;
    cfg.embed_dim = 4;
    cfg.hidden_dim = 8;
    return AssignorParams::init(cfg, seed);
}

}  // namespace

TEST_CASE("posterior grid matches the input shape and keeps the prior variance") {
    const auto p = seeded_matrix(3, 3, 5);
    auto params = small_params(1);
    const auto prior = build_prior(p, PriorConfig{});
    const auto post = infer_posterior(p, params, prior.variance);
    CHECK(post.rows == 3);
    CHECK(post.cols == 5);
    CHECK(post.mean.size() == 15);
    CHECK(post.variance == prior.variance);
}

TEST_CASE("permuting columns permutes the posterior columns identically") {
    const std::size_t rows = 3, cols = 4;
    const auto p = seeded_matrix(17, rows, cols);
    auto params = small_params(2);
    const auto post = infer_posterior(p, params, 1.0);

    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<double> permuted(rows * cols);
    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) permuted[m * cols + n] = p.at(m, perm[n]);
    const PredictionMatrix p2(rows, cols - 1, permuted);
    const auto post2 = infer_posterior(p2, params, 1.0);

    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n)
            CHECK(std::abs(post2.mean_at(m, n) - post.mean_at(m, perm[n])) < 1e-12);
}

TEST_CASE("permuting rows permutes the posterior rows identically") {
    const std::size_t rows = 4, cols = 3;
    const auto p = seeded_matrix(19, rows, cols);
    auto params = small_params(3);
    const auto post = infer_posterior(p, params, 1.0);

    const std::vector<std::size_t> perm{3, 1, 0, 2};
    std::vector<double> permuted(rows * cols);
    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) permuted[m * cols + n] = p.at(perm[m], n);
    const PredictionMatrix p2(rows, cols - 1, permuted);
    const auto post2 = infer_posterior(p2, params, 1.0);

    for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n)
            CHECK(std::abs(post2.mean_at(m, n) - post.mean_at(perm[m], n)) < 1e-12);
}

TEST_CASE("non-finite parameters are reported") {
    const auto p = seeded_matrix(29, 2, 3);
    auto params = small_params(4);
    params.mlp_b2 = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(infer_posterior(p, params, 1.0), NonFiniteActivation);
}

TEST_CASE("reparameterized sampling") {
    PosteriorParams post;
    post.rows = 1;
    post.cols = 2;
    post.variance = 1.0;
    post.mean = {0.0, 0.3};

    const auto at_zero = sample_weights(post, std::vector<double>{0.0, 0.0});
    CHECK(at_zero.at(0, 0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(at_zero.at(0, 1) == Catch::Approx(std::exp(0.3)).margin(1e-12));

    const auto at_one = sample_weights(post, std::vector<double>{1.0, 1.0});
    CHECK(at_one.at(0, 0) == Catch::Approx(std::exp(1.0)).margin(1e-12));

    CHECK_THROWS_AS(sample_weights(post, std::vector<double>{0.0}), ShapeMismatch);
}

TEST_CASE("sampled weights match the log-normal mean over many draws") {
    Rng rng(99);
    const std::size_t draws = 1'000'000;
    double sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) sum += std::exp(0.3 + rng.normal());
    const double mc_mean = sum / static_cast<double>(draws);
    const double expected = std::exp(0.8);  // exp(mu + var/2)
    CHECK(std::abs(mc_mean - expected) / expected < 0.01);
    CHECK(lognormal_mean({0.3, 1.0}) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("log-normal KL closed form") {
    CHECK(kl_lognormal({0.7, 0.9}, {0.7, 0.9}) == 0.0);
    CHECK(kl_lognormal({1.0, 1.0}, {0.0, 1.0}) == Catch::Approx(0.5).margin(1e-12));
    const double expected = 0.5 * std::log(2.0) + 0.25 - 0.5;
    CHECK(kl_lognormal({0.0, 1.0}, {0.0, 2.0}) == Catch::Approx(expected).margin(1e-12));
    CHECK(expected == Catch::Approx(0.09657).margin(5e-6));
}

TEST_CASE("KL is non-negative and zero only at equality") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const LogNormalParams q{rng.uniform(-2.0, 2.0), 0.1 + rng.uniform01()};
        const LogNormalParams p{rng.uniform(-2.0, 2.0), 0.1 + rng.uniform01()};
        const double kl = kl_lognormal(q, p);
        CHECK(kl >= 0.0);
        if (std::abs(q.mean - p.mean) > 1e-3 || std::abs(q.variance - p.variance) > 1e-3)
            CHECK(kl > 0.0);
    }
}

TEST_CASE("KL agrees with a Monte-Carlo estimate") {
    Rng rng(321);
    for (int trial = 0; trial < 5; ++trial) {
        const LogNormalParams q{rng.uniform(-1.0, 1.0), 0.3 + rng.uniform01()};
        const LogNormalParams p{rng.uniform(-1.0, 1.0), 0.3 + rng.uniform01()};
        const double closed = kl_lognormal(q, p);

        const std::size_t draws = 400'000;
        const double sq = std::sqrt(q.variance);
        double sum = 0.0;
        for (std::size_t i = 0; i < draws; ++i) {
            const double lw = q.mean + sq * rng.normal();  // log of the draw
            const double dq = (lw - q.mean) * (lw - q.mean) / (2.0 * q.variance);
            const double dp = (lw - p.mean) * (lw - p.mean) / (2.0 * p.variance);
            sum += 0.5 * std::log(p.variance / q.variance) + dp - dq;
        }
        const double mc = sum / static_cast<double>(draws);
        CHECK(std::abs(mc - closed) < 1e-2);
    }
}

TEST_CASE("single-cell ELBO with posterior equal to prior is the log likelihood") {
    const PredictionMatrix p(1, 0, {0.8});
    const PriorGrid prior = build_prior(p, PriorConfig{});
    PosteriorParams post;
    post.rows = 1;
    post.cols = 1;
    post.variance = prior.variance;
    post.mean = prior.mean;
    const auto res = elbo_from_posterior(p, 1, post, prior, 64, 7);
    CHECK(res.kl_total == Catch::Approx(0.0).margin(1e-15));
    CHECK(res.elbo == Catch::Approx(std::log(0.8)).margin(1e-12));
    CHECK(std::log(0.8) == Catch::Approx(-0.22314).margin(5e-6));
}

TEST_CASE("ELBO is never positive for binary labels") {
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = seeded_matrix(1000 + trial, 2, 3);
        auto params = small_params(500 + trial);
        const auto prior = build_prior(p, PriorConfig{});
        for (int label : {0, 1})
            CHECK(elbo(p, label, params, prior, 16, trial) <= 0.0);
    }
}

TEST_CASE("ELBO lower-bounds the Monte-Carlo marginal log-likelihood") {
    const auto p = seeded_matrix(77, 2, 2);
    auto params = small_params(78);
    const auto prior = build_prior(p, PriorConfig{});
    const int label = 1;

    const PosteriorParams post = infer_posterior(p, params, prior.variance);
    const double res_elbo = elbo_from_posterior(p, label, post, prior, 100'000, 4242).elbo;

    // brute-force marginal over the prior on the 2x2 grid
    Rng rng(4243);
    const std::size_t draws = 200'000;
    const double sigma = std::sqrt(prior.variance);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        double total = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < prior.mean.size(); ++i) {
            const double w = std::exp(prior.mean[i] + sigma * rng.normal());
            total += w;
            dot += w * p.values()[i];
        }
        const double p_bar = clamp_probability(dot / total);
        const double lik = label == 1 ? p_bar : 1.0 - p_bar;
        sum += lik;
        sum_sq += lik * lik;
    }
    const double mean = sum / static_cast<double>(draws);
    const double var = sum_sq / static_cast<double>(draws) - mean * mean;
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(draws));
    const double log_marginal = std::log(mean);
    const double se_log = se / mean;

    CHECK(res_elbo <= log_marginal + 3.0 * se_log + 1e-6);
}

namespace {

double neg_elbo_value(const PredictionMatrix& p, int label, const AssignorParams& params,
                      const PriorGrid& prior, std::size_t k, std::uint64_t seed) {
    return -elbo(p, label, params, prior, k, seed);
}

}  // namespace

TEST_CASE("assignor gradients match central finite differences for every tensor") {
    const auto p = seeded_matrix(2024, 3, 4);
    auto params = small_params(11);
    const auto prior = build_prior(p, PriorConfig{});
    const int label = 1;
    const std::size_t k = 8;
    const std::uint64_t seed = 31337;

    AssignorGrads grads(params.embed_dim, params.hidden_dim);
    assignor_gradients(p, label, params, prior, k, seed, grads);
    const auto analytic = grads.flatten();

    const double h = 1e-5;
    std::size_t offset = 0;
    for (auto& tensor : params.tensors()) {
        for (std::size_t i = 0; i < tensor.size; ++i) {
            const double saved = tensor.data[i];
            tensor.data[i] = saved + h;
            const double up = neg_elbo_value(p, label, params, prior, k, seed);
            tensor.data[i] = saved - h;
            const double down = neg_elbo_value(p, label, params, prior, k, seed);
            tensor.data[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = analytic[offset + i];
            const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4});
            INFO(tensor.name << "[" << i << "] fd=" << fd << " analytic=" << an);
            CHECK(rel <= 1e-4);
        }
        offset += tensor.size;
    }
}

TEST_CASE("a uniform shift of the posterior mean only moves the KL term") {
    // Normalization cancels a constant added to every cell mean, so the
    // likelihood part contributes nothing to the summed derivative; the total
    // must equal the analytic KL derivative alone.
    const auto p = seeded_matrix(91, 3, 3);
    auto params = small_params(12);
    const auto prior = build_prior(p, PriorConfig{});

    const auto post = infer_posterior(p, params, prior.variance);
    std::vector<double> d_mean;
    elbo_from_posterior(p, 1, post, prior, 32, 9, &d_mean);

    double total = 0.0, kl_only = 0.0;
    for (std::size_t i = 0; i < d_mean.size(); ++i) {
        total += d_mean[i];
        kl_only += (post.mean[i] - prior.mean[i]) / prior.variance;
    }
    CHECK(std::abs(total - kl_only) < 1e-9);
}

TEST_CASE("gradients are deterministic given the seed") {
    const auto p = seeded_matrix(404, 2, 4);
    auto params = small_params(13);
    const auto prior = build_prior(p, PriorConfig{});

    AssignorGrads g1(params.embed_dim, params.hidden_dim);
    AssignorGrads g2(params.embed_dim, params.hidden_dim);
    assignor_gradients(p, 0, params, prior, 16, 777, g1);
    assignor_gradients(p, 0, params, prior, 16, 777, g2);
    CHECK(g1.flatten() == g2.flatten());

    AssignorGrads g3(params.embed_dim, params.hidden_dim);
    assignor_gradients(p, 0, params, prior, 16, 778, g3);
    CHECK(g1.flatten() != g3.flatten());
}

TEST_CASE("parameter flatten/unflatten round trip") {
    auto params = small_params(21);
    const auto flat = params.flatten();
    AssignorParams other(params.embed_dim, params.hidden_dim);
    other.set_from_flat(flat);
    CHECK(other.flatten() == flat);
}
