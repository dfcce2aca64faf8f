#include <catch2/catch_amalgamated.hpp>

#include "robustens/matrix.hpp"

using namespace robustens;

namespace {

PredictionMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    std::vector<double> values(rows * cols);
    for (double& v : values) v = rng.uniform01();
    return PredictionMatrix(rows, cols - 1, std::move(values));
}

}  // namespace

TEST_CASE("uniform aggregation averages the grid") {
    CHECK(aggregate_uniform(PredictionMatrix::from_rows({{0.2, 0.4}, {0.6, 0.8}})) ==
          Catch::Approx(0.5).margin(1e-15));
    CHECK(aggregate_uniform(PredictionMatrix::from_rows({{0.7, 0.7}, {0.7, 0.7}})) ==
          Catch::Approx(0.7).margin(1e-15));
    CHECK(aggregate_uniform(PredictionMatrix::from_rows({{0.3}})) == Catch::Approx(0.3).margin(1e-15));
}

TEST_CASE("classification thresholds with equality falling to non-harmful") {
    const DecisionConfig cfg{0.5};
    CHECK(classify(0.6, cfg) == 1);
    CHECK(classify(0.5, cfg) == 0);  // boundary goes to label 0
    CHECK(classify(0.2, cfg) == 0);
}

TEST_CASE("classification is monotone in the aggregate") {
    const DecisionConfig cfg{0.37};
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform01();
        const double b = rng.uniform01();
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(classify(lo, cfg) <= classify(hi, cfg));
    }
}

TEST_CASE("weight normalization") {
    const auto uniform = normalize_weights(WeightMatrix(2, 2, {1, 1, 1, 1}));
    for (double v : uniform.values()) CHECK(v == Catch::Approx(0.25).margin(1e-15));

    const auto point = normalize_weights(WeightMatrix(2, 2, {2, 0, 0, 0}));
    CHECK(point.at(0, 0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(point.at(1, 1) == 0.0);

    const auto pair = normalize_weights(WeightMatrix(1, 2, {1, 3}));
    CHECK(pair.at(0, 0) == Catch::Approx(0.25).margin(1e-15));
    CHECK(pair.at(0, 1) == Catch::Approx(0.75).margin(1e-15));

    CHECK(pair.normalized());
    CHECK_THROWS_AS(normalize_weights(WeightMatrix(2, 2, {0, 0, 0, 0})), AllZeroWeights);
}

TEST_CASE("weighted aggregation") {
    const auto p = PredictionMatrix::from_rows({{0.2, 0.8}});
    CHECK(aggregate_weighted(p, WeightMatrix(1, 2, {0.5, 0.5})) == Catch::Approx(0.5).margin(1e-15));
    CHECK(aggregate_weighted(PredictionMatrix::from_rows({{0.3, 0.9}}), WeightMatrix(1, 2, {1, 0})) ==
          Catch::Approx(0.3).margin(1e-15));
    CHECK_THROWS_AS(aggregate_weighted(p, WeightMatrix(2, 2, {0.25, 0.25, 0.25, 0.25})),
                    ShapeMismatch);
}

TEST_CASE("uniform weights reproduce uniform aggregation") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 1 + rng.uniform_index(5);
        const std::size_t cols = 1 + rng.uniform_index(7);
        const auto p = random_matrix(rng, rows, cols);
        const WeightMatrix w(rows, cols,
                             std::vector<double>(rows * cols, 1.0 / static_cast<double>(rows * cols)));
        CHECK(std::abs(aggregate_weighted(p, w) - aggregate_uniform(p)) < 1e-12);
    }
}

TEST_CASE("matrix stats on hand examples") {
    // column [0.2, 0.4] with label 1
    const auto p = PredictionMatrix::from_rows({{0.2}, {0.4}});
    const auto s = matrix_stats(p, 1);
    CHECK(s.col_mean[0] == Catch::Approx(0.3).margin(1e-15));
    CHECK(s.col_var[0] == Catch::Approx(0.01).margin(1e-15));
    CHECK(s.col_brier[0] == Catch::Approx(0.5).margin(1e-15));

    // constant column
    const auto c = PredictionMatrix::from_rows({{0.6}, {0.6}, {0.6}});
    const auto cs = matrix_stats(c, 0);
    CHECK(cs.col_var[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(cs.col_brier[0] == Catch::Approx(0.36).margin(1e-12));
}

TEST_CASE("brier decomposes into variance plus squared bias everywhere") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_matrix(rng, 5, 7);
        for (int label : {0, 1}) {
            const auto s = matrix_stats(p, label);
            const double y = label;
            for (std::size_t n = 0; n < p.sample_count(); ++n) {
                const double expect = s.col_var[n] + (s.col_mean[n] - y) * (s.col_mean[n] - y);
                CHECK(std::abs(s.col_brier[n] - expect) < 1e-12);
            }
            for (std::size_t m = 0; m < p.detector_count(); ++m) {
                const double expect = s.row_var[m] + (s.row_mean[m] - y) * (s.row_mean[m] - y);
                CHECK(std::abs(s.row_brier[m] - expect) < 1e-12);
            }
        }
    }
}

TEST_CASE("marginals") {
    const auto uniform = normalize_weights(WeightMatrix(2, 2, {1, 1, 1, 1}));
    const auto mu = marginals(uniform);
    CHECK(mu.per_row[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(mu.per_column[1] == Catch::Approx(0.5).margin(1e-15));

    const auto w = WeightMatrix(2, 2, {0.5, 0.0, 0.25, 0.25});
    const auto m = marginals(w);
    CHECK(m.per_row[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(m.per_row[1] == Catch::Approx(0.5).margin(1e-15));
    CHECK(m.per_column[0] == Catch::Approx(0.75).margin(1e-15));
    CHECK(m.per_column[1] == Catch::Approx(0.25).margin(1e-15));

    double row_total = 0.0, col_total = 0.0;
    for (double v : m.per_row) row_total += v;
    for (double v : m.per_column) col_total += v;
    CHECK(row_total == Catch::Approx(1.0).margin(1e-12));
    CHECK(col_total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("outer-product weights factor into their marginals") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 2 + rng.uniform_index(4);
        const std::size_t cols = 2 + rng.uniform_index(5);
        std::vector<double> a(rows), b(cols);
        double sa = 0.0, sb = 0.0;
        for (double& v : a) sa += (v = 0.05 + rng.uniform01());
        for (double& v : b) sb += (v = 0.05 + rng.uniform01());
        for (double& v : a) v /= sa;
        for (double& v : b) v /= sb;

        std::vector<double> cells(rows * cols);
        for (std::size_t m = 0; m < rows; ++m)
            for (std::size_t n = 0; n < cols; ++n) cells[m * cols + n] = a[m] * b[n];
        const auto w = normalize_weights(WeightMatrix(rows, cols, cells));
        const auto marg = marginals(w);
        for (std::size_t m = 0; m < rows; ++m)
            for (std::size_t n = 0; n < cols; ++n)
                CHECK(std::abs(w.at(m, n) - marg.per_row[m] * marg.per_column[n]) < 1e-12);
    }
}

TEST_CASE("decision is invariant to positive rescaling of raw weights") {
    Rng rng(37);
    const DecisionConfig cfg{0.5};
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_matrix(rng, 3, 4);
        std::vector<double> raw(12);
        for (double& v : raw) v = rng.uniform01() + 1e-3;
        const double scale = 0.1 + 10.0 * rng.uniform01();
        std::vector<double> scaled = raw;
        for (double& v : scaled) v *= scale;

        const double p1 = aggregate_weighted(p, normalize_weights(WeightMatrix(3, 4, raw)));
        const double p2 = aggregate_weighted(p, normalize_weights(WeightMatrix(3, 4, scaled)));
        CHECK(std::abs(p1 - p2) < 1e-12);
        CHECK(classify(p1, cfg) == classify(p2, cfg));
    }
}

TEST_CASE("prediction matrix rejects bad input") {
    CHECK_THROWS_AS(PredictionMatrix(1, 0, {1.5}), ValidationError);
    CHECK_THROWS_AS(PredictionMatrix(2, 1, {0.1, 0.2}), ShapeMismatch);
    CHECK_THROWS_AS(PredictionMatrix::from_rows({{0.1, 0.2}, {0.3}}), ShapeMismatch);
}
