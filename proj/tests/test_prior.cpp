#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "robustens/matrix.hpp"
#include "robustens/prior.hpp"

using namespace robustens;

TEST_CASE("prior mean components follow the exponential penalties") {
    PriorConfig cfg;
    MatrixStats stats;
    stats.col_var = {0.0, std::log(2.0)};
    stats.row_var = {0.25};
    cfg.alpha = 1.0;
    cfg.beta = 2.0;
    const auto comps = prior_mean_components(stats, cfg);
    CHECK(comps.per_column[0] == Catch::Approx(1.0).margin(1e-15));
    CHECK(comps.per_column[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(comps.per_row[0] == Catch::Approx(std::exp(-0.5)).margin(1e-12));
}

TEST_CASE("constant matrix gives the maximal prior mean everywhere") {
    const auto p = PredictionMatrix::from_rows({{0.4, 0.4, 0.4}, {0.4, 0.4, 0.4}});
    const auto grid = build_prior(p, PriorConfig{});
    for (double m : grid.mean) CHECK(m == Catch::Approx(2.0).margin(1e-12));
    CHECK(grid.variance == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("a noisy column is penalized against the rest") {
    // column 1 carries all the disagreement
    const auto p = PredictionMatrix::from_rows({{0.5, 0.1, 0.5}, {0.5, 0.9, 0.5}});
    const auto grid = build_prior(p, PriorConfig{});
    for (std::size_t m = 0; m < grid.rows; ++m) {
        CHECK(grid.mean_at(m, 1) < grid.mean_at(m, 0));
        CHECK(grid.mean_at(m, 1) < grid.mean_at(m, 2));
    }
}

TEST_CASE("hand-computed 2x2 prior") {
    // rows [0.2, 0.4]: row variance 0.01 each; both columns constant
    const auto p = PredictionMatrix::from_rows({{0.2, 0.4}, {0.2, 0.4}});
    PriorConfig cfg;  // alpha = beta = 1
    const auto grid = build_prior(p, cfg);
    const double expected = 1.0 + std::exp(-0.01);
    for (double m : grid.mean) CHECK(m == Catch::Approx(expected).margin(1e-12));
    CHECK(expected == Catch::Approx(1.99005).margin(5e-6));
}

TEST_CASE("prior never reads the label") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> values(12);
        for (double& v : values) v = rng.uniform01();
        const PredictionMatrix p(3, 3, values);
        const auto grid = build_prior(p, PriorConfig{});
        // same matrix, any label context: build_prior has no label argument and
        // its output is a pure function of the matrix
        const auto again = build_prior(p, PriorConfig{});
        CHECK(grid.mean == again.mean);
    }
}

TEST_CASE("monotone penalty in a single column variance") {
    PriorConfig cfg;
    // increase the spread of column 0 while holding the others fixed
    const auto low = PredictionMatrix::from_rows({{0.45, 0.3}, {0.55, 0.3}});
    const auto high = PredictionMatrix::from_rows({{0.2, 0.3}, {0.8, 0.3}});
    const auto grid_low = build_prior(low, cfg);
    const auto grid_high = build_prior(high, cfg);
    for (std::size_t m = 0; m < 2; ++m)
        CHECK(grid_high.mean_at(m, 0) < grid_low.mean_at(m, 0));
}

TEST_CASE("expected prior weight is finite and positive") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> values(8);
        for (double& v : values) v = rng.uniform01();
        const PredictionMatrix p(2, 3, values);
        const auto grid = build_prior(p, PriorConfig{});
        for (double m : grid.mean) {
            const double ev = lognormal_mean({m, grid.variance});
            CHECK(std::isfinite(ev));
            CHECK(ev > 0.0);
        }
    }
}

TEST_CASE("prior config validation") {
    PriorConfig bad;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    PriorConfig bad2;
    bad2.var_dt = -0.1;
    CHECK_THROWS_AS(bad2.validate(), ValidationError);
}
