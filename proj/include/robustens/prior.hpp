#pragma once

// Variance-based log-normal prior over intermediate weights. Column variance
// penalizes hard-to-predict samples, row variance penalizes erratic detectors;
// the per-cell prior mean is the sum of the two exponential penalties.

#include <cmath>
#include <vector>

#include "robustens/common.hpp"
#include "robustens/matrix.hpp"

namespace robustens {

struct PriorConfig {
    double alpha = 1.0;    // column-variance penalty strength
    double beta = 1.0;     // row-variance penalty strength
    double var_dt = 0.5;   // Gaussian variance of the detector factor
    double var_sp = 0.5;   // Gaussian variance of the sample factor

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw ValidationError("prior penalties alpha/beta must be positive");
        if (!(var_dt > 0.0) || !(var_sp > 0.0))
            throw ValidationError("prior variances must be positive");
    }

    double cell_variance() const { return var_dt + var_sp; }
};

// Parameters of the Gaussian underlying a log-normal weight distribution.
struct LogNormalParams {
    double mean = 0.0;
    double variance = 1.0;
};

// Expected value of the log-normal itself.
inline double lognormal_mean(const LogNormalParams& p) {
    return std::exp(p.mean + 0.5 * p.variance);
}

struct PriorMeanComponents {
    std::vector<double> per_column;  // exp(-alpha * col_var), one per sample
    std::vector<double> per_row;     // exp(-beta * row_var), one per detector
};

inline PriorMeanComponents prior_mean_components(const MatrixStats& stats, const PriorConfig& cfg) {
    cfg.validate();
    PriorMeanComponents out;
    out.per_column.reserve(stats.col_var.size());
    out.per_row.reserve(stats.row_var.size());
    for (double v : stats.col_var) out.per_column.push_back(std::exp(-cfg.alpha * v));
    for (double v : stats.row_var) out.per_row.push_back(std::exp(-cfg.beta * v));
    return out;
}

// One log-normal per cell: mean_{m,n} = row component + column component,
// variance shared across all cells. Reads only the matrix, never a label.
struct PriorGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> mean;  // row-major, rows*cols
    double variance = 1.0;

    double mean_at(std::size_t m, std::size_t n) const { return mean[m * cols + n]; }
};

inline PriorGrid build_prior(const PredictionMatrix& p, const PriorConfig& cfg) {
    cfg.validate();
    const auto col_var = column_variances(p);
    const auto row_var = row_variances(p);
    PriorGrid grid;
    grid.rows = p.detector_count();
    grid.cols = p.sample_count();
    grid.variance = cfg.cell_variance();
    grid.mean.resize(grid.rows * grid.cols);
    for (std::size_t m = 0; m < grid.rows; ++m) {
        const double row_part = std::exp(-cfg.beta * row_var[m]);
        for (std::size_t n = 0; n < grid.cols; ++n) {
            grid.mean[m * grid.cols + n] = row_part + std::exp(-cfg.alpha * col_var[n]);
        }
    }
    return grid;
}

}  // namespace robustens
