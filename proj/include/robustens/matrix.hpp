#pragma once

// Prediction-matrix arithmetic: aggregation, weight normalization, thresholded
// classification, and the row/column statistics everything downstream reads.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "robustens/common.hpp"

namespace robustens {

// M x (N+1) grid of per-detector, per-sample harmfulness probabilities.
// Column 0 holds the input sample; generated samples fill columns 1..N.
// Dimensions are fixed at construction and every entry lives in [0, 1].
class PredictionMatrix {
public:
    PredictionMatrix(std::size_t detectors, std::size_t generated, std::vector<double> values)
        : rows_(detectors), cols_(generated + 1), values_(std::move(values)) {
        if (rows_ < 1) throw ValidationError("prediction matrix needs at least one detector row");
        if (values_.size() != rows_ * cols_)
            throw ShapeMismatch("prediction matrix: expected " + std::to_string(rows_ * cols_) +
                                " values, got " + std::to_string(values_.size()));
        for (double v : values_) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("prediction matrix entry outside [0,1]: " + std::to_string(v));
        }
    }

    static PredictionMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw ValidationError("prediction matrix needs at least one detector row");
        const std::size_t cols = rows.front().size();
        if (cols == 0) throw ValidationError("prediction matrix needs at least one sample column");
        std::vector<double> flat;
        flat.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) throw ShapeMismatch("prediction matrix rows have unequal lengths");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return PredictionMatrix(rows.size(), cols - 1, std::move(flat));
    }

    std::size_t detector_count() const { return rows_; }   // M
    std::size_t sample_count() const { return cols_; }     // N+1
    std::size_t generated_count() const { return cols_ - 1; }  // N

    double at(std::size_t m, std::size_t n) const { return values_[m * cols_ + n]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

// Non-negative weights over the same grid. normalized() marks a matrix whose
// entries sum to 1 (within 1e-9); ops that require it check the flag.
class WeightMatrix {
public:
    WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) throw ShapeMismatch("weight matrix: size mismatch");
        for (double v : values_) {
            if (!(v >= 0.0)) throw ValidationError("weight matrix entry negative or NaN");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t m, std::size_t n) const { return values_[m * cols_ + n]; }
    const std::vector<double>& values() const { return values_; }

    double sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    bool normalized() const { return std::abs(sum() - 1.0) <= 1e-9; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

struct DecisionConfig {
    double epsilon = 0.5;  // in (0, 1)

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw ValidationError("decision threshold must lie in (0,1)");
    }
};

// Per-column and per-row means, population variances, and Brier scores for a
// known label. Variances divide by the full count (M or N+1).
struct MatrixStats {
    std::vector<double> col_mean, col_var, col_brier;  // one per sample column
    std::vector<double> row_mean, row_var, row_brier;  // one per detector row
    int label = 0;
};

// Plain average over all M*(N+1) entries.
inline double aggregate_uniform(const PredictionMatrix& p) {
    double s = 0.0;
    for (double v : p.values()) s += v;
    return s / static_cast<double>(p.values().size());
}

// 0 when the aggregate is at or below the threshold, 1 above it.
inline int classify(double p_bar, const DecisionConfig& cfg) {
    return p_bar > cfg.epsilon ? 1 : 0;
}

inline WeightMatrix normalize_weights(const WeightMatrix& raw) {
    const double total = raw.sum();
    if (total <= 0.0) throw AllZeroWeights();
    std::vector<double> out(raw.values());
    for (double& v : out) v /= total;
    return WeightMatrix(raw.rows(), raw.cols(), std::move(out));
}

inline double aggregate_weighted(const PredictionMatrix& p, const WeightMatrix& w) {
    if (w.rows() != p.detector_count() || w.cols() != p.sample_count())
        throw ShapeMismatch("weight matrix shape does not match prediction matrix");
    double s = 0.0;
    const auto& pv = p.values();
    const auto& wv = w.values();
    for (std::size_t i = 0; i < pv.size(); ++i) s += wv[i] * pv[i];
    return s;
}

inline std::vector<double> column_means(const PredictionMatrix& p) {
    std::vector<double> out(p.sample_count(), 0.0);
    for (std::size_t m = 0; m < p.detector_count(); ++m)
        for (std::size_t n = 0; n < p.sample_count(); ++n) out[n] += p.at(m, n);
    for (double& v : out) v /= static_cast<double>(p.detector_count());
    return out;
}

inline std::vector<double> row_means(const PredictionMatrix& p) {
    std::vector<double> out(p.detector_count(), 0.0);
    for (std::size_t m = 0; m < p.detector_count(); ++m) {
        for (std::size_t n = 0; n < p.sample_count(); ++n) out[m] += p.at(m, n);
        out[m] /= static_cast<double>(p.sample_count());
    }
    return out;
}

inline std::vector<double> column_variances(const PredictionMatrix& p) {
    const auto means = column_means(p);
    std::vector<double> out(p.sample_count(), 0.0);
    for (std::size_t m = 0; m < p.detector_count(); ++m)
        for (std::size_t n = 0; n < p.sample_count(); ++n) {
            const double d = p.at(m, n) - means[n];
            out[n] += d * d;
        }
    for (double& v : out) v /= static_cast<double>(p.detector_count());
    return out;
}

inline std::vector<double> row_variances(const PredictionMatrix& p) {
    const auto means = row_means(p);
    std::vector<double> out(p.detector_count(), 0.0);
    for (std::size_t m = 0; m < p.detector_count(); ++m) {
        for (std::size_t n = 0; n < p.sample_count(); ++n) {
            const double d = p.at(m, n) - means[m];
            out[m] += d * d;
        }
        out[m] /= static_cast<double>(p.sample_count());
    }
    return out;
}

inline MatrixStats matrix_stats(const PredictionMatrix& p, int label) {
    if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
    MatrixStats s;
    s.label = label;
    s.col_mean = column_means(p);
    s.col_var = column_variances(p);
    s.row_mean = row_means(p);
    s.row_var = row_variances(p);
    s.col_brier.assign(p.sample_count(), 0.0);
    s.row_brier.assign(p.detector_count(), 0.0);
    const double y = static_cast<double>(label);
    for (std::size_t m = 0; m < p.detector_count(); ++m) {
        for (std::size_t n = 0; n < p.sample_count(); ++n) {
            const double d = p.at(m, n) - y;
            s.col_brier[n] += d * d;
            s.row_brier[m] += d * d;
        }
    }
    for (double& v : s.col_brier) v /= static_cast<double>(p.detector_count());
    for (double& v : s.row_brier) v /= static_cast<double>(p.sample_count());
    return s;
}

struct Marginals {
    std::vector<double> per_row;     // weight mass per detector
    std::vector<double> per_column;  // weight mass per sample
};

inline Marginals marginals(const WeightMatrix& w) {
    Marginals out;
    out.per_row.assign(w.rows(), 0.0);
    out.per_column.assign(w.cols(), 0.0);
    for (std::size_t m = 0; m < w.rows(); ++m)
        for (std::size_t n = 0; n < w.cols(); ++n) {
            out.per_row[m] += w.at(m, n);
            out.per_column[n] += w.at(m, n);
        }
    return out;
}

}  // namespace robustens
