#pragma once

// Desk-scale base detectors: hashed word-unigram / character-3-gram features
// feeding a logistic linear model. Detectors in an ensemble differ by hash
// seed and by which feature family they see.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "robustens/common.hpp"
#include "robustens/matrix.hpp"
#include "robustens/text.hpp"

namespace robustens {

enum class FeatureMix { words_and_chars = 0, words_only = 1, chars_only = 2 };

inline std::string feature_mix_name(FeatureMix mix) {
    switch (mix) {
        case FeatureMix::words_only: return "words";
        case FeatureMix::chars_only: return "chars";
        default: return "both";
    }
}

inline FeatureMix feature_mix_from_name(const std::string& name) {
    if (name == "words") return FeatureMix::words_only;
    if (name == "chars") return FeatureMix::chars_only;
    if (name == "both") return FeatureMix::words_and_chars;
    throw ValidationError("unknown feature mix '" + name + "'");
}

// Sparse hashed feature counts; indices < space_size, counts > 0.
struct FeatureVector {
    std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index

    double dot(const std::vector<double>& weights) const {
        double s = 0.0;
        for (const auto& [idx, count] : entries) s += weights[idx] * count;
        return s;
    }
};

struct FeatureHasher {
    std::uint64_t seed = 1;
    FeatureMix mix = FeatureMix::words_and_chars;
    std::uint32_t bits = 16;  // feature space 2^bits

    std::uint32_t space_size() const { return std::uint32_t{1} << bits; }

    std::uint32_t bucket(std::string_view payload, char family) const {
        std::uint64_t h = fnv1a64(payload, splitmix64(seed ^ static_cast<std::uint64_t>(family)));
        return static_cast<std::uint32_t>(h & (space_size() - 1));
    }

    FeatureVector featurize(std::string_view text) const {
        const std::string lowered = to_lower(trim(text));
        if (lowered.empty()) throw EmptyText();

        std::unordered_map<std::uint32_t, double> counts;
        if (mix != FeatureMix::chars_only) {
            // word unigrams: maximal alphanumeric runs
            std::size_t i = 0;
            while (i < lowered.size()) {
                while (i < lowered.size() && !std::isalnum(static_cast<unsigned char>(lowered[i]))) ++i;
                std::size_t j = i;
                while (j < lowered.size() && std::isalnum(static_cast<unsigned char>(lowered[j]))) ++j;
                if (j > i) counts[bucket(std::string_view(lowered).substr(i, j - i), 'W')] += 1.0;
                i = j;
            }
        }
        if (mix != FeatureMix::words_only) {
            // character 3-grams over the raw lowered text, spaces included
            if (lowered.size() >= 3) {
                for (std::size_t i = 0; i + 3 <= lowered.size(); ++i)
                    counts[bucket(std::string_view(lowered).substr(i, 3), 'C')] += 1.0;
            } else {
                counts[bucket(lowered, 'C')] += 1.0;
            }
        }

        FeatureVector fv;
        fv.entries.assign(counts.begin(), counts.end());
        std::sort(fv.entries.begin(), fv.entries.end());
        return fv;
    }
};

struct DetectorParams {
    std::vector<double> weights;
    double bias = 0.0;

    explicit DetectorParams(std::size_t feature_space = 0) : weights(feature_space, 0.0) {}
};

struct BaseDetector {
    FeatureHasher hasher;
    DetectorParams params;

    explicit BaseDetector(FeatureHasher h = {}) : hasher(h), params(h.space_size()) {}
};

inline double logistic(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double predict_proba(const DetectorParams& params, const FeatureVector& x) {
    return logistic(x.dot(params.weights) + params.bias);
}

inline double predict_proba(const BaseDetector& det, std::string_view text) {
    return predict_proba(det.params, det.hasher.featurize(text));
}

inline PredictionMatrix predict_matrix(const std::vector<BaseDetector>& detectors,
                                       const std::vector<std::string>& samples) {
    if (detectors.empty()) throw ValidationError("need at least one detector");
    if (samples.empty()) throw ValidationError("need at least one sample text");
    std::vector<double> values;
    values.reserve(detectors.size() * samples.size());
    for (std::size_t m = 0; m < detectors.size(); ++m) {
        for (std::size_t n = 0; n < samples.size(); ++n) {
            try {
                values.push_back(predict_proba(detectors[m], samples[n]));
            } catch (const EmptyText&) {
                throw EmptyText("empty text at detector " + std::to_string(m) + ", sample " +
                                std::to_string(n));
            }
        }
    }
    return PredictionMatrix(detectors.size(), samples.size() - 1, std::move(values));
}

struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;

    double at(int label) const { return label == 1 ? w1 : w0; }

    void validate() const {
        if (!(w0 > 0.0) || !(w1 > 0.0)) throw ValidationError("class weights must be positive");
    }
};

// Inverse class frequency, normalized so the sample-weighted mean is 1.
inline ClassWeights class_weights_from_counts(std::size_t negatives, std::size_t positives) {
    const double total = static_cast<double>(negatives + positives);
    if (negatives == 0 || positives == 0) return {1.0, 1.0};
    return {total / (2.0 * static_cast<double>(negatives)),
            total / (2.0 * static_cast<double>(positives))};
}

inline double cost_sensitive_ce(double p, int label, const ClassWeights& cw) {
    const double pc = clamp_probability(p);
    const double y = static_cast<double>(label);
    return -cw.at(label) * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

// d(cost_sensitive_ce)/dp at the clamped point; zero outside the clamp range.
inline double cost_sensitive_ce_dp(double p, int label, const ClassWeights& cw) {
    if (p <= 1e-7 || p >= 1.0 - 1e-7) return 0.0;
    const double y = static_cast<double>(label);
    return cw.at(label) * ((1.0 - y) / (1.0 - p) - y / p);
}

// Accumulates dL/dz (z the pre-sigmoid logit) into one detector's gradient.
inline void accumulate_logit_gradient(const FeatureVector& x, double dloss_dz,
                                      std::vector<double>& grad_w, double& grad_b) {
    for (const auto& [idx, count] : x.entries) grad_w[idx] += dloss_dz * count;
    grad_b += dloss_dz;
}

// Standard ensemble: one detector per hash seed, cycling feature mixes.
inline std::vector<BaseDetector> make_ensemble(std::size_t m, std::uint32_t feature_bits,
                                               std::uint64_t seed) {
    if (m < 1) throw ValidationError("ensemble needs at least one detector");
    std::vector<BaseDetector> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        FeatureHasher h;
        h.seed = derive_seed(seed, 0x6465746563746f72ULL, i);
        h.mix = static_cast<FeatureMix>(i % 3);
        h.bits = feature_bits;
        out.emplace_back(h);
    }
    return out;
}

// Plain per-text logistic training; used for sanity floors and for seeding
// fixed-detector runs. Full-batch gradient descent with the given rate.
inline void fit_plain(BaseDetector& det, const std::vector<std::pair<std::string, int>>& data,
                      std::size_t epochs, double learning_rate, const ClassWeights& cw) {
    if (data.empty()) throw TooFewSamples("cannot fit a detector on an empty dataset");
    std::vector<FeatureVector> feats;
    feats.reserve(data.size());
    for (const auto& [text, label] : data) feats.push_back(det.hasher.featurize(text));

    std::vector<double> grad_w(det.params.weights.size(), 0.0);
    for (std::size_t e = 0; e < epochs; ++e) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double p = predict_proba(det.params, feats[i]);
            const double dz = cw.at(data[i].second) * (p - static_cast<double>(data[i].second));
            accumulate_logit_gradient(feats[i], dz, grad_w, grad_b);
        }
        const double scale = learning_rate / static_cast<double>(data.size());
        for (std::size_t j = 0; j < grad_w.size(); ++j)
            if (grad_w[j] != 0.0) det.params.weights[j] -= scale * grad_w[j];
        det.params.bias -= scale * grad_b;
    }
}

}  // namespace robustens
