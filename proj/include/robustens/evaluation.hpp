#pragma once

// Runtime prediction over the paraphrase ensemble, attack metrics (ASR and
// after-attack classification scores), and Monte-Carlo verification of the
// Chebyshev-style correctness lower bounds.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustens/assignor.hpp"
#include "robustens/attacks.hpp"
#include "robustens/common.hpp"
#include "robustens/dataset.hpp"
#include "robustens/detectors.hpp"
#include "robustens/matrix.hpp"
#include "robustens/paraphrase.hpp"
#include "robustens/prior.hpp"

namespace robustens {

enum class InferenceMode { mc, plugin };

inline InferenceMode inference_mode_from_name(const std::string& name) {
    if (name == "mc") return InferenceMode::mc;
    if (name == "plugin") return InferenceMode::plugin;
    throw ValidationError("unknown inference mode '" + name + "'; valid: mc, plugin");
}

inline std::string inference_mode_name(InferenceMode mode) {
    return mode == InferenceMode::mc ? "mc" : "plugin";
}

struct Verdict {
    double probability = 0.0;
    int label = 0;
    InferenceMode mode = InferenceMode::plugin;
    std::size_t n_used = 0;
    std::vector<double> expected_weights;  // normalized, row-major M x (N+1)
};

struct PredictSettings {
    std::size_t n_paraphrases = 4;
    InferenceMode mode = InferenceMode::plugin;
    std::size_t k_samples = 64;  // MC draws
    PriorConfig prior;
    DecisionConfig decision;
};

// Full-pipeline prediction: paraphrase, fill the prediction matrix, infer the
// posterior, aggregate. Plugin mode uses normalized cell-wise log-normal
// means; MC mode averages over k reparameterized weight draws. Deterministic
// given (models, settings, seed): the paraphrase stream is keyed by the text.
inline Verdict predict_new(const std::string& text, const std::vector<BaseDetector>& detectors,
                           const AssignorParams& assignor, const ParaphraseFn& generator,
                           const PredictSettings& settings, std::uint64_t seed) {
    settings.decision.validate();
    std::vector<std::string> samples{text};
    if (settings.n_paraphrases > 0) {
        const std::uint64_t para_seed = derive_seed(seed, fnv1a64(text), 0x70677365ULL);
        const ParaphraseSet set = generator(text, settings.n_paraphrases, para_seed);
        samples.insert(samples.end(), set.variants.begin(), set.variants.end());
    }

    const PredictionMatrix pm = predict_matrix(detectors, samples);
    const PriorGrid prior = build_prior(pm, settings.prior);
    const PosteriorParams post = infer_posterior(pm, assignor, prior.variance);
    const std::size_t cells = post.mean.size();

    Verdict verdict;
    verdict.mode = settings.mode;
    verdict.n_used = settings.n_paraphrases;

    if (cells == 1) {
        // A single weight normalizes to 1; no draw can change the aggregate.
        verdict.probability = pm.at(0, 0);
        verdict.expected_weights.assign(1, 1.0);
    } else if (settings.mode == InferenceMode::plugin) {
        const WeightMatrix raw = expected_weights(post);
        double total = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            total += raw.values()[i];
            dot += raw.values()[i] * pm.values()[i];
        }
        if (!(total > 0.0)) throw AllZeroWeights();
        verdict.probability = dot / total;
        verdict.expected_weights.resize(cells);
        for (std::size_t i = 0; i < cells; ++i) verdict.expected_weights[i] = raw.values()[i] / total;
    } else {
        Rng rng(derive_seed(seed, fnv1a64(text), 0x6d63ULL));
        const double sigma = std::sqrt(post.variance);
        verdict.expected_weights.assign(cells, 0.0);
        double prob_sum = 0.0;
        std::vector<double> raw(cells);
        for (std::size_t k = 0; k < settings.k_samples; ++k) {
            double total = 0.0, dot = 0.0;
            for (std::size_t i = 0; i < cells; ++i) {
                raw[i] = std::exp(post.mean[i] + sigma * rng.normal());
                total += raw[i];
                dot += raw[i] * pm.values()[i];
            }
            if (!(total > 0.0) || !std::isfinite(total))
                throw NonFiniteActivation("sampled weights overflowed during prediction");
            prob_sum += dot / total;
            for (std::size_t i = 0; i < cells; ++i) verdict.expected_weights[i] += raw[i] / total;
        }
        verdict.probability = prob_sum / static_cast<double>(settings.k_samples);
        for (double& w : verdict.expected_weights) w /= static_cast<double>(settings.k_samples);
    }

    verdict.label = classify(verdict.probability, settings.decision);
    return verdict;
}

// Target closure over the full pipeline, for attacks and evaluation.
inline Target make_system_target(const std::vector<BaseDetector>& detectors,
                                 const AssignorParams& assignor, const ParaphraseFn& generator,
                                 const PredictSettings& settings, std::uint64_t seed) {
    return [&detectors, &assignor, generator, settings, seed](const std::string& text) {
        return predict_new(text, detectors, assignor, generator, settings, seed).probability;
    };
}

// ---------------------------------------------------------------------------
// Metrics

struct MetricsReport {
    double asr = 0.0;        // percent
    double accuracy = 0.0;   // after-attack, percent
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t crafted = 0;
    std::size_t fooled = 0;
    std::size_t initially_misclassified = 0;
};

inline double asr(const std::vector<AdversarialRecord>& records) {
    if (records.empty()) throw EmptyRecordSet();
    std::size_t fooled = 0;
    for (const auto& r : records)
        if (r.succeeded) ++fooled;
    return 100.0 * static_cast<double>(fooled) / static_cast<double>(records.size());
}

// Scores the target on every crafted adversarial text plus every initially
// misclassified clean (which scores as wrong by construction). Class 1 is
// the positive class.
inline MetricsReport after_attack_metrics(const std::vector<AdversarialRecord>& records,
                                          const Dataset& skipped_misclassified, const Target& target,
                                          const DecisionConfig& decision) {
    MetricsReport rep;
    rep.crafted = records.size();
    rep.initially_misclassified = skipped_misclassified.size();

    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    const auto tally = [&](int actual, int predicted) {
        if (actual == 1 && predicted == 1) ++tp;
        else if (actual == 0 && predicted == 0) ++tn;
        else if (actual == 0 && predicted == 1) ++fp;
        else ++fn;
    };

    for (const auto& r : records) {
        const int predicted = classify(target(r.adversarial), decision);
        tally(r.clean.label, predicted);
        if (r.succeeded) ++rep.fooled;
    }
    for (const auto& s : skipped_misclassified) {
        const int predicted = classify(target(s.text), decision);
        tally(s.label, predicted);
    }

    const std::size_t total = tp + tn + fp + fn;
    if (total > 0) rep.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fp > 0) rep.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) rep.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (rep.precision + rep.recall > 0.0)
        rep.f1 = 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall);
    if (!records.empty()) rep.asr = asr(records);
    return rep;
}

// Clean-dataset classification scores through an arbitrary target.
struct ClassificationReport {
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;  // percent
    std::size_t total = 0, correct = 0;
};

inline ClassificationReport evaluate_dataset(const Dataset& data, const Target& target,
                                             const DecisionConfig& decision) {
    ClassificationReport rep;
    rep.total = data.size();
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& item : data) {
        const int predicted = classify(target(item.text), decision);
        if (predicted == item.label) ++rep.correct;
        if (item.label == 1 && predicted == 1) ++tp;
        if (item.label == 0 && predicted == 1) ++fp;
        if (item.label == 1 && predicted == 0) ++fn;
    }
    if (rep.total > 0) rep.accuracy = 100.0 * static_cast<double>(rep.correct) / static_cast<double>(rep.total);
    if (tp + fp > 0) rep.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) rep.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (rep.precision + rep.recall > 0.0)
        rep.f1 = 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall);
    return rep;
}

inline nlohmann::json metrics_to_json(const MetricsReport& rep) {
    return nlohmann::json{{"asr", rep.asr},
                          {"after_attack_accuracy", rep.accuracy},
                          {"after_attack_precision", rep.precision},
                          {"after_attack_recall", rep.recall},
                          {"after_attack_f1", rep.f1},
                          {"crafted", rep.crafted},
                          {"fooled", rep.fooled},
                          {"initially_misclassified", rep.initially_misclassified}};
}

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string metrics_to_csv(const MetricsReport& rep) {
    std::string out = "metric,value\n";
    out += "asr," + format_fixed(rep.asr) + "\n";
    out += "after_attack_accuracy," + format_fixed(rep.accuracy) + "\n";
    out += "after_attack_precision," + format_fixed(rep.precision) + "\n";
    out += "after_attack_recall," + format_fixed(rep.recall) + "\n";
    out += "after_attack_f1," + format_fixed(rep.f1) + "\n";
    out += "crafted," + std::to_string(rep.crafted) + "\n";
    out += "fooled," + std::to_string(rep.fooled) + "\n";
    out += "initially_misclassified," + std::to_string(rep.initially_misclassified) + "\n";
    return out;
}

inline std::string classification_to_csv(const ClassificationReport& rep) {
    std::string out = "metric,value\n";
    out += "accuracy," + format_fixed(rep.accuracy) + "\n";
    out += "precision," + format_fixed(rep.precision) + "\n";
    out += "recall," + format_fixed(rep.recall) + "\n";
    out += "f1," + format_fixed(rep.f1) + "\n";
    out += "total," + std::to_string(rep.total) + "\n";
    out += "correct," + std::to_string(rep.correct) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Bound verification

// Per-detector draw moments for the correctness lower bound. The simulation
// draws each cell from a Beta matched to (mu_m, sigma_sq_m); sigma == 0
// degenerates to a point mass and sigma^2 == mu(1-mu) to a Bernoulli.
struct BoundScenario {
    std::vector<double> mu;        // one per detector
    std::vector<double> sigma_sq;  // one per detector
    double epsilon = 0.5;
    std::size_t n_generated = 0;  // N
    int label = 1;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;

    std::size_t detector_count() const { return mu.size(); }

    double mean_mu() const {
        double s = 0.0;
        for (double m : mu) s += m;
        return s / static_cast<double>(mu.size());
    }

    double delta() const { return std::abs(mean_mu() - epsilon); }

    void validate() const {
        if (mu.empty() || mu.size() != sigma_sq.size())
            throw ValidationError("bound scenario needs matching mu/sigma_sq lists");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("bound scenario epsilon in (0,1)");
        if (trials < 1) throw ValidationError("bound scenario needs trials >= 1");
        if (label != 0 && label != 1) throw ValidationError("bound scenario label must be 0 or 1");
        for (std::size_t m = 0; m < mu.size(); ++m) {
            if (!(mu[m] > 0.0 && mu[m] < 1.0))
                throw ValidationError("bound scenario mu must lie in (0,1)");
            if (sigma_sq[m] < 0.0) throw ValidationError("bound scenario variance must be >= 0");
            const double cap = mu[m] * (1.0 - mu[m]);
            if (sigma_sq[m] > cap + 1e-12)
                throw InfeasibleMoments("no [0,1] distribution has mean " + std::to_string(mu[m]) +
                                        " and variance " + std::to_string(sigma_sq[m]));
        }
        if (!(delta() > 0.0)) throw ValidationError("bound scenario needs |mean - epsilon| > 0");
        const int consistent = mean_mu() > epsilon ? 1 : 0;
        if (label != consistent)
            throw ValidationError(
                "bound scenario label contradicts the mean/threshold side; the bound assumes a "
                "better-than-random detector");
    }
};

struct BoundCheck {
    double empirical_rate = 0.0;
    double bound = 0.0;
};

namespace detail {

inline double draw_unit_moment_matched(Rng& rng, double mu, double sigma_sq) {
    if (sigma_sq <= 0.0) return mu;
    const double cap = mu * (1.0 - mu);
    if (sigma_sq >= cap - 1e-15) return rng.bernoulli(mu) ? 1.0 : 0.0;
    const double t = cap / sigma_sq - 1.0;
    return rng.beta(mu * t, (1.0 - mu) * t);
}

inline double simulate_correct_rate(const BoundScenario& s) {
    const std::size_t columns = s.n_generated + 1;
    const std::size_t m_count = s.detector_count();
    Rng rng(derive_seed_str(s.seed, "bound-sim"));
    std::size_t correct = 0;
    DecisionConfig decision{s.epsilon};
    for (std::size_t trial = 0; trial < s.trials; ++trial) {
        double sum = 0.0;
        for (std::size_t m = 0; m < m_count; ++m)
            for (std::size_t n = 0; n < columns; ++n)
                sum += draw_unit_moment_matched(rng, s.mu[m], s.sigma_sq[m]);
        const double p_bar = sum / static_cast<double>(m_count * columns);
        if (classify(p_bar, decision) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(s.trials);
}

}  // namespace detail

// Single-detector bound: 1 - sigma^2 / ((N+1) delta^2).
inline BoundCheck verify_single_bound(const BoundScenario& s) {
    s.validate();
    if (s.detector_count() != 1)
        throw ValidationError("verify_single_bound expects exactly one detector");
    BoundCheck out;
    const double d = s.delta();
    out.bound = 1.0 - s.sigma_sq[0] / (static_cast<double>(s.n_generated + 1) * d * d);
    out.empirical_rate = detail::simulate_correct_rate(s);
    return out;
}

// Ensemble bound: 1 - sum_m sigma_m^2 / ((N+1) M^2 delta^2) with
// delta = |mean_m(mu_m) - epsilon|. With M=1 this is the single bound.
inline BoundCheck verify_ensemble_bound(const BoundScenario& s) {
    s.validate();
    BoundCheck out;
    const double d = s.delta();
    const double m = static_cast<double>(s.detector_count());
    double var_sum = 0.0;
    for (double v : s.sigma_sq) var_sum += v;
    out.bound = 1.0 - var_sum / (static_cast<double>(s.n_generated + 1) * m * m * d * d);
    out.empirical_rate = detail::simulate_correct_rate(s);
    return out;
}

// Scenario files: a JSON array of objects with scalar-or-list mu/sigma_sq.
inline std::vector<BoundScenario> load_bound_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw ValidationError("scenario file must hold a JSON array");
    std::vector<BoundScenario> scenarios;
    for (const auto& item : doc) {
        BoundScenario s;
        const auto read_list = [&](const char* key) {
            std::vector<double> vals;
            if (!item.contains(key)) throw ValidationError(std::string("scenario missing '") + key + "'");
            if (item[key].is_number()) {
                vals.push_back(item[key].get<double>());
            } else if (item[key].is_array()) {
                for (const auto& v : item[key]) vals.push_back(v.get<double>());
            } else {
                throw ValidationError(std::string("scenario '") + key + "' must be number or array");
            }
            return vals;
        };
        s.mu = read_list("mu");
        s.sigma_sq = read_list("sigma_sq");
        s.epsilon = item.value("epsilon", 0.5);
        s.n_generated = item.value("n", std::size_t{0});
        s.label = item.value("label", s.mean_mu() > s.epsilon ? 1 : 0);
        s.trials = item.value("trials", std::size_t{10000});
        s.seed = item.value("seed", std::uint64_t{1});
        if (s.mu.size() != s.sigma_sq.size() && s.sigma_sq.size() == 1)
            s.sigma_sq.assign(s.mu.size(), s.sigma_sq[0]);
        s.validate();
        scenarios.push_back(std::move(s));
    }
    return scenarios;
}

}  // namespace robustens
