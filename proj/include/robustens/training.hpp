#pragma once

// Iterative adversarial training: alternate detector updates (weighted
// cross-entropy, assignor frozen) and assignor updates (negative ELBO,
// detectors frozen) on disjoint stratified splits, re-crafting adversarial
// augmentations against the current full predictor once per alternation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "robustens/assignor.hpp"
#include "robustens/attacks.hpp"
#include "robustens/common.hpp"
#include "robustens/dataset.hpp"
#include "robustens/detectors.hpp"
#include "robustens/evaluation.hpp"
#include "robustens/matrix.hpp"
#include "robustens/paraphrase.hpp"
#include "robustens/prior.hpp"

namespace robustens {

struct TrainConfig {
    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t epochs_bd = 3;
    std::size_t epochs_ag = 3;
    std::size_t alternations = 10;
    std::size_t batch_size = 32;
    double split_ratio = 0.5;
    bool fixed_detectors = false;
    std::size_t pretrain_epochs = 200;     // plain fit before fixed-detector runs
    double pretrain_learning_rate = 0.5;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
        if (!(split_ratio > 0.0 && split_ratio < 1.0))
            throw ValidationError("split_ratio must lie in (0,1)");
        if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
        if (epochs_bd < 1 || epochs_ag < 1) throw ValidationError("phase epochs must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
    std::vector<double> m, v;
    std::size_t t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("adam step: parameter/gradient size mismatch");
    state.t += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitDatasets {
    Dataset d_bd;      // detector split
    Dataset d_ag;      // assignor split
    Dataset d_bd_adv;  // adversarial augmentation of d_bd
    Dataset d_ag_adv;  // adversarial augmentation of d_ag
};

// Disjoint stratified split; each class is shuffled and divided by the ratio.
inline SplitDatasets split_datasets(const Dataset& data, double ratio, std::uint64_t seed) {
    if (data.size() < 2) throw TooFewSamples("need at least 2 samples to split");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0,1)");
    std::vector<std::size_t> by_label[2];
    for (std::size_t i = 0; i < data.size(); ++i) by_label[data[i].label].push_back(i);

    SplitDatasets out;
    std::vector<bool> to_bd(data.size(), false);
    Rng rng(derive_seed_str(seed, "split"));
    for (auto& idx : by_label) {
        rng.shuffle_indices(idx);
        const std::size_t take =
            static_cast<std::size_t>(std::llround(ratio * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < take && i < idx.size(); ++i) to_bd[idx[i]] = true;
    }
    for (std::size_t i = 0; i < data.size(); ++i)
        (to_bd[i] ? out.d_bd : out.d_ag).push_back(data[i]);
    if (out.d_bd.empty() || out.d_ag.empty())
        throw TooFewSamples("split produced an empty side; provide more samples");
    return out;
}

// Augmentation ids keep the clean id as a prefix so disjointness stays
// auditable: "<clean-id>#adv".
inline std::string base_id(const std::string& id) {
    const auto pos = id.find("#adv");
    return pos == std::string::npos ? id : id.substr(0, pos);
}

inline Dataset augmentation_from_records(const std::vector<AdversarialRecord>& records) {
    Dataset out;
    for (const auto& r : records) {
        if (r.adversarial == r.clean.text) continue;  // nothing new to learn from
        out.push_back({r.clean.id + "#adv", r.adversarial, r.clean.label});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cached per-sample training item: paraphrases generated once per alternation
// and features hashed once per detector.

struct TrainItem {
    LabeledText sample;
    std::vector<std::string> texts;                  // input + N paraphrases
    std::vector<std::vector<FeatureVector>> feats;   // [detector][text]
};

inline std::vector<TrainItem> make_train_items(const Dataset& data,
                                               const std::vector<BaseDetector>& detectors,
                                               const ParaphraseFn& generator, std::size_t n_paraphrases,
                                               std::uint64_t seed, unsigned threads) {
    std::vector<TrainItem> items(data.size());
    parallel_for(data.size(), threads, [&](std::size_t i) {
        TrainItem& item = items[i];
        item.sample = data[i];
        item.texts.push_back(data[i].text);
        if (n_paraphrases > 0) {
            const ParaphraseSet set =
                generator(data[i].text, n_paraphrases, derive_seed(seed, fnv1a64(data[i].id)));
            item.texts.insert(item.texts.end(), set.variants.begin(), set.variants.end());
        }
        item.feats.resize(detectors.size());
        for (std::size_t m = 0; m < detectors.size(); ++m) {
            item.feats[m].reserve(item.texts.size());
            for (const auto& text : item.texts)
                item.feats[m].push_back(detectors[m].hasher.featurize(text));
        }
    });
    return items;
}

inline PredictionMatrix item_matrix(const TrainItem& item, const std::vector<BaseDetector>& detectors) {
    std::vector<double> values;
    values.reserve(detectors.size() * item.texts.size());
    for (std::size_t m = 0; m < detectors.size(); ++m)
        for (std::size_t n = 0; n < item.texts.size(); ++n)
            values.push_back(predict_proba(detectors[m].params, item.feats[m][n]));
    return PredictionMatrix(detectors.size(), item.texts.size() - 1, std::move(values));
}

// ---------------------------------------------------------------------------
// Phase losses

struct DetectorGrads {
    std::vector<std::vector<double>> weights;  // per detector
    std::vector<double> bias;                  // per detector

    DetectorGrads(std::size_t m, std::size_t feature_space)
        : weights(m, std::vector<double>(feature_space, 0.0)), bias(m, 0.0) {}

    void reset() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        std::fill(bias.begin(), bias.end(), 0.0);
    }
};

// Differentiable core of the detector phase: weighted-aggregate cross-entropy
// with the weight grids held fixed. Exactly what the finite-difference oracle
// perturbs.
inline double loss_bd_with_weights(const std::vector<TrainItem>& items,
                                   const std::vector<BaseDetector>& detectors,
                                   const ClassWeights& cw,
                                   const std::vector<std::vector<double>>& weight_grids,
                                   DetectorGrads* grads) {
    double loss = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const TrainItem& item = items[i];
        const auto& w = weight_grids[i];
        const std::size_t cols = item.texts.size();
        std::vector<double> probs(detectors.size() * cols);
        double p_bar = 0.0;
        for (std::size_t m = 0; m < detectors.size(); ++m)
            for (std::size_t n = 0; n < cols; ++n) {
                const double p = predict_proba(detectors[m].params, item.feats[m][n]);
                probs[m * cols + n] = p;
                p_bar += w[m * cols + n] * p;
            }
        loss += cost_sensitive_ce(p_bar, item.sample.label, cw);
        if (grads) {
            const double dldp = cost_sensitive_ce_dp(p_bar, item.sample.label, cw);
            for (std::size_t m = 0; m < detectors.size(); ++m)
                for (std::size_t n = 0; n < cols; ++n) {
                    const double p = probs[m * cols + n];
                    const double dz = dldp * w[m * cols + n] * p * (1.0 - p);
                    if (dz == 0.0) continue;
                    accumulate_logit_gradient(item.feats[m][n], dz, grads->weights[m], grads->bias[m]);
                }
        }
    }
    return loss;
}

// Detector-phase loss: weights come from the assignor's expected-weight mode
// and are treated as constants; gradients flow only into detector parameters.
inline double loss_bd(const std::vector<TrainItem>& items, const std::vector<BaseDetector>& detectors,
                      const AssignorParams& assignor, const PriorConfig& prior_cfg,
                      const ClassWeights& cw, DetectorGrads* grads) {
    std::vector<std::vector<double>> weight_grids;
    weight_grids.reserve(items.size());
    for (const auto& item : items) {
        const PredictionMatrix pm = item_matrix(item, detectors);
        const PriorGrid prior = build_prior(pm, prior_cfg);
        const PosteriorParams post = infer_posterior(pm, assignor, prior.variance);
        const WeightMatrix w = normalize_weights(expected_weights(post));
        weight_grids.push_back(w.values());
    }
    return loss_bd_with_weights(items, detectors, cw, weight_grids, grads);
}

// Assignor-phase loss: summed negative ELBO; gradients flow only into the
// assignor. Per-item noise seeds derive from (seed, sample id).
inline double loss_ag(const std::vector<TrainItem>& items, const std::vector<BaseDetector>& detectors,
                      const AssignorParams& assignor, const PriorConfig& prior_cfg,
                      std::size_t k_samples, std::uint64_t seed, AssignorGrads* grads) {
    double loss = 0.0;
    for (const auto& item : items) {
        const PredictionMatrix pm = item_matrix(item, detectors);
        const PriorGrid prior = build_prior(pm, prior_cfg);
        const std::uint64_t item_seed = derive_seed(seed, fnv1a64(item.sample.id));
        if (grads) {
            const ElboResult res = assignor_gradients(pm, item.sample.label, assignor, prior,
                                                      k_samples, item_seed, *grads);
            loss += -res.elbo;
        } else {
            loss += -elbo(pm, item.sample.label, assignor, prior, k_samples, item_seed);
        }
    }
    return loss;
}

// ---------------------------------------------------------------------------
// The alternating loop

struct TrainSetup {
    TrainConfig train;
    PriorConfig prior;
    DecisionConfig decision;
    AssignorConfig assignor;
    AttackBudget budget;
    std::vector<AttackKind> attacks;   // emulation set; empty disables augmentation
    SynonymLexicon lexicon = builtin_lexicon();
    std::size_t ensemble_size = 5;
    std::uint32_t feature_bits = 16;
    std::size_t n_paraphrases = 4;
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

struct TrainOutcome {
    std::vector<BaseDetector> detectors;
    AssignorParams assignor;
    std::vector<nlohmann::json> log;
    bool aborted = false;  // non-finite activations; models roll back
};

namespace detail {

inline std::uint64_t params_checksum(const std::vector<double>& flat) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : flat) {
        const char* bytes = reinterpret_cast<const char*>(&v);
        h = fnv1a64(std::string_view(bytes, sizeof(double)), h);
    }
    return h;
}

inline std::uint64_t detectors_checksum(const std::vector<BaseDetector>& detectors) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& det : detectors) {
        h = splitmix64(h ^ params_checksum(det.params.weights));
        const char* bytes = reinterpret_cast<const char*>(&det.params.bias);
        h = fnv1a64(std::string_view(bytes, sizeof(double)), h);
    }
    return h;
}

inline std::vector<double> flatten_detector(const BaseDetector& det) {
    std::vector<double> flat = det.params.weights;
    flat.push_back(det.params.bias);
    return flat;
}

inline void unflatten_detector(BaseDetector& det, const std::vector<double>& flat) {
    std::copy(flat.begin(), flat.end() - 1, det.params.weights.begin());
    det.params.bias = flat.back();
}

}  // namespace detail

inline TrainOutcome iat_train(const Dataset& data, const TrainSetup& setup,
                              const ParaphraseFn& generator) {
    setup.train.validate();
    setup.prior.validate();
    setup.decision.validate();
    setup.budget.validate();

    TrainOutcome out;
    out.detectors = make_ensemble(setup.ensemble_size, setup.feature_bits, setup.seed);
    out.assignor = AssignorParams::init(setup.assignor, setup.seed);

    SplitDatasets split = split_datasets(data, setup.train.split_ratio, setup.seed);

    std::size_t pos = 0, neg = 0;
    for (const auto& s : split.d_bd) (s.label == 1 ? pos : neg) += 1;
    const ClassWeights cw = class_weights_from_counts(neg, pos);

    // Attack-target alternative (detectors-only) noted here for reproducibility.
    out.log.push_back(nlohmann::json{
        {"event", "start"},
        {"samples", data.size()},
        {"bd_size", split.d_bd.size()},
        {"ag_size", split.d_ag.size()},
        {"class_weight_0", cw.w0},
        {"class_weight_1", cw.w1},
        {"augmentation_target", "full aggregated predictor (plugin mode)"},
        {"augmentation_target_alternative", "base detectors only (not used)"},
        {"fixed_detectors", setup.train.fixed_detectors},
        {"seed", setup.seed}});

    if (setup.train.fixed_detectors) {
        std::vector<std::pair<std::string, int>> flat;
        for (const auto& s : split.d_bd) flat.emplace_back(s.text, s.label);
        for (auto& det : out.detectors)
            fit_plain(det, flat, setup.train.pretrain_epochs, setup.train.pretrain_learning_rate, cw);
        out.log.push_back(nlohmann::json{{"event", "pretrain"},
                                         {"epochs", setup.train.pretrain_epochs},
                                         {"detectors", out.detectors.size()}});
    }

    if (setup.train.alternations == 0) return out;

    std::vector<AdamState> det_adam;
    for (const auto& det : out.detectors)
        det_adam.emplace_back(det.params.weights.size() + 1);
    AdamState ag_adam(out.assignor.parameter_count());

    auto snapshot_detectors = out.detectors;
    auto snapshot_assignor = out.assignor;

    PredictSettings target_settings;
    target_settings.n_paraphrases = setup.n_paraphrases;
    target_settings.mode = InferenceMode::plugin;
    target_settings.k_samples = setup.assignor.k_eval;
    target_settings.prior = setup.prior;
    target_settings.decision = setup.decision;

    double prev_bd = std::numeric_limits<double>::infinity();
    double prev_ag = std::numeric_limits<double>::infinity();
    std::uint64_t tick = 0;  // logical timestamp: monotone across the run

    try {
        for (std::size_t alt = 1; alt <= setup.train.alternations; ++alt) {
            const std::uint64_t alt_seed = derive_seed(setup.seed, 0x616c74ULL, alt);

            // (1) re-craft augmentations against the frozen current predictor
            split.d_bd_adv.clear();
            split.d_ag_adv.clear();
            if (!setup.attacks.empty()) {
                const Target target = make_system_target(out.detectors, out.assignor, generator,
                                                         target_settings, alt_seed);
                AttackContext ctx;
                ctx.lexicon = &setup.lexicon;
                ctx.generator = generator;
                ctx.budget = setup.budget;
                ctx.decision = setup.decision;
                const auto craft = [&](const Dataset& src, std::uint64_t tag) {
                    std::vector<AdversarialRecord> records(src.size());
                    std::vector<char> keep(src.size(), 0);
                    AttackContext inner = ctx;
                    inner.budget.max_queries =
                        ctx.budget.max_queries > 1 ? ctx.budget.max_queries - 1 : 1;
                    parallel_for(src.size(), setup.threads, [&](std::size_t i) {
                        const LabeledText& sample = src[i];
                        const double p = target(sample.text);
                        if (classify(p, setup.decision) != sample.label) return;
                        const AttackKind kind =
                            setup.attacks[derive_seed(alt_seed, tag, fnv1a64(sample.id)) %
                                          setup.attacks.size()];
                        records[i] = run_attack(kind, inner, target, sample,
                                                derive_seed(alt_seed, tag, fnv1a64(sample.id), 7), p);
                        keep[i] = 1;
                    });
                    std::vector<AdversarialRecord> kept;
                    for (std::size_t i = 0; i < records.size(); ++i)
                        if (keep[i]) kept.push_back(std::move(records[i]));
                    return kept;
                };
                split.d_bd_adv = augmentation_from_records(craft(split.d_bd, 0xbdULL));
                split.d_ag_adv = augmentation_from_records(craft(split.d_ag, 0xa9ULL));
            }
            out.log.push_back(nlohmann::json{{"event", "augment"},
                                             {"alternation", alt},
                                             {"bd_adv", split.d_bd_adv.size()},
                                             {"ag_adv", split.d_ag_adv.size()},
                                             {"timestamp", tick++}});

            Dataset bd_aug = split.d_bd;
            bd_aug.insert(bd_aug.end(), split.d_bd_adv.begin(), split.d_bd_adv.end());
            Dataset ag_aug = split.d_ag;
            ag_aug.insert(ag_aug.end(), split.d_ag_adv.begin(), split.d_ag_adv.end());

            // id hygiene audit: base ids of the two phase pools must not meet
            std::unordered_set<std::string> bd_ids, ag_ids;
            for (const auto& s : bd_aug) bd_ids.insert(base_id(s.id));
            for (const auto& s : ag_aug) ag_ids.insert(base_id(s.id));
            bool disjoint = true;
            for (const auto& id : ag_ids)
                if (bd_ids.count(id)) disjoint = false;
            if (!disjoint) throw Error("data hygiene violation: phase pools share sample ids");
            out.log.push_back(nlohmann::json{
                {"event", "audit"}, {"alternation", alt}, {"disjoint", disjoint}, {"timestamp", tick++}});

            double bd_loss_mean = prev_bd;
            if (!setup.train.fixed_detectors) {
                const std::uint64_t ag_checksum_before =
                    detail::params_checksum(out.assignor.flatten());
                auto items = make_train_items(bd_aug, out.detectors, generator, setup.n_paraphrases,
                                              derive_seed(alt_seed, 0x7061726164ULL), setup.threads);
                std::size_t step = 0;
                for (std::size_t epoch = 1; epoch <= setup.train.epochs_bd; ++epoch) {
                    std::vector<std::size_t> order(items.size());
                    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                    Rng shuffle_rng(derive_seed(alt_seed, 0xbdULL, epoch));
                    shuffle_rng.shuffle_indices(order);
                    double epoch_loss = 0.0;
                    for (std::size_t start = 0; start < order.size(); start += setup.train.batch_size) {
                        const std::size_t stop =
                            std::min(order.size(), start + setup.train.batch_size);
                        std::vector<TrainItem> batch;
                        batch.reserve(stop - start);
                        for (std::size_t i = start; i < stop; ++i) batch.push_back(items[order[i]]);
                        DetectorGrads grads(out.detectors.size(), std::size_t{1}
                                                                      << setup.feature_bits);
                        const double batch_loss = loss_bd(batch, out.detectors, out.assignor,
                                                          setup.prior, cw, &grads);
                        epoch_loss += batch_loss;
                        for (std::size_t m = 0; m < out.detectors.size(); ++m) {
                            std::vector<double> flat = detail::flatten_detector(out.detectors[m]);
                            std::vector<double> gflat = grads.weights[m];
                            gflat.push_back(grads.bias[m]);
                            adam_step(flat, gflat, det_adam[m], setup.train);
                            detail::unflatten_detector(out.detectors[m], flat);
                        }
                        out.log.push_back(nlohmann::json{{"phase", "bd"},
                                                         {"alternation", alt},
                                                         {"epoch", epoch},
                                                         {"step", ++step},
                                                         {"loss", batch_loss},
                                                         {"timestamp", tick++},
                                                         {"seed_state", alt_seed}});
                    }
                    bd_loss_mean = epoch_loss / static_cast<double>(items.size());
                }
                const std::uint64_t ag_checksum_after =
                    detail::params_checksum(out.assignor.flatten());
                if (ag_checksum_before != ag_checksum_after)
                    throw Error("freeze violation: assignor changed during the detector phase");
                out.log.push_back(nlohmann::json{{"event", "freeze_check"},
                                                 {"alternation", alt},
                                                 {"phase", "bd"},
                                                 {"frozen", "assignor"},
                                                 {"checksum_stable", true},
                                                 {"timestamp", tick++}});
            }

            double ag_loss_mean = prev_ag;
            {
                const std::uint64_t det_checksum_before = detail::detectors_checksum(out.detectors);
                auto items = make_train_items(ag_aug, out.detectors, generator, setup.n_paraphrases,
                                              derive_seed(alt_seed, 0x7061726167ULL), setup.threads);
                std::size_t step = 0;
                for (std::size_t epoch = 1; epoch <= setup.train.epochs_ag; ++epoch) {
                    std::vector<std::size_t> order(items.size());
                    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                    Rng shuffle_rng(derive_seed(alt_seed, 0xa9ULL, epoch));
                    shuffle_rng.shuffle_indices(order);
                    double epoch_loss = 0.0;
                    for (std::size_t start = 0; start < order.size(); start += setup.train.batch_size) {
                        const std::size_t stop =
                            std::min(order.size(), start + setup.train.batch_size);
                        std::vector<TrainItem> batch;
                        batch.reserve(stop - start);
                        for (std::size_t i = start; i < stop; ++i) batch.push_back(items[order[i]]);
                        AssignorGrads grads(out.assignor.embed_dim, out.assignor.hidden_dim);
                        const double batch_loss =
                            loss_ag(batch, out.detectors, out.assignor, setup.prior,
                                    setup.assignor.k_train, derive_seed(alt_seed, epoch), &grads);
                        epoch_loss += batch_loss;
                        std::vector<double> flat = out.assignor.flatten();
                        adam_step(flat, grads.flatten(), ag_adam, setup.train);
                        out.assignor.set_from_flat(flat);
                        out.log.push_back(nlohmann::json{{"phase", "ag"},
                                                         {"alternation", alt},
                                                         {"epoch", epoch},
                                                         {"step", ++step},
                                                         {"loss", batch_loss},
                                                         {"timestamp", tick++},
                                                         {"seed_state", alt_seed}});
                    }
                    ag_loss_mean = epoch_loss / static_cast<double>(items.size());
                }
                const std::uint64_t det_checksum_after = detail::detectors_checksum(out.detectors);
                if (det_checksum_before != det_checksum_after)
                    throw Error("freeze violation: detectors changed during the assignor phase");
                out.log.push_back(nlohmann::json{{"event", "freeze_check"},
                                                 {"alternation", alt},
                                                 {"phase", "ag"},
                                                 {"frozen", "detectors"},
                                                 {"checksum_stable", true},
                                                 {"timestamp", tick++}});
            }

            snapshot_detectors = out.detectors;
            snapshot_assignor = out.assignor;

            nlohmann::json done{{"event", "alternation_done"},
                                {"alternation", alt},
                                {"ag_loss", ag_loss_mean},
                                {"timestamp", tick++}};
            if (!setup.train.fixed_detectors) done["bd_loss"] = bd_loss_mean;
            out.log.push_back(std::move(done));

            const bool bd_converged =
                setup.train.fixed_detectors ||
                (std::isfinite(prev_bd) &&
                 (prev_bd - bd_loss_mean) / std::max(std::abs(prev_bd), 1e-12) < 1e-4);
            const bool ag_converged =
                std::isfinite(prev_ag) &&
                (prev_ag - ag_loss_mean) / std::max(std::abs(prev_ag), 1e-12) < 1e-4;
            if (bd_converged && ag_converged) {
                out.log.push_back(nlohmann::json{
                    {"event", "converged"}, {"alternation", alt}, {"timestamp", tick++}});
                break;
            }
            prev_bd = bd_loss_mean;
            prev_ag = ag_loss_mean;
        }
    } catch (const NonFiniteActivation& e) {
        out.detectors = snapshot_detectors;
        out.assignor = snapshot_assignor;
        out.aborted = true;
        out.log.push_back(nlohmann::json{
            {"event", "aborted"}, {"reason", e.what()}, {"timestamp", tick++}});
    }

    return out;
}

}  // namespace robustens
