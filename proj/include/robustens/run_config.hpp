#pragma once

// Operator configuration: one JSON document covering every module. All keys
// are optional with the defaults below; unknown keys are rejected so typos
// fail loudly before any work starts.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustens/assignor.hpp"
#include "robustens/attacks.hpp"
#include "robustens/common.hpp"
#include "robustens/evaluation.hpp"
#include "robustens/paraphrase.hpp"
#include "robustens/prior.hpp"
#include "robustens/training.hpp"

namespace robustens {

enum class GeneratorKind { rule, llm };

struct RunConfig {
    std::uint64_t seed = 42;
    unsigned threads = 1;

    std::size_t ensemble_size = 5;
    std::uint32_t feature_bits = 16;

    std::size_t n_paraphrases = 4;
    GeneratorKind generator = GeneratorKind::rule;
    std::string lexicon_path;  // empty: builtin
    RuleParaphraseConfig rule_paraphrase;
    LlmEndpointConfig llm;

    PriorConfig prior;
    AssignorConfig assignor;
    DecisionConfig decision;
    TrainConfig train;
    std::vector<AttackKind> train_attacks{AttackKind::char_level, AttackKind::word_level};
    AttackBudget budget;
    InferenceMode eval_mode = InferenceMode::plugin;

    void validate() const {
        if (ensemble_size < 1) throw ValidationError("ensemble.detectors must be >= 1");
        if (feature_bits < 4 || feature_bits > 24)
            throw ValidationError("ensemble.feature_bits must lie in [4, 24]");
        prior.validate();
        assignor.validate();
        decision.validate();
        train.validate();
        budget.validate();
        if (generator == GeneratorKind::llm) llm.validate();
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& scope,
                                std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw ValidationError("config: unknown key '" + (scope.empty() ? key : scope + "." + key) +
                                  "'");
    }
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("config root must be a JSON object");
    detail::reject_unknown_keys(doc, "", {"seed", "threads", "ensemble", "paraphrase", "prior",
                                          "assignor", "decision", "train", "attack", "eval"});
    RunConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.threads = doc.value("threads", cfg.threads);

    if (doc.contains("ensemble")) {
        const auto& e = doc["ensemble"];
        detail::reject_unknown_keys(e, "ensemble", {"detectors", "feature_bits"});
        cfg.ensemble_size = e.value("detectors", cfg.ensemble_size);
        cfg.feature_bits = e.value("feature_bits", cfg.feature_bits);
    }
    if (doc.contains("paraphrase")) {
        const auto& p = doc["paraphrase"];
        detail::reject_unknown_keys(p, "paraphrase",
                                    {"n", "generator", "lexicon_path", "synonym_fraction",
                                     "dropout_fraction", "jitter_probability", "llm"});
        cfg.n_paraphrases = p.value("n", cfg.n_paraphrases);
        if (p.contains("generator")) {
            const std::string g = p["generator"].get<std::string>();
            if (g == "rule") cfg.generator = GeneratorKind::rule;
            else if (g == "llm") cfg.generator = GeneratorKind::llm;
            else throw ValidationError("config: paraphrase.generator must be 'rule' or 'llm'");
        }
        cfg.lexicon_path = p.value("lexicon_path", cfg.lexicon_path);
        cfg.rule_paraphrase.synonym_fraction =
            p.value("synonym_fraction", cfg.rule_paraphrase.synonym_fraction);
        cfg.rule_paraphrase.dropout_fraction =
            p.value("dropout_fraction", cfg.rule_paraphrase.dropout_fraction);
        cfg.rule_paraphrase.jitter_probability =
            p.value("jitter_probability", cfg.rule_paraphrase.jitter_probability);
        if (p.contains("llm")) {
            const auto& l = p["llm"];
            detail::reject_unknown_keys(l, "paraphrase.llm",
                                        {"url", "token_env", "temperature", "max_tokens",
                                         "max_in_flight", "timeout_seconds"});
            cfg.llm.url = l.value("url", cfg.llm.url);
            cfg.llm.token_env = l.value("token_env", cfg.llm.token_env);
            cfg.llm.temperature = l.value("temperature", cfg.llm.temperature);
            cfg.llm.max_tokens = l.value("max_tokens", cfg.llm.max_tokens);
            cfg.llm.max_in_flight = l.value("max_in_flight", cfg.llm.max_in_flight);
            cfg.llm.timeout_seconds = l.value("timeout_seconds", cfg.llm.timeout_seconds);
        }
    }
    if (doc.contains("prior")) {
        const auto& p = doc["prior"];
        detail::reject_unknown_keys(p, "prior", {"alpha", "beta", "var_dt", "var_sp"});
        cfg.prior.alpha = p.value("alpha", cfg.prior.alpha);
        cfg.prior.beta = p.value("beta", cfg.prior.beta);
        cfg.prior.var_dt = p.value("var_dt", cfg.prior.var_dt);
        cfg.prior.var_sp = p.value("var_sp", cfg.prior.var_sp);
    }
    if (doc.contains("assignor")) {
        const auto& a = doc["assignor"];
        detail::reject_unknown_keys(a, "assignor", {"embed_dim", "hidden_dim", "k_train", "k_eval"});
        cfg.assignor.embed_dim = a.value("embed_dim", cfg.assignor.embed_dim);
        cfg.assignor.hidden_dim = a.value("hidden_dim", cfg.assignor.hidden_dim);
        cfg.assignor.k_train = a.value("k_train", cfg.assignor.k_train);
        cfg.assignor.k_eval = a.value("k_eval", cfg.assignor.k_eval);
    }
    if (doc.contains("decision")) {
        const auto& d = doc["decision"];
        detail::reject_unknown_keys(d, "decision", {"epsilon"});
        cfg.decision.epsilon = d.value("epsilon", cfg.decision.epsilon);
    }
    if (doc.contains("train")) {
        const auto& t = doc["train"];
        detail::reject_unknown_keys(
            t, "train",
            {"learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon", "epochs_bd", "epochs_ag",
             "alternations", "batch_size", "split_ratio", "fixed_detectors", "pretrain_epochs",
             "pretrain_learning_rate", "attacks"});
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.adam_beta1 = t.value("adam_beta1", cfg.train.adam_beta1);
        cfg.train.adam_beta2 = t.value("adam_beta2", cfg.train.adam_beta2);
        cfg.train.adam_epsilon = t.value("adam_epsilon", cfg.train.adam_epsilon);
        cfg.train.epochs_bd = t.value("epochs_bd", cfg.train.epochs_bd);
        cfg.train.epochs_ag = t.value("epochs_ag", cfg.train.epochs_ag);
        cfg.train.alternations = t.value("alternations", cfg.train.alternations);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.split_ratio = t.value("split_ratio", cfg.train.split_ratio);
        cfg.train.fixed_detectors = t.value("fixed_detectors", cfg.train.fixed_detectors);
        cfg.train.pretrain_epochs = t.value("pretrain_epochs", cfg.train.pretrain_epochs);
        cfg.train.pretrain_learning_rate =
            t.value("pretrain_learning_rate", cfg.train.pretrain_learning_rate);
        if (t.contains("attacks")) {
            cfg.train_attacks.clear();
            for (const auto& name : t["attacks"])
                cfg.train_attacks.push_back(attack_kind_from_name(name.get<std::string>()));
        }
    }
    if (doc.contains("attack")) {
        const auto& a = doc["attack"];
        detail::reject_unknown_keys(a, "attack", {"max_edit_fraction", "max_queries", "beam_width"});
        cfg.budget.max_edit_fraction = a.value("max_edit_fraction", cfg.budget.max_edit_fraction);
        cfg.budget.max_queries = a.value("max_queries", cfg.budget.max_queries);
        cfg.budget.beam_width = a.value("beam_width", cfg.budget.beam_width);
    }
    if (doc.contains("eval")) {
        const auto& e = doc["eval"];
        detail::reject_unknown_keys(e, "eval", {"mode"});
        if (e.contains("mode")) cfg.eval_mode = inference_mode_from_name(e["mode"].get<std::string>());
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(doc);
}

// Fully-resolved form, written next to every output so runs can be replayed.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& kind : cfg.train_attacks) attacks.push_back(attack_name(kind));
    return nlohmann::json{
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"ensemble", {{"detectors", cfg.ensemble_size}, {"feature_bits", cfg.feature_bits}}},
        {"paraphrase",
         {{"n", cfg.n_paraphrases},
          {"generator", cfg.generator == GeneratorKind::rule ? "rule" : "llm"},
          {"lexicon_path", cfg.lexicon_path},
          {"synonym_fraction", cfg.rule_paraphrase.synonym_fraction},
          {"dropout_fraction", cfg.rule_paraphrase.dropout_fraction},
          {"jitter_probability", cfg.rule_paraphrase.jitter_probability},
          {"llm",
           {{"url", cfg.llm.url},
            {"token_env", cfg.llm.token_env},
            {"temperature", cfg.llm.temperature},
            {"max_tokens", cfg.llm.max_tokens},
            {"max_in_flight", cfg.llm.max_in_flight},
            {"timeout_seconds", cfg.llm.timeout_seconds}}}}},
        {"prior",
         {{"alpha", cfg.prior.alpha},
          {"beta", cfg.prior.beta},
          {"var_dt", cfg.prior.var_dt},
          {"var_sp", cfg.prior.var_sp}}},
        {"assignor",
         {{"embed_dim", cfg.assignor.embed_dim},
          {"hidden_dim", cfg.assignor.hidden_dim},
          {"k_train", cfg.assignor.k_train},
          {"k_eval", cfg.assignor.k_eval}}},
        {"decision", {{"epsilon", cfg.decision.epsilon}}},
        {"train",
         {{"learning_rate", cfg.train.learning_rate},
          {"adam_beta1", cfg.train.adam_beta1},
          {"adam_beta2", cfg.train.adam_beta2},
          {"adam_epsilon", cfg.train.adam_epsilon},
          {"epochs_bd", cfg.train.epochs_bd},
          {"epochs_ag", cfg.train.epochs_ag},
          {"alternations", cfg.train.alternations},
          {"batch_size", cfg.train.batch_size},
          {"split_ratio", cfg.train.split_ratio},
          {"fixed_detectors", cfg.train.fixed_detectors},
          {"pretrain_epochs", cfg.train.pretrain_epochs},
          {"pretrain_learning_rate", cfg.train.pretrain_learning_rate},
          {"attacks", attacks}}},
        {"attack",
         {{"max_edit_fraction", cfg.budget.max_edit_fraction},
          {"max_queries", cfg.budget.max_queries},
          {"beam_width", cfg.budget.beam_width}}},
        {"eval", {{"mode", inference_mode_name(cfg.eval_mode)}}}};
}

inline SynonymLexicon lexicon_from_config(const RunConfig& cfg) {
    return cfg.lexicon_path.empty() ? builtin_lexicon() : load_lexicon(cfg.lexicon_path);
}

}  // namespace robustens
