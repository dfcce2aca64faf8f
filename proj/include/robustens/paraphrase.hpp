#pragma once

// Meaning-preserving sample generation. The default path is a seeded
// rule-based pipeline (confusable normalization, synonym substitution,
// function-word dropout, light character jitter) that never touches protected
// tokens. An HTTP client for an external completion endpoint is opt-in.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robustens/common.hpp"
#include "robustens/lexicon.hpp"
#include "robustens/text.hpp"

namespace robustens {

enum class Provenance { rule_based, llm };

struct ParaphraseSet {
    std::string original;
    std::vector<std::string> variants;  // exactly N entries
    Provenance provenance = Provenance::rule_based;
    std::size_t padded = 0;  // variants filled with the original (LLM path)
};

struct RuleParaphraseConfig {
    double synonym_fraction = 0.3;   // max share of words substituted
    double dropout_fraction = 0.1;   // max share of function words dropped
    double jitter_probability = 0.15;  // chance a variant carries one char jitter
};

namespace detail {

// One character-level jitter op on a non-protected token core: duplicate,
// drop, or swap adjacent characters. Keeps the token non-empty.
inline std::string jitter_core(const std::string& core, Rng& rng) {
    if (core.size() < 2) return core;
    std::string out = core;
    switch (rng.uniform_index(3)) {
        case 0: {  // duplicate
            const std::size_t pos = rng.uniform_index(out.size());
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), out[pos]);
            break;
        }
        case 1: {  // drop
            if (out.size() > 2) out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(out.size())));
            break;
        }
        default: {  // swap neighbours
            const std::size_t pos = rng.uniform_index(out.size() - 1);
            std::swap(out[pos], out[pos + 1]);
            break;
        }
    }
    return out;
}

}  // namespace detail

// One rule-based variant of `text` under the given stream of randomness.
inline std::string rule_based_variant(const std::string& text, const SynonymLexicon& lexicon,
                                      const RuleParaphraseConfig& cfg, Rng& rng) {
    std::vector<std::string> words = split_words(text);
    if (words.empty()) throw EmptyText();

    // Pass 1: normalize visually-confusable characters in non-protected cores.
    for (auto& word : words) {
        TokenParts parts = split_token(word);
        if (parts.core.empty() || lexicon.is_protected(parts.core)) continue;
        const std::string normalized = normalize_confusables(parts.core);
        if (normalized != parts.core) word = parts.prefix + normalized + parts.suffix;
    }

    // Pass 2: synonym substitution on up to synonym_fraction of the words.
    const std::size_t sub_budget =
        static_cast<std::size_t>(cfg.synonym_fraction * static_cast<double>(words.size()));
    std::vector<std::size_t> order(words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle_indices(order);
    std::size_t substituted = 0;
    for (std::size_t idx : order) {
        if (substituted >= sub_budget) break;
        TokenParts parts = split_token(words[idx]);
        const std::string core = to_lower(parts.core);
        if (core.empty() || lexicon.is_protected(core)) continue;
        const auto* alts = lexicon.lookup(core);
        if (!alts || alts->empty()) continue;
        const std::string& pick = (*alts)[rng.uniform_index(alts->size())];
        words[idx] = parts.prefix + pick + parts.suffix;
        ++substituted;
    }

    // Pass 3: drop up to dropout_fraction of the function words.
    const std::size_t drop_budget =
        static_cast<std::size_t>(cfg.dropout_fraction * static_cast<double>(words.size()));
    if (drop_budget > 0 && words.size() > 1) {
        std::vector<std::size_t> keep;
        std::size_t dropped = 0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const std::string core = to_lower(split_token(words[i]).core);
            if (dropped < drop_budget && function_words().count(core) && rng.uniform01() < 0.5 &&
                words.size() - dropped > 1) {
                ++dropped;
                continue;
            }
            keep.push_back(i);
        }
        if (dropped > 0) {
            std::vector<std::string> pruned;
            pruned.reserve(keep.size());
            for (std::size_t i : keep) pruned.push_back(words[i]);
            words = std::move(pruned);
        }
    }

    // Pass 4: occasional single-token character jitter.
    if (rng.uniform01() < cfg.jitter_probability) {
        std::vector<std::size_t> editable;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const TokenParts parts = split_token(words[i]);
            if (parts.core.size() >= 3 && !lexicon.is_protected(to_lower(parts.core)))
                editable.push_back(i);
        }
        if (!editable.empty()) {
            const std::size_t idx = editable[rng.uniform_index(editable.size())];
            TokenParts parts = split_token(words[idx]);
            words[idx] = parts.prefix + detail::jitter_core(parts.core, rng) + parts.suffix;
        }
    }

    return join_words(words);
}

inline ParaphraseSet generate_rule_based(const std::string& text, std::size_t n,
                                         const SynonymLexicon& lexicon, std::uint64_t seed,
                                         const RuleParaphraseConfig& cfg = {}) {
    if (n < 1) throw ValidationError("paraphrase count must be >= 1");
    if (trim(text).empty()) throw EmptyText();
    ParaphraseSet set;
    set.original = text;
    set.provenance = Provenance::rule_based;
    set.variants.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, 0x70617261ULL, i));
        set.variants.push_back(rule_based_variant(text, lexicon, cfg, rng));
    }
    return set;
}

// Callable that yields N variants; lets attacks and the runtime share one
// generation mechanism regardless of provenance.
using ParaphraseFn =
    std::function<ParaphraseSet(const std::string& text, std::size_t n, std::uint64_t seed)>;

inline ParaphraseFn make_rule_paraphraser(const SynonymLexicon& lexicon,
                                          const RuleParaphraseConfig& cfg = {}) {
    return [lexicon, cfg](const std::string& text, std::size_t n, std::uint64_t seed) {
        return generate_rule_based(text, n, lexicon, seed, cfg);
    };
}

// Settings for the opt-in HTTP completion endpoint (client in llm_client.hpp).
struct LlmEndpointConfig {
    std::string url;                                  // e.g. http://127.0.0.1:8080/v1/complete
    std::string token_env = "ROBUSTENS_LLM_TOKEN";    // bearer token source
    double temperature = 0.7;
    int max_tokens = 256;
    int max_in_flight = 4;
    int timeout_seconds = 30;

    void validate() const {
        if (url.empty()) throw ValidationError("llm endpoint url is empty");
        if (max_in_flight < 1) throw ValidationError("llm max_in_flight must be >= 1");
    }
};

// The generation prompt, with {n} and {text} interpolated.
inline std::string build_prompt(const std::string& text, std::size_t n) {
    std::string prompt =
        "The following text may contain adversarial perturbations generated by techniques "
        "such as word misspelling, synonym substitution, and sentence rephrasing. "
        "Please generate " +
        std::to_string(n) +
        " new texts by rephrasing the input text while preserving its original meaning.\n\n"
        "INPUT " +
        text + "\n\nOUTPUT:";
    return prompt;
}

}  // namespace robustens
