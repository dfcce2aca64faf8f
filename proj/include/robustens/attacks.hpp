#pragma once

// Desk-scale attack suite: greedy score-based search against a black-box
// probability target. Four families share the machinery: character edits,
// lexicon synonym swaps, paraphrase beam search, and a mixed action set.
// Every target call is counted and capped; ties break lowest-index-first,
// then lexicographically.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robustens/common.hpp"
#include "robustens/dataset.hpp"
#include "robustens/lexicon.hpp"
#include "robustens/matrix.hpp"
#include "robustens/paraphrase.hpp"
#include "robustens/text.hpp"

namespace robustens {

using Target = std::function<double(const std::string&)>;

struct AttackBudget {
    double max_edit_fraction = 0.3;  // share of words an attack may touch
    std::size_t max_queries = 500;   // predictor calls per sample
    std::size_t beam_width = 4;      // sentence-attack beam

    void validate() const {
        if (!(max_edit_fraction >= 0.0 && max_edit_fraction <= 1.0))
            throw ValidationError("max_edit_fraction must lie in [0,1]");
        if (max_queries < 1) throw ValidationError("max_queries must be positive");
        if (beam_width < 1) throw ValidationError("beam_width must be positive");
    }
};

struct AdversarialRecord {
    LabeledText clean;
    std::string adversarial;
    bool succeeded = false;
    std::string attack_name;
    std::size_t queries_used = 0;
};

namespace detail {

// Probability mass the target puts on the true class.
inline double true_class_prob(double p, int label) { return label == 1 ? p : 1.0 - p; }

class CountingTarget {
public:
    CountingTarget(const Target& fn, std::size_t cap) : fn_(fn), cap_(cap) {}

    std::optional<double> query(const std::string& text) {
        if (used_ >= cap_) return std::nullopt;
        ++used_;
        return fn_(text);
    }

    std::size_t used() const { return used_; }
    bool exhausted() const { return used_ >= cap_; }

private:
    const Target& fn_;
    std::size_t cap_;
    std::size_t used_ = 0;
};

// All single-operation character variants of a word core, in deterministic
// order: per position substitutions (confusables, then adjacent keys), then
// deletions, then duplications, then neighbour swaps.
inline std::vector<std::string> char_edit_candidates(const std::string& core) {
    std::vector<std::string> out;
    if (core.empty()) return out;
    const auto push_unique = [&](std::string&& s) {
        if (s.empty() || s == core) return;
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    };
    for (std::size_t pos = 0; pos < core.size(); ++pos) {
        const char c = core[pos];
        std::string subs;
        if (auto it = letter_to_confusables().find(c); it != letter_to_confusables().end())
            subs += it->second;
        if (auto it = adjacent_keys().find(c); it != adjacent_keys().end()) subs += it->second;
        for (char s : subs) {
            std::string cand = core;
            cand[pos] = s;
            push_unique(std::move(cand));
        }
    }
    if (core.size() >= 2) {
        for (std::size_t pos = 0; pos < core.size(); ++pos) {
            std::string cand = core;
            cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(pos));
            push_unique(std::move(cand));
        }
    }
    for (std::size_t pos = 0; pos < core.size(); ++pos) {
        std::string cand = core;
        cand.insert(cand.begin() + static_cast<std::ptrdiff_t>(pos), core[pos]);
        push_unique(std::move(cand));
    }
    for (std::size_t pos = 0; pos + 1 < core.size(); ++pos) {
        if (core[pos] == core[pos + 1]) continue;
        std::string cand = core;
        std::swap(cand[pos], cand[pos + 1]);
        push_unique(std::move(cand));
    }
    return out;
}

struct ImportanceEntry {
    std::size_t index;
    double score;
};

// Deletion-based importance under the shared query counter. Words whose
// deletion could not be scored before the budget ran out get score 0.
inline std::vector<ImportanceEntry> ranked_importance(CountingTarget& ct,
                                                      const std::vector<std::string>& words,
                                                      double p_input) {
    std::vector<ImportanceEntry> entries;
    entries.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        double score = 0.0;
        if (words.size() > 1) {
            std::vector<std::string> reduced;
            reduced.reserve(words.size() - 1);
            for (std::size_t j = 0; j < words.size(); ++j)
                if (j != i) reduced.push_back(words[j]);
            if (const auto p = ct.query(join_words(reduced))) score = std::abs(p_input - *p);
        }
        entries.push_back({i, score});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.index < b.index;
                     });
    return entries;
}

}  // namespace detail

// |p(x) - p(x without word i)| for every word, via brute-force recomputation.
inline std::vector<double> word_importance(const Target& target, const std::string& x) {
    const std::vector<std::string> words = split_words(x);
    if (words.empty()) throw EmptyText();
    const double p0 = target(x);
    std::vector<double> scores(words.size(), 0.0);
    if (words.size() == 1) return scores;
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::vector<std::string> reduced;
        for (std::size_t j = 0; j < words.size(); ++j)
            if (j != i) reduced.push_back(words[j]);
        scores[i] = std::abs(p0 - target(join_words(reduced)));
    }
    return scores;
}

// Which edit families the mixed-level greedy may use.
struct ActionSet {
    bool char_edits = true;
    bool word_swaps = true;
    bool paraphrase = true;
};

namespace detail {

struct GreedyOutcome {
    std::string text;
    double p = 0.0;
    bool flipped = false;
    std::size_t queries = 0;
};

// Importance-ranked greedy over single-word candidate edits plus optional
// whole-text paraphrases. Each accepted action must strictly reduce the
// true-class probability; the loop stops otherwise.
inline GreedyOutcome greedy_edit_search(const Target& target, const std::string& x, int label,
                                        const SynonymLexicon* lexicon, const ParaphraseFn* generator,
                                        const AttackBudget& budget, const DecisionConfig& decision,
                                        std::uint64_t seed, const ActionSet& actions,
                                        bool single_word_per_round,
                                        std::optional<double> known_p0 = std::nullopt) {
    CountingTarget ct(target, budget.max_queries);
    GreedyOutcome out;
    out.text = x;

    const auto p0 = known_p0 ? known_p0 : ct.query(x);
    if (!p0) {
        out.queries = ct.used();
        return out;
    }
    out.p = *p0;
    if (classify(out.p, decision) != label) {
        out.flipped = true;
        out.queries = ct.used();
        return out;
    }

    std::vector<std::string> words = split_words(x);
    std::size_t edits_allowed =
        static_cast<std::size_t>(budget.max_edit_fraction * static_cast<double>(words.size()));
    std::vector<bool> edited(words.size(), false);
    std::size_t edits_done = 0;

    const bool any_word_action = actions.char_edits || actions.word_swaps;
    if ((edits_allowed == 0 || !any_word_action) && !actions.paraphrase) {
        out.queries = ct.used();
        return out;
    }

    std::vector<ImportanceEntry> ranking;
    if (any_word_action && edits_allowed > 0) ranking = ranked_importance(ct, words, out.p);

    double p_true_cur = true_class_prob(out.p, label);
    std::size_t round = 0;

    while (!ct.exhausted()) {
        ++round;
        struct Candidate {
            std::string text;        // full candidate text
            std::string new_token;   // replacement token for word-level edits
            double p = 0.0;
            double p_true = 0.0;
            bool whole_text = false;
            std::size_t word_index = 0;
        };
        std::optional<Candidate> best;

        const auto consider = [&](Candidate&& cand) {
            if (!best || cand.p_true < best->p_true) best = std::move(cand);
        };

        if (any_word_action && edits_done < edits_allowed) {
            for (const auto& entry : ranking) {
                if (edited[entry.index]) continue;
                const TokenParts parts = split_token(words[entry.index]);
                if (parts.core.empty()) continue;

                std::vector<std::string> replacements;
                if (actions.word_swaps && lexicon) {
                    if (const auto* alts = lexicon->lookup(to_lower(parts.core)))
                        replacements.insert(replacements.end(), alts->begin(), alts->end());
                }
                if (actions.char_edits) {
                    auto chars = char_edit_candidates(parts.core);
                    replacements.insert(replacements.end(), chars.begin(), chars.end());
                }
                if (replacements.empty()) continue;

                bool out_of_queries = false;
                for (const auto& repl : replacements) {
                    const std::string token = parts.prefix + repl + parts.suffix;
                    std::vector<std::string> trial = words;
                    trial[entry.index] = token;
                    const std::string trial_text = join_words(trial);
                    const auto p = ct.query(trial_text);
                    if (!p) {
                        out_of_queries = true;
                        break;
                    }
                    consider({trial_text, token, *p, true_class_prob(*p, label), false, entry.index});
                }
                if (out_of_queries) break;
                if (single_word_per_round && best) break;
            }
        }

        if (actions.paraphrase && generator && !ct.exhausted()) {
            const ParaphraseSet set =
                (*generator)(join_words(words), 2, derive_seed(seed, 0x6d6c2d70617261ULL, round));
            for (const auto& variant : set.variants) {
                if (variant == join_words(words)) continue;
                const auto p = ct.query(variant);
                if (!p) break;
                consider({variant, "", *p, true_class_prob(*p, label), true, 0});
            }
        }

        if (!best || best->p_true >= p_true_cur) break;  // no strict improvement

        p_true_cur = best->p_true;
        out.p = best->p;
        if (best->whole_text) {
            words = split_words(best->text);
            edited.assign(words.size(), false);
            edits_done = 0;
            edits_allowed =
                static_cast<std::size_t>(budget.max_edit_fraction * static_cast<double>(words.size()));
            if (any_word_action && edits_allowed > 0 && !ct.exhausted())
                ranking = ranked_importance(ct, words, out.p);
            else
                ranking.clear();
        } else {
            // Multi-word synonyms stay inside one slot so indices keep meaning.
            words[best->word_index] = best->new_token;
            edited[best->word_index] = true;
            ++edits_done;
        }
        out.text = join_words(words);

        if (classify(out.p, decision) != label) {
            out.flipped = true;
            break;
        }
        if (edits_done >= edits_allowed && !(actions.paraphrase && generator)) break;
    }

    out.queries = ct.used();
    return out;
}

inline AdversarialRecord finish_record(const LabeledText& clean, const GreedyOutcome& out,
                                       const std::string& name) {
    AdversarialRecord rec;
    rec.clean = clean;
    rec.adversarial = out.text;
    rec.succeeded = out.flipped;
    rec.attack_name = name;
    rec.queries_used = out.queries;
    return rec;
}

}  // namespace detail

// Character-level greedy: most important unedited word first, best of the
// single-character edits applied if it strictly helps.
inline AdversarialRecord char_attack(const Target& target, const LabeledText& sample,
                                     const AttackBudget& budget, const DecisionConfig& decision,
                                     std::uint64_t seed,
                                     std::optional<double> known_p0 = std::nullopt) {
    budget.validate();
    ActionSet actions{true, false, false};
    const auto out = detail::greedy_edit_search(target, sample.text, sample.label, nullptr, nullptr,
                                                budget, decision, seed, actions,
                                                /*single_word_per_round=*/true, known_p0);
    return detail::finish_record(sample, out, "char");
}

// Synonym-swap greedy over the lexicon; words without an entry are skipped.
inline AdversarialRecord word_attack(const Target& target, const LabeledText& sample,
                                     const SynonymLexicon& lexicon, const AttackBudget& budget,
                                     const DecisionConfig& decision, std::uint64_t seed,
                                     std::optional<double> known_p0 = std::nullopt) {
    budget.validate();
    ActionSet actions{false, true, false};
    const auto out = detail::greedy_edit_search(target, sample.text, sample.label, &lexicon, nullptr,
                                                budget, decision, seed, actions,
                                                /*single_word_per_round=*/false, known_p0);
    return detail::finish_record(sample, out, "word");
}

// Mixed action set: char edits, synonym swaps, and whole-text paraphrases,
// best action first. `actions` restricts the families (used by tests and
// ablations); with only word swaps enabled this is exactly word_attack.
inline AdversarialRecord multilevel_attack(const Target& target, const LabeledText& sample,
                                           const SynonymLexicon& lexicon, const ParaphraseFn& generator,
                                           const AttackBudget& budget, const DecisionConfig& decision,
                                           std::uint64_t seed, const ActionSet& actions = {},
                                           std::optional<double> known_p0 = std::nullopt) {
    budget.validate();
    const auto out = detail::greedy_edit_search(target, sample.text, sample.label, &lexicon,
                                                actions.paraphrase ? &generator : nullptr, budget,
                                                decision, seed, actions,
                                                /*single_word_per_round=*/false, known_p0);
    return detail::finish_record(sample, out, "multilevel");
}

// Beam search over paraphrase candidates, depth-limited; keeps the best
// scoring hypothesis found anywhere in the tree.
inline AdversarialRecord sentence_attack(const Target& target, const LabeledText& sample,
                                         const ParaphraseFn& generator, const AttackBudget& budget,
                                         const DecisionConfig& decision, std::uint64_t seed,
                                         std::size_t max_depth = 3,
                                         std::size_t expansions_per_node = 4,
                                         std::optional<double> known_p0 = std::nullopt) {
    budget.validate();
    detail::CountingTarget ct(target, budget.max_queries);
    AdversarialRecord rec;
    rec.clean = sample;
    rec.adversarial = sample.text;
    rec.attack_name = "sentence";

    const auto p0 = known_p0 ? known_p0 : ct.query(sample.text);
    if (!p0) {
        rec.queries_used = ct.used();
        return rec;
    }
    double best_p_true = detail::true_class_prob(*p0, sample.label);
    if (classify(*p0, decision) != sample.label) {
        rec.succeeded = true;
        rec.queries_used = ct.used();
        return rec;
    }

    struct Hypothesis {
        std::string text;
        double p_true;
    };
    std::vector<Hypothesis> beam{{sample.text, best_p_true}};

    for (std::size_t depth = 1; depth <= max_depth && !beam.empty(); ++depth) {
        std::vector<Hypothesis> level;
        bool out_of_queries = false;
        for (std::size_t b = 0; b < beam.size() && !out_of_queries; ++b) {
            const ParaphraseSet set = generator(beam[b].text, expansions_per_node,
                                                derive_seed(seed, 0x7365ULL, depth, b));
            for (const auto& variant : set.variants) {
                const auto p = ct.query(variant);
                if (!p) {
                    out_of_queries = true;
                    break;
                }
                const double pt = detail::true_class_prob(*p, sample.label);
                level.push_back({variant, pt});
                if (pt < best_p_true) {
                    best_p_true = pt;
                    rec.adversarial = variant;
                }
                if (classify(*p, decision) != sample.label) {
                    rec.succeeded = true;
                    rec.queries_used = ct.used();
                    return rec;
                }
            }
        }
        std::stable_sort(level.begin(), level.end(),
                         [](const Hypothesis& a, const Hypothesis& b) { return a.p_true < b.p_true; });
        if (level.size() > budget.beam_width) level.resize(budget.beam_width);
        beam = std::move(level);
        if (out_of_queries) break;
    }

    rec.queries_used = ct.used();
    return rec;
}

// ---------------------------------------------------------------------------
// Dataset-level crafting

enum class AttackKind { char_level, word_level, sentence_level, multilevel };

inline AttackKind attack_kind_from_name(const std::string& name) {
    if (name == "char") return AttackKind::char_level;
    if (name == "word") return AttackKind::word_level;
    if (name == "sentence") return AttackKind::sentence_level;
    if (name == "multilevel") return AttackKind::multilevel;
    throw UnknownAttack(name);
}

inline std::string attack_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::char_level: return "char";
        case AttackKind::word_level: return "word";
        case AttackKind::sentence_level: return "sentence";
        default: return "multilevel";
    }
}

struct AttackContext {
    const SynonymLexicon* lexicon = nullptr;
    ParaphraseFn generator;
    AttackBudget budget;
    DecisionConfig decision;
};

inline AdversarialRecord run_attack(AttackKind kind, const AttackContext& ctx, const Target& target,
                                    const LabeledText& sample, std::uint64_t seed,
                                    std::optional<double> known_p0 = std::nullopt) {
    switch (kind) {
        case AttackKind::char_level:
            return char_attack(target, sample, ctx.budget, ctx.decision, seed, known_p0);
        case AttackKind::word_level:
            if (!ctx.lexicon) throw ValidationError("word attack needs a lexicon");
            return word_attack(target, sample, *ctx.lexicon, ctx.budget, ctx.decision, seed, known_p0);
        case AttackKind::sentence_level:
            if (!ctx.generator) throw ValidationError("sentence attack needs a paraphrase generator");
            return sentence_attack(target, sample, ctx.generator, ctx.budget, ctx.decision, seed, 3,
                                   4, known_p0);
        default:
            if (!ctx.lexicon || !ctx.generator)
                throw ValidationError("multilevel attack needs a lexicon and a generator");
            return multilevel_attack(target, sample, *ctx.lexicon, ctx.generator, ctx.budget,
                                     ctx.decision, seed, ActionSet{}, known_p0);
    }
}

struct AdversarialDataset {
    std::vector<AdversarialRecord> records;  // crafted from initially correct samples
    Dataset skipped;                         // initially misclassified cleans
};

// Attacks only samples the target already classifies correctly; the rest form
// the skipped set. records.size() + skipped.size() == data.size(). The
// correctness check counts against the per-sample query cap, so total target
// calls per sample never exceed max_queries.
inline AdversarialDataset build_adversarial_dataset(const Dataset& data, const Target& target,
                                                    AttackKind kind, const AttackContext& ctx,
                                                    std::uint64_t seed, unsigned threads = 1) {
    struct Slot {
        bool skipped = false;
        AdversarialRecord record;
        LabeledText clean;
    };
    std::vector<Slot> slots(data.size());
    AttackContext inner = ctx;
    inner.budget.max_queries = ctx.budget.max_queries > 1 ? ctx.budget.max_queries - 1 : 0;
    parallel_for(data.size(), threads, [&](std::size_t i) {
        const LabeledText& sample = data[i];
        const double p = target(sample.text);
        Slot& slot = slots[i];
        slot.clean = sample;
        if (classify(p, ctx.decision) != sample.label) {
            slot.skipped = true;
            return;
        }
        const std::uint64_t sample_seed = derive_seed(seed, fnv1a64(sample.id));
        if (inner.budget.max_queries == 0) {
            slot.record.clean = sample;
            slot.record.adversarial = sample.text;
            slot.record.attack_name = attack_name(kind);
            slot.record.queries_used = 1;
            return;
        }
        slot.record = run_attack(kind, inner, target, sample, sample_seed, p);
        slot.record.queries_used += 1;  // the correctness check above
    });

    AdversarialDataset out;
    for (auto& slot : slots) {
        if (slot.skipped)
            out.skipped.push_back(std::move(slot.clean));
        else
            out.records.push_back(std::move(slot.record));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSONL round-trip for crafted records

inline void save_records(const std::vector<AdversarialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write records file: " + path);
    for (const auto& r : records) {
        nlohmann::json rec{{"id", r.clean.id},
                           {"clean", r.clean.text},
                           {"label", r.clean.label},
                           {"adversarial", r.adversarial},
                           {"succeeded", r.succeeded},
                           {"attack_name", r.attack_name},
                           {"queries_used", r.queries_used}};
        out << rec.dump() << "\n";
    }
}

inline std::vector<AdversarialRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open records file: " + path);
    std::vector<AdversarialRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        for (const char* key : {"id", "clean", "label", "adversarial", "succeeded", "attack_name",
                                "queries_used"}) {
            if (!rec.contains(key))
                throw ValidationError(path + ":" + std::to_string(line_no) + ": missing field '" +
                                      key + "'");
        }
        AdversarialRecord r;
        r.clean.id = rec["id"].get<std::string>();
        r.clean.text = rec["clean"].get<std::string>();
        r.clean.label = rec["label"].get<int>();
        r.adversarial = rec["adversarial"].get<std::string>();
        r.succeeded = rec["succeeded"].get<bool>();
        r.attack_name = rec["attack_name"].get<std::string>();
        r.queries_used = rec["queries_used"].get<std::size_t>();
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace robustens
