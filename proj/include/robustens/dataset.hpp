#pragma once

// Labeled-text datasets: line-delimited JSON files {"id","text","label"} and a
// synthetic toy corpus whose labels are defined by a fixed harm-word list, so
// tests and CI need no external data.

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "robustens/common.hpp"
#include "robustens/lexicon.hpp"
#include "robustens/text.hpp"

namespace robustens {

struct LabeledText {
    std::string id;
    std::string text;
    int label = 0;  // 1 = harmful
};

using Dataset = std::vector<LabeledText>;

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file: " + path);
    Dataset data;
    std::unordered_set<std::string> seen_ids;
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
        const auto fail = [&](const std::string& msg) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (!rec.is_object()) fail("record is not an object");
        if (!rec.contains("id") || !rec["id"].is_string()) fail("missing string field 'id'");
        if (!rec.contains("text") || !rec["text"].is_string()) fail("missing string field 'text'");
        if (!rec.contains("label") || !rec["label"].is_number_integer()) fail("missing integer field 'label'");
        LabeledText item;
        item.id = rec["id"].get<std::string>();
        item.text = rec["text"].get<std::string>();
        item.label = rec["label"].get<int>();
        if (item.label != 0 && item.label != 1) fail("label must be 0 or 1");
        if (trim(item.text).empty()) fail("text is empty");
        if (!seen_ids.insert(item.id).second) fail("duplicate id '" + item.id + "'");
        data.push_back(std::move(item));
    }
    return data;
}

inline void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write dataset file: " + path);
    for (const auto& item : data) {
        nlohmann::json rec{{"id", item.id}, {"text", item.text}, {"label", item.label}};
        out << rec.dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Toy corpus

// Ground truth for the toy world: harmful iff any token is a harm word.
// The harm vocabulary equals the lexicon's protected list.
inline int toy_oracle_label(const std::string& text) {
    static const std::unordered_set<std::string> harm(detail::builtin_protected().begin(),
                                                      detail::builtin_protected().end());
    const std::string lowered = to_lower(text);
    std::size_t i = 0;
    while (i < lowered.size()) {
        while (i < lowered.size() && !std::isalnum(static_cast<unsigned char>(lowered[i]))) ++i;
        std::size_t j = i;
        while (j < lowered.size() && std::isalnum(static_cast<unsigned char>(lowered[j]))) ++j;
        if (j > i && harm.count(lowered.substr(i, j - i))) return 1;
        i = j;
    }
    return 0;
}

namespace detail {

inline const std::vector<std::string>& toy_openers() {
    static const std::vector<std::string> v = {
        "honestly", "to be fair", "i think", "let me say", "frankly", "by the way", "",
    };
    return v;
}

inline const std::vector<std::string>& toy_subjects() {
    static const std::vector<std::string> v = {
        "the group",   "my neighbor", "that account", "this channel", "the crowd",
        "a stranger",  "the admin",   "those people", "the forum",    "her post",
        "his comment", "the team",
    };
    return v;
}

inline const std::vector<std::string>& toy_benign_verbs() {
    static const std::vector<std::string> v = {
        "shared", "posted", "enjoyed", "described", "praised", "discussed",
        "reviewed", "joined", "welcomed", "organized", "liked", "started",
    };
    return v;
}

inline const std::vector<std::string>& toy_benign_objects() {
    static const std::vector<std::string> v = {
        "a lovely recipe",  "the garden party",  "a calm debate",    "our book club",
        "the weekend trip", "a funny story",     "the new album",    "a science article",
        "the charity drive", "a board game",     "the quiet morning", "a useful guide",
    };
    return v;
}

// Common harm verbs dominate; rare ones appear occasionally so detectors see
// them a little but weight them less.
inline const std::vector<std::string>& toy_harm_common() {
    static const std::vector<std::string> v = {"kill", "attack", "destroy", "hurt", "crush", "burn", "smash"};
    return v;
}

inline const std::vector<std::string>& toy_harm_rare() {
    static const std::vector<std::string> v = {"murder", "slay", "assault", "wreck", "maim", "batter", "scorch"};
    return v;
}

inline const std::vector<std::string>& toy_harm_targets() {
    static const std::vector<std::string> v = {
        "that group", "these people", "your page", "the whole forum", "them all",
        "this place", "that account", "your team",
    };
    return v;
}

inline const std::vector<std::string>& toy_fillers() {
    static const std::vector<std::string> v = {
        "because the weather was nice", "after the long meeting",  "before the show started",
        "while everyone was watching",  "since the rules changed", "during the quiet evening",
        "and nobody said a word",       "which surprised everyone",
    };
    return v;
}

}  // namespace detail

// Deterministic keyword-labeled corpus; roughly 45% harmful.
inline Dataset make_toy_corpus(std::size_t count, std::uint64_t seed) {
    Dataset data;
    data.reserve(count);
    Rng rng(derive_seed_str(seed, "toy-corpus"));
    for (std::size_t i = 0; i < count; ++i) {
        const bool harmful = rng.uniform01() < 0.45;
        std::vector<std::string> parts;
        const std::string opener = detail::toy_openers()[rng.uniform_index(detail::toy_openers().size())];
        if (!opener.empty()) parts.push_back(opener);
        if (harmful) {
            const bool rare = rng.uniform01() < 0.15;
            const auto& verbs = rare ? detail::toy_harm_rare() : detail::toy_harm_common();
            const std::string verb = verbs[rng.uniform_index(verbs.size())];
            const std::string target =
                detail::toy_harm_targets()[rng.uniform_index(detail::toy_harm_targets().size())];
            switch (rng.uniform_index(5)) {
                case 0: parts.push_back("i will " + verb + " " + target + " tonight"); break;
                case 1: parts.push_back("we should " + verb + " " + target + " now"); break;
                case 2: parts.push_back("they plan to " + verb + " " + target); break;
                case 3:
                    parts.push_back(detail::toy_subjects()[rng.uniform_index(detail::toy_subjects().size())] +
                                    " wants to " + verb + " " + target);
                    break;
                default: parts.push_back("time to " + verb + " " + target + " for good"); break;
            }
            // mildly correlated but non-defining vocabulary
            if (rng.uniform01() < 0.5) parts.push_back("i am so angry");
            if (rng.uniform01() < 0.3) parts.push_back("this is a stupid place");
        } else {
            const std::string subject =
                detail::toy_subjects()[rng.uniform_index(detail::toy_subjects().size())];
            const std::string verb =
                detail::toy_benign_verbs()[rng.uniform_index(detail::toy_benign_verbs().size())];
            const std::string object =
                detail::toy_benign_objects()[rng.uniform_index(detail::toy_benign_objects().size())];
            parts.push_back(subject + " " + verb + " " + object);
            if (rng.uniform01() < 0.2) parts.push_back("i am so happy");
            if (rng.uniform01() < 0.15) parts.push_back("what a nice day");
        }
        if (rng.uniform01() < 0.6)
            parts.push_back(detail::toy_fillers()[rng.uniform_index(detail::toy_fillers().size())]);

        LabeledText item;
        std::ostringstream id;
        id << "toy-" << std::setw(6) << std::setfill('0') << i;
        item.id = id.str();
        item.text = join_words(parts);
        // join_words on multi-word parts: re-split to normalize spacing
        item.text = join_words(split_words(item.text));
        item.label = harmful ? 1 : 0;
        if (toy_oracle_label(item.text) != item.label)
            throw Error("toy corpus generator produced a label-inconsistent sample");
        data.push_back(std::move(item));
    }
    return data;
}

}  // namespace robustens
