#pragma once

// Tokenization and character tables shared by the featurizer, the rule-based
// paraphraser, and the attack suite.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "robustens/common.hpp"

namespace robustens {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Whitespace tokens; the unit the paraphraser and attacks edit.
inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) words.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

// Splits a surface token into punctuation prefix, core, suffix. The core runs
// from the first to the last alphanumeric character, so confusable symbols
// injected inside a word ("h@te") stay part of the core.
struct TokenParts {
    std::string prefix, core, suffix;
};

inline TokenParts split_token(std::string_view token) {
    std::size_t b = 0, e = token.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(token[e - 1]))) --e;
    TokenParts parts;
    parts.prefix = std::string(token.substr(0, b));
    parts.core = std::string(token.substr(b, e - b));
    parts.suffix = std::string(token.substr(e));
    return parts;
}

// Canonical direction of the visually-confusable table: symbol/digit -> letter.
// The attack table below runs the other way.
inline const std::unordered_map<char, char>& confusable_to_letter() {
    static const std::unordered_map<char, char> table = {
        {'0', 'o'}, {'1', 'l'}, {'3', 'e'}, {'4', 'a'}, {'5', 's'},
        {'7', 't'}, {'@', 'a'}, {'$', 's'}, {'!', 'i'}, {'+', 't'},
    };
    return table;
}

inline const std::unordered_map<char, std::string>& letter_to_confusables() {
    static const std::unordered_map<char, std::string> table = {
        {'o', "0"}, {'l', "1"}, {'e', "3"}, {'a', "@4"}, {'s', "$5"},
        {'t', "7+"}, {'i', "!1"},
    };
    return table;
}

// QWERTY neighbours used for typo-style substitutions.
inline const std::unordered_map<char, std::string>& adjacent_keys() {
    static const std::unordered_map<char, std::string> table = {
        {'q', "wa"},  {'w', "qes"}, {'e', "wrd"}, {'r', "etf"}, {'t', "ryg"}, {'y', "tuh"},
        {'u', "yij"}, {'i', "uok"}, {'o', "ipl"}, {'p', "ol"},  {'a', "qsz"}, {'s', "awdx"},
        {'d', "sefc"}, {'f', "drgv"}, {'g', "fthb"}, {'h', "gyjn"}, {'j', "hukm"}, {'k', "jil"},
        {'l', "kop"}, {'z', "asx"}, {'x', "zsdc"}, {'c', "xdfv"}, {'v', "cfgb"}, {'b', "vghn"},
        {'n', "bhjm"}, {'m', "njk"},
    };
    return table;
}

inline const std::unordered_set<std::string>& function_words() {
    static const std::unordered_set<std::string> words = {
        "the", "a",  "an", "of", "to", "in",  "on",   "and",  "or",  "is",   "are",
        "was", "were", "be", "that", "this", "it", "as", "at", "by", "for", "with",
        "so", "just", "very", "really",
    };
    return words;
}

// Maps confusable symbols back to letters inside a token core.
inline std::string normalize_confusables(std::string_view core) {
    std::string out;
    out.reserve(core.size());
    const auto& table = confusable_to_letter();
    for (char c : core) {
        auto it = table.find(c);
        out.push_back(it != table.end() ? it->second : c);
    }
    return out;
}

}  // namespace robustens
