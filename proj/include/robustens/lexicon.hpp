#pragma once

// Synonym lexicon: word -> alternatives, plus a protected-token list the
// paraphraser must never edit (the tokens that define toy labels). A compact
// curated lexicon ships built in; JSON files with the same layout can replace
// it: {"synonyms": {"word": ["alt", ...], ...}, "protected": ["word", ...]}.

#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "robustens/common.hpp"
#include "robustens/text.hpp"

namespace robustens {

struct SynonymLexicon {
    std::unordered_map<std::string, std::vector<std::string>> synonyms;
    std::unordered_set<std::string> protected_words;

    bool has(const std::string& word) const { return synonyms.count(word) > 0; }

    const std::vector<std::string>* lookup(const std::string& word) const {
        auto it = synonyms.find(word);
        return it == synonyms.end() ? nullptr : &it->second;
    }

    bool is_protected(const std::string& word) const {
        return protected_words.count(to_lower(word)) > 0;
    }
};

namespace detail {

// Each line is one synonym group; entries get symmetric closure.
inline const std::vector<std::vector<std::string>>& builtin_groups() {
    static const std::vector<std::vector<std::string>> groups = {
        // harm groups stay inside the harm vocabulary so swaps keep toy labels
        {"kill", "murder", "slay"},
        {"hate", "loathe", "despise"},
        {"attack", "assault", "raid"},
        {"destroy", "wreck", "obliterate"},
        {"bomb", "detonate"},
        {"hurt", "maim", "batter"},
        {"threat", "menace"},
        {"crush", "smash"},
        {"burn", "scorch"},
        // benign vocabulary
        {"happy", "glad", "cheerful"},
        {"sad", "unhappy", "gloomy"},
        {"big", "large", "huge"},
        {"small", "little", "tiny"},
        {"quick", "fast", "rapid"},
        {"slow", "sluggish"},
        {"smart", "clever", "bright"},
        {"stupid", "foolish", "silly"},
        {"good", "fine", "decent"},
        {"bad", "poor", "lousy"},
        {"nice", "pleasant", "agreeable"},
        {"mean", "unkind", "nasty"},
        {"angry", "mad", "furious"},
        {"calm", "quiet", "peaceful"},
        {"funny", "amusing", "comical"},
        {"boring", "dull", "tedious"},
        {"strange", "odd", "weird"},
        {"normal", "ordinary", "usual"},
        {"new", "fresh", "recent"},
        {"old", "ancient", "aged"},
        {"strong", "sturdy", "tough"},
        {"weak", "feeble", "frail"},
        {"pretty", "lovely", "beautiful"},
        {"ugly", "hideous", "unsightly"},
        {"clean", "tidy", "spotless"},
        {"dirty", "filthy", "grimy"},
        {"rich", "wealthy", "affluent"},
        {"poor", "broke", "needy"},
        {"brave", "bold", "fearless"},
        {"scared", "afraid", "frightened"},
        {"tired", "weary", "sleepy"},
        {"awake", "alert"},
        {"honest", "truthful", "sincere"},
        {"false", "fake", "phony"},
        {"easy", "simple", "effortless"},
        {"hard", "difficult", "tricky"},
        {"loud", "noisy", "booming"},
        {"cold", "chilly", "freezing"},
        {"hot", "warm", "scorching"},
        {"wet", "damp", "soggy"},
        {"dry", "arid", "parched"},
        {"bright", "shiny", "radiant"},
        {"dark", "dim", "shadowy"},
        {"full", "crowded", "packed"},
        {"empty", "vacant", "bare"},
        {"early", "prompt"},
        {"late", "tardy", "delayed"},
        {"near", "close", "nearby"},
        {"far", "distant", "remote"},
        {"real", "genuine", "actual"},
        {"whole", "entire", "complete"},
        {"great", "grand", "superb"},
        {"terrible", "awful", "dreadful"},
        {"important", "crucial", "vital"},
        {"tiny", "minute", "minuscule"},
        {"said", "stated", "mentioned"},
        {"told", "informed", "notified"},
        {"asked", "inquired", "questioned"},
        {"answered", "replied", "responded"},
        {"walked", "strolled", "wandered"},
        {"ran", "sprinted", "dashed"},
        {"looked", "gazed", "glanced"},
        {"saw", "noticed", "spotted"},
        {"made", "built", "created"},
        {"found", "discovered", "located"},
        {"gave", "handed", "offered"},
        {"took", "grabbed", "seized"},
        {"liked", "enjoyed", "fancied"},
        {"wanted", "desired", "craved"},
        {"started", "began", "launched"},
        {"stopped", "halted", "ceased"},
        {"helped", "assisted", "aided"},
        {"showed", "displayed", "presented"},
        {"shared", "spread", "circulated"},
        {"posted", "published", "uploaded"},
        {"wrote", "drafted", "penned"},
        {"read", "skimmed", "studied"},
        {"praised", "applauded", "commended"},
        {"discussed", "debated", "considered"},
        {"reviewed", "assessed", "evaluated"},
        {"joined", "entered", "signed"},
        {"welcomed", "greeted", "received"},
        {"organized", "arranged", "planned"},
        {"described", "detailed", "outlined"},
        {"visited", "toured", "attended"},
        {"cooked", "prepared", "baked"},
        {"played", "performed", "acted"},
        {"sang", "hummed", "chanted"},
        {"laughed", "giggled", "chuckled"},
        {"cried", "wept", "sobbed"},
        {"slept", "napped", "dozed"},
        {"ate", "dined", "snacked"},
        {"drank", "sipped", "gulped"},
        {"bought", "purchased", "acquired"},
        {"sold", "traded", "vended"},
        {"kept", "retained", "stored"},
        {"lost", "misplaced", "dropped"},
        {"moved", "shifted", "relocated"},
        {"stayed", "remained", "lingered"},
        {"thought", "figured", "reckoned"},
        {"knew", "understood", "realized"},
        {"hoped", "wished", "expected"},
        {"group", "crowd", "gathering"},
        {"person", "individual", "human"},
        {"friend", "pal", "buddy"},
        {"neighbor", "local", "resident"},
        {"stranger", "outsider", "newcomer"},
        {"story", "tale", "account"},
        {"article", "piece", "report"},
        {"picture", "photo", "image"},
        {"movie", "film", "feature"},
        {"song", "tune", "melody"},
        {"book", "novel", "volume"},
        {"house", "home", "residence"},
        {"garden", "yard", "lawn"},
        {"street", "road", "avenue"},
        {"city", "town", "region"},
        {"party", "celebration", "gathering"},
        {"meeting", "session", "assembly"},
        {"trip", "journey", "voyage"},
        {"meal", "dinner", "supper"},
        {"recipe", "dish", "preparation"},
        {"game", "match", "contest"},
        {"team", "squad", "crew"},
        {"school", "academy", "college"},
        {"teacher", "instructor", "tutor"},
        {"student", "pupil", "learner"},
        {"doctor", "physician", "medic"},
        {"job", "work", "occupation"},
        {"money", "cash", "funds"},
        {"car", "vehicle", "auto"},
        {"dog", "puppy", "hound"},
        {"cat", "kitten", "feline"},
        {"bird", "fowl", "sparrow"},
        {"tree", "oak", "sapling"},
        {"flower", "blossom", "bloom"},
        {"river", "stream", "creek"},
        {"mountain", "peak", "summit"},
        {"weather", "climate", "forecast"},
        {"rain", "drizzle", "shower"},
        {"snow", "frost", "sleet"},
        {"wind", "breeze", "gust"},
        {"morning", "dawn", "sunrise"},
        {"evening", "dusk", "sunset"},
        {"night", "midnight", "nighttime"},
        {"week", "fortnight"},
        {"year", "season", "term"},
        {"idea", "notion", "concept"},
        {"plan", "scheme", "strategy"},
        {"problem", "issue", "trouble"},
        {"answer", "solution", "response"},
        {"question", "query", "inquiry"},
        {"reason", "cause", "motive"},
        {"result", "outcome", "consequence"},
        {"change", "shift", "adjustment"},
        {"chance", "opportunity", "opening"},
        {"choice", "option", "selection"},
        {"place", "spot", "location"},
        {"thing", "object", "item"},
        {"way", "manner", "method"},
        {"time", "moment", "instant"},
        {"day", "date", "occasion"},
        {"end", "finish", "conclusion"},
        {"start", "beginning", "outset"},
        {"middle", "center", "core"},
        {"side", "edge", "border"},
        {"top", "summit", "crown"},
        {"bottom", "base", "foundation"},
        {"front", "face", "forefront"},
        {"back", "rear", "reverse"},
        {"left", "port"},
        {"right", "correct", "proper"},
        {"north", "northern"},
        {"south", "southern"},
        {"always", "constantly", "forever"},
        {"never", "not once"},
        {"often", "frequently", "regularly"},
        {"rarely", "seldom", "hardly"},
        {"maybe", "perhaps", "possibly"},
        {"surely", "certainly", "definitely"},
        {"quickly", "rapidly", "swiftly"},
        {"slowly", "gradually", "steadily"},
        {"quietly", "softly", "gently"},
        {"loudly", "noisily"},
        {"today", "currently"},
        {"tomorrow", "soon"},
        {"yesterday", "earlier"},
        {"here", "nearby"},
        {"there", "yonder"},
        {"everyone", "everybody"},
        {"someone", "somebody"},
        {"nothing", "naught"},
        {"everything", "all of it"},
        {"lovely", "delightful", "charming"},
        {"awful", "horrid", "ghastly"},
        {"huge", "massive", "giant"},
        {"wonderful", "marvelous", "fabulous"},
        {"interesting", "engaging", "intriguing"},
        {"useful", "handy", "practical"},
        {"useless", "pointless", "futile"},
        {"safe", "secure", "protected"},
        {"dangerous", "risky", "hazardous"},
        {"healthy", "fit", "well"},
        {"sick", "ill", "unwell"},
        {"hungry", "starving", "famished"},
        {"thirsty", "parched"},
        {"busy", "occupied", "swamped"},
        {"free", "available", "open"},
        {"cheap", "inexpensive", "affordable"},
        {"expensive", "costly", "pricey"},
        {"quiet", "silent", "hushed"},
        {"fair", "just", "impartial"},
        {"wrong", "incorrect", "mistaken"},
        {"true", "accurate", "factual"},
        {"kind", "gentle", "caring"},
        {"polite", "courteous", "civil"},
        {"rude", "impolite", "coarse"},
        {"proud", "pleased", "satisfied"},
        {"ashamed", "embarrassed", "sheepish"},
        {"curious", "inquisitive", "nosy"},
        {"careful", "cautious", "wary"},
        {"careless", "sloppy", "reckless"},
        {"lucky", "fortunate", "blessed"},
        {"unlucky", "unfortunate", "jinxed"},
    };
    return groups;
}

// Tokens that define toy labels; the paraphraser leaves these untouched.
inline const std::vector<std::string>& builtin_protected() {
    static const std::vector<std::string> words = {
        "kill",   "murder",  "slay",       "hate",  "loathe",  "despise", "attack",
        "assault", "raid",   "destroy",    "wreck", "obliterate", "bomb", "detonate",
        "hurt",   "maim",    "batter",     "threat", "menace",  "crush",  "smash",
        "burn",   "scorch",
    };
    return words;
}

}  // namespace detail

inline SynonymLexicon builtin_lexicon() {
    SynonymLexicon lex;
    for (const auto& group : detail::builtin_groups()) {
        for (std::size_t i = 0; i < group.size(); ++i) {
            auto& entry = lex.synonyms[group[i]];
            for (std::size_t j = 0; j < group.size(); ++j)
                if (j != i) entry.push_back(group[j]);
        }
    }
    for (const auto& w : detail::builtin_protected()) lex.protected_words.insert(w);
    return lex;
}

inline SynonymLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open lexicon file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("lexicon file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("synonyms") || !doc["synonyms"].is_object())
        throw ValidationError("lexicon file " + path + " must contain a 'synonyms' object");
    SynonymLexicon lex;
    for (const auto& [word, alts] : doc["synonyms"].items()) {
        if (!alts.is_array()) throw ValidationError("lexicon entry '" + word + "' must be an array");
        std::vector<std::string> list;
        for (const auto& a : alts) list.push_back(a.get<std::string>());
        lex.synonyms[to_lower(word)] = std::move(list);
    }
    if (doc.contains("protected")) {
        for (const auto& w : doc["protected"]) lex.protected_words.insert(to_lower(w.get<std::string>()));
    }
    return lex;
}

inline void save_lexicon(const SynonymLexicon& lex, const std::string& path) {
    nlohmann::json doc;
    doc["synonyms"] = nlohmann::json::object();
    for (const auto& [word, alts] : lex.synonyms) doc["synonyms"][word] = alts;
    doc["protected"] = nlohmann::json::array();
    std::vector<std::string> sorted(lex.protected_words.begin(), lex.protected_words.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& w : sorted) doc["protected"].push_back(w);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write lexicon file: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace robustens
