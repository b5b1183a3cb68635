#ifndef PROMPTSTEAL_PARSER_HPP
#define PROMPTSTEAL_PARSER_HPP

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "promptsteal/common.hpp"

namespace promptsteal {

enum class PosTag {
    Det,
    Adj,
    Noun,
    Propn,
    Verb,
    Adp,
    Pron,
    Adv,
    Conj,
    Num,
    Punct,
};

inline const char* to_string(PosTag t) {
    switch (t) {
        case PosTag::Det: return "DET";
        case PosTag::Adj: return "ADJ";
        case PosTag::Noun: return "NOUN";
        case PosTag::Propn: return "PROPN";
        case PosTag::Verb: return "VERB";
        case PosTag::Adp: return "ADP";
        case PosTag::Pron: return "PRON";
        case PosTag::Adv: return "ADV";
        case PosTag::Conj: return "CONJ";
        case PosTag::Num: return "NUM";
        case PosTag::Punct: return "PUNCT";
    }
    return "?";
}

struct ParseToken {
    std::string text;  // surface form, original case
    PosTag tag = PosTag::Noun;
    int head = -1;  // token index, -1 for the root
    std::string dep = "dep";
};

struct NounChunkSpan {
    int begin = 0;  // token index, inclusive
    int end = 0;    // token index, exclusive
    int head = 0;   // index of the head noun
};

struct ParseResult {
    std::vector<ParseToken> tokens;
    std::vector<NounChunkSpan> noun_chunks;
};

class DependencyParser {
public:
    virtual ~DependencyParser() = default;
    virtual ParseResult parse(std::string_view sentence) const = 0;
};

// Deterministic lexicon-and-rules parser. It is tuned for the flat,
// list-like sentences that captioners produce, not for general prose:
// closed-class lexicons decide tags, unknown words default to NOUN, and
// heads follow a single left-to-right attachment pass.
class RuleParser final : public DependencyParser {
public:
    ParseResult parse(std::string_view sentence) const override {
        ParseResult res;
        res.tokens = tokenize(sentence);
        if (res.tokens.empty()) {
            throw ArgumentError("parse: sentence has no tokens");
        }
        tag_tokens(res.tokens);
        res.noun_chunks = find_noun_chunks(res.tokens);
        attach_heads(res);
        return res;
    }

private:
    struct Lexicons {
        std::unordered_set<std::string> det, adp, pron, conj, verb, adj, adv, num_words, ing_nouns;
    };

    static const Lexicons& lex() {
        static const Lexicons L = [] {
            Lexicons l;
            l.det = {"a", "an", "the", "this", "that", "these", "those", "some",
                     "any", "no", "every", "each", "all", "both", "either", "neither",
                     "its", "his", "her", "their", "my", "your", "our"};
            l.adp = {"about", "above", "across", "after", "against", "along", "amid",
                     "among", "around", "as", "at", "before", "behind", "below",
                     "beneath", "beside", "besides", "between", "beyond", "by",
                     "during", "for", "from", "in", "inside", "into", "near", "of",
                     "off", "on", "onto", "out", "outside", "over", "past", "through",
                     "throughout", "to", "toward", "towards", "under", "underneath",
                     "until", "up", "down", "upon", "with", "within", "without"};
            l.pron = {"i", "you", "he", "she", "it", "we", "they", "me", "him",
                      "us", "them", "who", "whom", "what", "which"};
            l.conj = {"and", "or", "but", "nor", "yet", "while", "when",
                      "because", "although", "than", "if"};
            l.verb = {"is", "are", "was", "were", "am", "be", "been", "being",
                      "has", "have", "had", "do", "does", "did", "will", "would",
                      "can", "could", "shall", "should", "may", "might", "must",
                      "stand", "stands", "sit", "sits", "sleep", "sleeps", "run",
                      "runs", "walk", "walks", "fly", "flies", "look", "looks",
                      "hold", "holds", "wear", "wears", "ride", "rides", "talk",
                      "talks", "play", "plays", "float", "floats", "glow", "glows",
                      "shine", "shines", "jump", "jumps", "swim", "swims", "read",
                      "reads", "eat", "eats", "drink", "drinks", "smile", "smiles",
                      "watch", "watches", "sing", "sings", "dance", "dances",
                      "rest", "rests", "hover", "hovers", "overlook", "overlooks",
                      "sail", "sails", "crash", "crashes", "cross", "crosses"};
            l.adj = {"red", "blue", "green", "yellow", "black", "white", "golden",
                     "purple", "orange", "pink", "gray", "grey", "brown", "silver",
                     "dark", "bright", "big", "small", "large", "tiny", "huge",
                     "little", "old", "young", "new", "ancient", "tall", "short",
                     "long", "wide", "narrow", "giant", "beautiful", "epic",
                     "detailed", "realistic", "majestic", "mysterious", "magical",
                     "futuristic", "medieval", "cute", "scary", "colorful",
                     "vibrant", "soft", "wooden", "foggy", "misty", "snowy",
                     "rainy", "stormy", "sunny", "crowded", "empty", "packed",
                     "full", "broken", "frozen", "hidden", "distant", "lonely",
                     "calm", "wild", "busy", "quiet", "deep", "high", "low"};
            l.adv = {"very", "quite", "too", "also", "now", "then", "here",
                     "there", "never", "always", "often", "almost"};
            l.num_words = {"one", "two", "three", "four", "five", "six", "seven",
                           "eight", "nine", "ten", "several", "many", "few",
                           "couple", "dozen"};
            // -ing words that are ordinary nouns, exempt from the participle
            // pass ("oil painting" must stay a noun chunk).
            l.ing_nouns = {"thing", "things", "king", "kings", "ring", "rings",
                           "wing", "wings", "string", "strings", "spring",
                           "building", "buildings", "painting", "paintings",
                           "drawing", "drawings", "lightning", "morning",
                           "evening", "ceiling", "clothing", "wedding", "viking",
                           "vikings", "dumpling", "dumplings", "duckling",
                           "ducklings", "darling", "sibling", "siblings"};
            return l;
        }();
        return L;
    }

    static std::vector<ParseToken> tokenize(std::string_view sentence) {
        std::vector<ParseToken> toks;
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) {
                toks.push_back({cur, PosTag::Noun, -1, "dep"});
                cur.clear();
            }
        };
        auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
        for (size_t i = 0; i < sentence.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(sentence[i]);
            if (is_word_char(c)) {
                cur.push_back(static_cast<char>(c));
            } else if ((c == '\'' || c == '-') && !cur.empty() && i + 1 < sentence.size() &&
                       is_word_char(static_cast<unsigned char>(sentence[i + 1]))) {
                cur.push_back(static_cast<char>(c));
            } else if (std::isspace(c)) {
                flush();
            } else {
                flush();
                toks.push_back({std::string(1, static_cast<char>(c)), PosTag::Punct, -1, "punct"});
            }
        }
        flush();
        return toks;
    }

    static bool all_digits(const std::string& s) {
        if (s.empty()) return false;
        for (unsigned char c : s) {
            if (!std::isdigit(c)) return false;
        }
        return true;
    }

    static bool ends_with(const std::string& s, std::string_view suffix) {
        return s.size() >= suffix.size() &&
               s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    }

    static void tag_tokens(std::vector<ParseToken>& toks) {
        const Lexicons& L = lex();
        for (size_t i = 0; i < toks.size(); ++i) {
            ParseToken& t = toks[i];
            if (t.tag == PosTag::Punct) continue;
            std::string w = fold_case(t.text);
            if (all_digits(w)) {
                t.tag = PosTag::Num;
            } else if (L.det.count(w)) {
                t.tag = PosTag::Det;
            } else if (L.adp.count(w)) {
                t.tag = PosTag::Adp;
            } else if (L.pron.count(w)) {
                t.tag = PosTag::Pron;
            } else if (L.conj.count(w)) {
                t.tag = PosTag::Conj;
            } else if (L.verb.count(w)) {
                t.tag = PosTag::Verb;
            } else if (L.num_words.count(w)) {
                t.tag = PosTag::Num;
            } else if (L.adj.count(w) || ends_with(w, "ful") || ends_with(w, "ous") ||
                       ends_with(w, "less") || ends_with(w, "ish")) {
                t.tag = PosTag::Adj;
            } else if (L.adv.count(w) || (ends_with(w, "ly") && w.size() > 3)) {
                t.tag = PosTag::Adv;
            } else {
                t.tag = PosTag::Noun;
                // Capitalized away from the sentence start reads as a name.
                if (i > 0 && std::isupper(static_cast<unsigned char>(t.text[0]))) {
                    t.tag = PosTag::Propn;
                }
            }
        }
        // Participle pass: an unknown -ing word is a verb after an auxiliary
        // ("are talking"), an adjective before a noun ("a glowing castle"),
        // and a verb otherwise ("a man running through fog").
        for (size_t i = 0; i < toks.size(); ++i) {
            ParseToken& t = toks[i];
            if ((t.tag != PosTag::Noun && t.tag != PosTag::Propn)) continue;
            std::string w = fold_case(t.text);
            if (!ends_with(w, "ing") || w.size() <= 4 || lex().verb.count(w) ||
                lex().ing_nouns.count(w)) {
                continue;
            }
            bool after_aux = i > 0 && toks[i - 1].tag == PosTag::Verb;
            bool before_noun = i + 1 < toks.size() &&
                               (toks[i + 1].tag == PosTag::Noun || toks[i + 1].tag == PosTag::Propn);
            if (after_aux) {
                t.tag = PosTag::Verb;
            } else if (before_noun) {
                t.tag = PosTag::Adj;
            } else {
                t.tag = PosTag::Verb;
            }
        }
    }

    static bool chunk_member(PosTag t) {
        return t == PosTag::Det || t == PosTag::Adj || t == PosTag::Num ||
               t == PosTag::Noun || t == PosTag::Propn;
    }
    static bool is_nounish(PosTag t) { return t == PosTag::Noun || t == PosTag::Propn; }

    // Maximal runs of {DET, ADJ, NUM, NOUN, PROPN} holding at least one
    // noun, trimmed so the chunk ends on its last noun.
    static std::vector<NounChunkSpan> find_noun_chunks(const std::vector<ParseToken>& toks) {
        std::vector<NounChunkSpan> spans;
        int n = static_cast<int>(toks.size());
        int i = 0;
        while (i < n) {
            if (!chunk_member(toks[i].tag)) {
                ++i;
                continue;
            }
            int begin = i;
            while (i < n && chunk_member(toks[i].tag)) ++i;
            int last_noun = -1;
            for (int j = begin; j < i; ++j) {
                if (is_nounish(toks[j].tag)) last_noun = j;
            }
            if (last_noun >= 0) {
                spans.push_back({begin, last_noun + 1, last_noun});
            }
        }
        return spans;
    }

    static void attach_heads(ParseResult& res) {
        std::vector<ParseToken>& toks = res.tokens;
        int n = static_cast<int>(toks.size());

        std::vector<int> chunk_of(n, -1);
        for (size_t c = 0; c < res.noun_chunks.size(); ++c) {
            for (int j = res.noun_chunks[c].begin; j < res.noun_chunks[c].end; ++j) {
                chunk_of[j] = static_cast<int>(c);
            }
        }

        // Object claiming: each preposition takes the next chunk head to its
        // right; a preposition arriving while one is still waiting chains
        // under it ("out of the box").
        std::vector<int> pobj_claim(n, -1);  // chunk head index -> claiming ADP
        std::vector<int> prep_chain(n, -1);  // ADP index -> outer ADP it chains under
        std::vector<bool> adp_has_obj(n, false);
        int pending = -1;
        for (int i = 0; i < n; ++i) {
            if (toks[i].tag == PosTag::Adp) {
                if (pending >= 0) prep_chain[i] = pending;
                pending = i;
            } else if (chunk_of[i] >= 0 && res.noun_chunks[chunk_of[i]].head == i) {
                if (pending >= 0) {
                    pobj_claim[i] = pending;
                    adp_has_obj[pending] = true;
                    pending = -1;
                }
            }
        }

        // Root: first verb, else first unclaimed chunk head, else token 0.
        int root = -1;
        for (int i = 0; i < n && root < 0; ++i) {
            if (toks[i].tag == PosTag::Verb) root = i;
        }
        if (root < 0) {
            for (const auto& ch : res.noun_chunks) {
                if (pobj_claim[ch.head] < 0) {
                    root = ch.head;
                    break;
                }
            }
        }
        if (root < 0) root = 0;

        auto nearest_verb = [&](int i) {
            for (int j = i - 1; j >= 0; --j) {
                if (toks[j].tag == PosTag::Verb) return j;
            }
            for (int j = i + 1; j < n; ++j) {
                if (toks[j].tag == PosTag::Verb) return j;
            }
            return -1;
        };
        auto nearest_prev_head = [&](int i) {
            for (int j = i - 1; j >= 0; --j) {
                if (toks[j].tag == PosTag::Verb) return j;
                if (chunk_of[j] >= 0 && res.noun_chunks[chunk_of[j]].head == j) return j;
            }
            return -1;
        };

        for (int i = 0; i < n; ++i) {
            ParseToken& t = toks[i];
            if (i == root) {
                t.head = -1;
                t.dep = "root";
                continue;
            }
            int c = chunk_of[i];
            if (c >= 0 && res.noun_chunks[c].head != i) {
                t.head = res.noun_chunks[c].head;
                switch (t.tag) {
                    case PosTag::Det: t.dep = "det"; break;
                    case PosTag::Adj: t.dep = "amod"; break;
                    case PosTag::Num: t.dep = "nummod"; break;
                    default: t.dep = "compound"; break;
                }
                continue;
            }
            if (c >= 0) {  // chunk head
                if (pobj_claim[i] >= 0) {
                    t.head = pobj_claim[i];
                    t.dep = "pobj";
                } else {
                    int v = nearest_verb(i);
                    if (v >= 0) {
                        t.head = v;
                        t.dep = v > i ? "nsubj" : "dobj";
                    } else {
                        t.head = root;
                        t.dep = "conj";
                    }
                }
                continue;
            }
            switch (t.tag) {
                case PosTag::Adp: {
                    if (prep_chain[i] >= 0) {
                        t.head = prep_chain[i];
                    } else {
                        int h = nearest_prev_head(i);
                        t.head = h >= 0 ? h : root;
                    }
                    t.dep = adp_has_obj[i] ? "prep" : "prt";
                    break;
                }
                case PosTag::Adv: {
                    int v = nearest_verb(i);
                    t.head = v >= 0 ? v : root;
                    t.dep = "advmod";
                    break;
                }
                case PosTag::Verb: {
                    t.head = root;
                    t.dep = "conj";
                    break;
                }
                case PosTag::Pron: {
                    int v = nearest_verb(i);
                    if (v >= 0) {
                        t.head = v;
                        t.dep = v > i ? "nsubj" : "dobj";
                    } else {
                        t.head = root;
                        t.dep = "dep";
                    }
                    break;
                }
                case PosTag::Conj: {
                    t.head = root;
                    t.dep = "cc";
                    break;
                }
                case PosTag::Punct: {
                    t.head = root;
                    t.dep = "punct";
                    break;
                }
                default: {
                    t.head = root;
                    t.dep = "dep";
                    break;
                }
            }
        }
    }
};

// Children adjacency for subtree walks.
inline std::vector<std::vector<int>> children_of(const ParseResult& parse) {
    std::vector<std::vector<int>> kids(parse.tokens.size());
    for (size_t i = 0; i < parse.tokens.size(); ++i) {
        int h = parse.tokens[i].head;
        if (h >= 0) kids[static_cast<size_t>(h)].push_back(static_cast<int>(i));
    }
    return kids;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_PARSER_HPP
