#ifndef PROMPTSTEAL_EXTRACTION_HPP
#define PROMPTSTEAL_EXTRACTION_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/modifier.hpp"
#include "promptsteal/parser.hpp"
#include "promptsteal/prompt.hpp"

namespace promptsteal {

struct CaptionPool {
    std::vector<std::string> captions;
    double temperature = 1.0;
    uint64_t seed = 0;
};

inline CaptionPool make_caption_pool(const BackendBundle& bundle, const Image& showcase,
                                     int count, double temperature, uint64_t seed) {
    CaptionPool pool;
    pool.captions = sample_captions(bundle, showcase, count, temperature, seed);
    pool.temperature = temperature;
    pool.seed = seed;
    return pool;
}

namespace detail {

inline std::string join_tokens(const ParseResult& parse, int begin, int end) {
    std::string out;
    for (int i = begin; i < end; ++i) {
        if (!out.empty()) out += ' ';
        out += parse.tokens[i].text;
    }
    return out;
}

// Deps that stay inside a prepositional phrase when walking its subtree.
inline bool phrase_internal_dep(const std::string& dep) {
    return dep == "pobj" || dep == "prep" || dep == "det" || dep == "amod" ||
           dep == "nummod" || dep == "compound";
}

}  // namespace detail

// Subject-detail candidates: the parser's noun chunks, surface text joined
// with single spaces.
inline std::vector<ModifierCandidate> extract_noun_chunks(const ParseResult& parse,
                                                          std::string source = "") {
    std::vector<ModifierCandidate> out;
    for (const NounChunkSpan& span : parse.noun_chunks) {
        ModifierCandidate c;
        c.text = detail::join_tokens(parse, span.begin, span.end);
        c.kind = ModifierKind::DynamicSubjectDetail;
        c.source = source;
        out.push_back(std::move(c));
    }
    return out;
}

// Position candidates: for every preposition with an object, the phrase is
// the preposition plus its object subtree in token order. Chained
// prepositions each yield their own phrase ("in front of a large room"
// also yields "of a large room").
inline std::vector<ModifierCandidate> extract_prepositional_phrases(const ParseResult& parse,
                                                                    std::string source = "") {
    std::vector<ModifierCandidate> out;
    auto kids = children_of(parse);
    int n = static_cast<int>(parse.tokens.size());
    for (int i = 0; i < n; ++i) {
        if (parse.tokens[i].tag != PosTag::Adp) continue;
        bool has_obj = false;
        std::vector<int> members;
        std::vector<int> stack = {i};
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            members.push_back(cur);
            for (int k : kids[static_cast<size_t>(cur)]) {
                // Follow phrase-internal edges only; conj or punct children
                // would drag in unrelated clause material.
                if (!detail::phrase_internal_dep(parse.tokens[k].dep)) continue;
                // Any object anywhere below makes this a real phrase, so a
                // chained head like "out" in "out of the box" still emits.
                if (parse.tokens[k].dep == "pobj") has_obj = true;
                stack.push_back(k);
            }
        }
        if (!has_obj) continue;
        std::sort(members.begin(), members.end());
        std::string text;
        for (int m : members) {
            if (parse.tokens[m].tag == PosTag::Punct) continue;
            if (!text.empty()) text += ' ';
            text += parse.tokens[m].text;
        }
        if (text.empty()) continue;
        ModifierCandidate c;
        c.text = std::move(text);
        c.kind = ModifierKind::DynamicPosition;
        c.source = source;
        out.push_back(std::move(c));
    }
    return out;
}

// Parse one caption and run both extractors over it.
inline std::vector<ModifierCandidate> extract_from_caption(const DependencyParser& parser,
                                                           std::string_view caption,
                                                           std::string source = "") {
    ParseResult parse;
    try {
        parse = parser.parse(caption);
    } catch (const Error& e) {
        throw ExtractionError(std::string("caption failed to parse: ") + e.what(),
                              std::string(caption));
    }
    std::vector<ModifierCandidate> out = extract_noun_chunks(parse, source);
    auto preps = extract_prepositional_phrases(parse, std::move(source));
    out.insert(out.end(), preps.begin(), preps.end());
    return out;
}

// Union of candidates over all captions, in first-seen order. Captions that
// fail to parse are skipped and reported through on_skip; only a fully
// failed pool is an error.
inline ModifierPool build_dynamic_pool(
    const CaptionPool& captions, const DependencyParser& parser,
    const std::function<void(size_t, const std::string&)>& on_skip = {}) {
    if (captions.captions.empty()) {
        throw ArgumentError("build_dynamic_pool: caption pool is empty");
    }
    ModifierPool pool;
    size_t parsed = 0;
    for (size_t i = 0; i < captions.captions.size(); ++i) {
        std::vector<ModifierCandidate> cands;
        try {
            cands = extract_from_caption(parser, captions.captions[i],
                                         "caption:" + std::to_string(i));
        } catch (const ExtractionError& e) {
            if (on_skip) on_skip(i, e.what());
            continue;
        }
        ++parsed;
        for (ModifierCandidate& c : cands) pool.insert(std::move(c));
    }
    if (parsed == 0) {
        throw ExtractionError("no caption in the pool could be parsed",
                              captions.captions.front());
    }
    return pool;
}

// Static pool file format: UTF-8, one modifier per line, '#' comments and
// blank lines ignored.
inline ModifierPool load_static_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open static pool file: " + path);
    ModifierPool pool;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        pool.insert({t, ModifierKind::Static, "static_pool"});
    }
    if (pool.empty()) {
        throw ConfigError("static pool file has no modifiers: " + path);
    }
    return pool;
}

// Fraction of reference modifiers the pool covers, micro-averaged over all
// (prompt, modifier) pairs. Matching is exact after case folding and
// whitespace normalization.
inline double modifier_coverage(const ModifierPool& pool,
                                const std::vector<Prompt>& reference_prompts) {
    size_t total = 0;
    size_t hit = 0;
    for (const Prompt& p : reference_prompts) {
        for (const ModifierCandidate* m : p.all_modifiers()) {
            ++total;
            if (pool.contains(m->text)) ++hit;
        }
    }
    if (total == 0) {
        throw ArgumentError("modifier_coverage: reference prompts carry no modifiers");
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

inline nlohmann::json pool_to_json(const ModifierPool& pool) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ModifierCandidate& c : pool) {
        arr.push_back({{"text", c.text}, {"kind", to_string(c.kind)}, {"source", c.source}});
    }
    return arr;
}

inline ModifierPool pool_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw ArgumentError("modifier pool JSON must be an array");
    ModifierPool pool;
    for (const auto& item : arr) {
        ModifierCandidate c;
        c.text = item.at("text").get<std::string>();
        c.kind = modifier_kind_from_string(item.at("kind").get<std::string>());
        c.source = item.value("source", std::string());
        pool.insert(std::move(c));
    }
    return pool;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_EXTRACTION_HPP
