#ifndef PROMPTSTEAL_MATCHING_HPP
#define PROMPTSTEAL_MATCHING_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/modifier.hpp"
#include "promptsteal/prompt.hpp"

namespace promptsteal {

enum class MatchMethod { Contextual, Vanilla };

inline const char* to_string(MatchMethod m) {
    return m == MatchMethod::Contextual ? "contextual" : "vanilla";
}

inline MatchMethod match_method_from_string(std::string_view s) {
    if (s == "contextual") return MatchMethod::Contextual;
    if (s == "vanilla") return MatchMethod::Vanilla;
    throw ArgumentError("unknown match method: " + std::string(s));
}

inline std::string append_modifier(std::string_view base, std::string_view modifier) {
    std::string out(base);
    out += kPromptSeparator;
    out += modifier;
    return out;
}

// Contextual relevance of a modifier: how much closer to the showcase the
// base prompt moves when the modifier is appended. A modifier whose words
// add nothing new scores exactly zero.
inline double contextual_score(const TextEncoder& text_enc, const Embedding& showcase_embedding,
                               std::string_view base_prompt, std::string_view modifier) {
    Embedding with = text_enc.encode_text(append_modifier(base_prompt, modifier));
    Embedding without = text_enc.encode_text(base_prompt);
    return cosine_similarity(with, showcase_embedding) -
           cosine_similarity(without, showcase_embedding);
}

// Context-free baseline: the modifier is scored alone against the showcase.
inline double vanilla_score(const TextEncoder& text_enc, const Embedding& showcase_embedding,
                            std::string_view modifier) {
    return cosine_similarity(text_enc.encode_text(modifier), showcase_embedding);
}

inline double contextual_score(const TextEncoder& text_enc, const ImageEncoder& image_enc,
                               const Image& showcase, std::string_view base_prompt,
                               std::string_view modifier) {
    return contextual_score(text_enc, image_enc.encode_image(showcase), base_prompt, modifier);
}

inline double vanilla_score(const TextEncoder& text_enc, const ImageEncoder& image_enc,
                            const Image& showcase, std::string_view modifier) {
    return vanilla_score(text_enc, image_enc.encode_image(showcase), modifier);
}

struct ScoredModifier {
    ModifierCandidate candidate;
    double score = 0.0;
};

struct RankedModifierList {
    std::vector<ScoredModifier> entries;
    MatchMethod method = MatchMethod::Contextual;
    std::string base_prompt;
};

// Score every pool candidate and sort best-first. Candidates the encoder
// rejects (all words unknown, for instance) are dropped, optionally
// reported through dropped. Ties break lexicographically on text so the
// order never depends on pool insertion details.
inline RankedModifierList rank_modifiers(const ModifierPool& pool, std::string_view base_prompt,
                                         const Embedding& showcase_embedding,
                                         const TextEncoder& text_enc, MatchMethod method,
                                         std::vector<std::string>* dropped = nullptr) {
    if (pool.empty()) throw ArgumentError("rank_modifiers: empty modifier pool");
    RankedModifierList out;
    out.method = method;
    out.base_prompt = std::string(base_prompt);
    for (const ModifierCandidate& c : pool) {
        try {
            // Probe the modifier alone. Text the encoder cannot represent at
            // all would otherwise score as a silent no-op under the
            // contextual method.
            text_enc.encode_text(c.text);
            double s = method == MatchMethod::Contextual
                           ? contextual_score(text_enc, showcase_embedding, base_prompt, c.text)
                           : vanilla_score(text_enc, showcase_embedding, c.text);
            out.entries.push_back({c, s});
        } catch (const Error& e) {
            if (dropped) dropped->push_back(c.text + ": " + e.what());
        }
    }
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const ScoredModifier& a, const ScoredModifier& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.candidate.text < b.candidate.text;
                     });
    return out;
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("pearson: length mismatch");
    size_t n = x.size();
    if (n < 3) throw ArgumentError("pearson: need at least 3 samples");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw NumericError("pearson: zero variance input");
    }
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

struct PccReport {
    MatchMethod method = MatchMethod::Contextual;
    double pcc = 0.0;
    size_t sample_count = 0;
};

// One benchmark sample for ranking-consistency evaluation: a candidate
// modifier in the context of a base prompt, the showcase it was scored
// against, and the ground-truth / reconstructed prompt pair whose sentence
// similarity acts as the outcome variable.
struct ConsistencySample {
    std::string base_prompt;
    std::string modifier_text;
    std::string ground_truth_prompt;
    std::string stolen_prompt;
    Image showcase;
};

// Does a scoring method's relevance estimate predict final reconstruction
// quality? Returns the Pearson correlation between candidate scores and
// sentence-level similarity of the reconstructed prompts, for both methods
// on the same samples.
inline std::pair<PccReport, PccReport> ranking_consistency_eval(
    const std::vector<ConsistencySample>& samples, const TextEncoder& text_enc,
    const ImageEncoder& image_enc, const SentenceEncoder& sentence_enc) {
    if (samples.size() < 3) {
        throw ArgumentError("ranking_consistency_eval: need at least 3 samples");
    }
    std::vector<double> ctx, van, outcome;
    ctx.reserve(samples.size());
    van.reserve(samples.size());
    outcome.reserve(samples.size());
    for (const ConsistencySample& s : samples) {
        Embedding img = image_enc.encode_image(s.showcase);
        ctx.push_back(contextual_score(text_enc, img, s.base_prompt, s.modifier_text));
        van.push_back(vanilla_score(text_enc, img, s.modifier_text));
        outcome.push_back(cosine_similarity(sentence_enc.encode_sentence(s.ground_truth_prompt),
                                            sentence_enc.encode_sentence(s.stolen_prompt)));
    }
    PccReport c{MatchMethod::Contextual, pearson_correlation(ctx, outcome), samples.size()};
    PccReport v{MatchMethod::Vanilla, pearson_correlation(van, outcome), samples.size()};
    return {c, v};
}

inline nlohmann::json ranked_to_json(const RankedModifierList& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < list.entries.size(); ++i) {
        const ScoredModifier& e = list.entries[i];
        arr.push_back({{"text", e.candidate.text},
                       {"kind", to_string(e.candidate.kind)},
                       {"score", e.score},
                       {"rank", i}});
    }
    return arr;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_MATCHING_HPP
