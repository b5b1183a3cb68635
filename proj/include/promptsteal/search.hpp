#ifndef PROMPTSTEAL_SEARCH_HPP
#define PROMPTSTEAL_SEARCH_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/matching.hpp"
#include "promptsteal/modifier.hpp"
#include "promptsteal/prompt.hpp"
#include "promptsteal/rng.hpp"

namespace promptsteal {

struct AttackConfig {
    int query_budget = 200;
    double gain_threshold = 0.005;
    int dynamic_ratio = 1;
    int static_ratio = 4;
    int caption_count = 400;
    double caption_temperature = 1.0;
    uint64_t proxy_seed = 0;
    double sem_weight = 1.0;
    double per_weight = 1.0;
    std::optional<double> early_stop_fidelity;  // disabled by default
    int samples_per_query = 1;

    void validate() const {
        if (query_budget < 0) throw ConfigError("attack: query_budget must be >= 0");
        if (!(gain_threshold >= 0.0) || !std::isfinite(gain_threshold)) {
            throw ConfigError("attack: gain_threshold must be finite and >= 0");
        }
        if (dynamic_ratio < 0 || static_ratio < 0 || dynamic_ratio + static_ratio == 0) {
            throw ConfigError("attack: budget ratios must be >= 0 and not both zero");
        }
        if (caption_count < 1) throw ConfigError("attack: caption_count must be >= 1");
        if (!(caption_temperature > 0.0)) {
            throw ConfigError("attack: caption_temperature must be > 0");
        }
        if (!(sem_weight >= 0.0) || !(per_weight >= 0.0) || sem_weight + per_weight <= 0.0) {
            throw ConfigError("attack: fidelity weights must be >= 0 with a positive sum");
        }
        if (samples_per_query < 1) throw ConfigError("attack: samples_per_query must be >= 1");
        if (early_stop_fidelity && !std::isfinite(*early_stop_fidelity)) {
            throw ConfigError("attack: early_stop_fidelity must be finite");
        }
    }
};

inline nlohmann::json attack_config_to_json(const AttackConfig& c) {
    nlohmann::json j{{"query_budget", c.query_budget},
                     {"gain_threshold", c.gain_threshold},
                     {"dynamic_ratio", c.dynamic_ratio},
                     {"static_ratio", c.static_ratio},
                     {"caption_count", c.caption_count},
                     {"caption_temperature", c.caption_temperature},
                     {"proxy_seed", c.proxy_seed},
                     {"sem_weight", c.sem_weight},
                     {"per_weight", c.per_weight},
                     {"samples_per_query", c.samples_per_query}};
    if (c.early_stop_fidelity) {
        j["early_stop_fidelity"] = *c.early_stop_fidelity;
    } else {
        j["early_stop_fidelity"] = nullptr;
    }
    return j;
}

inline AttackConfig attack_config_from_json(const nlohmann::json& j) {
    static const std::unordered_set<std::string> known = {
        "query_budget",   "gain_threshold", "dynamic_ratio",      "static_ratio",
        "caption_count",  "caption_temperature", "proxy_seed",    "sem_weight",
        "per_weight",     "early_stop_fidelity", "samples_per_query"};
    if (!j.is_object()) throw ConfigError("attack config must be a JSON object");
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw ConfigError("attack config: unknown key \"" + item.key() + "\"");
        }
    }
    AttackConfig c;
    c.query_budget = j.value("query_budget", c.query_budget);
    c.gain_threshold = j.value("gain_threshold", c.gain_threshold);
    c.dynamic_ratio = j.value("dynamic_ratio", c.dynamic_ratio);
    c.static_ratio = j.value("static_ratio", c.static_ratio);
    c.caption_count = j.value("caption_count", c.caption_count);
    c.caption_temperature = j.value("caption_temperature", c.caption_temperature);
    c.proxy_seed = j.value("proxy_seed", c.proxy_seed);
    c.sem_weight = j.value("sem_weight", c.sem_weight);
    c.per_weight = j.value("per_weight", c.per_weight);
    c.samples_per_query = j.value("samples_per_query", c.samples_per_query);
    if (j.contains("early_stop_fidelity") && !j["early_stop_fidelity"].is_null()) {
        c.early_stop_fidelity = j["early_stop_fidelity"].get<double>();
    }
    c.validate();
    return c;
}

struct BudgetSplit {
    int dynamic_budget = 0;
    int static_budget = 0;
};

// Pre-allocate the query budget between the dynamic and static phases in
// the configured ratio (rounded to the nearest whole query). Leftover goes
// to the static side; unused dynamic budget does not roll over at runtime.
inline BudgetSplit allocate_budget(int total, int dynamic_ratio, int static_ratio) {
    if (total < 0) throw ArgumentError("allocate_budget: negative budget");
    if (dynamic_ratio < 0 || static_ratio < 0 || dynamic_ratio + static_ratio == 0) {
        throw ArgumentError("allocate_budget: ratios must be >= 0 and not both zero");
    }
    double frac = static_cast<double>(dynamic_ratio) /
                  static_cast<double>(dynamic_ratio + static_ratio);
    int dyn = static_cast<int>(std::lround(total * frac));
    if (dyn > total) dyn = total;
    if (dyn < 0) dyn = 0;
    return {dyn, total - dyn};
}

struct FidelityGain {
    double sem = 0.0;
    double per = 0.0;
    double total = 0.0;
};

// One proxy probe: how much does appending the candidate move the proxy's
// output toward the showcase? sem is the change in image-embedding cosine,
// per the change in (negated) perceptual distance, total the weighted sum.
inline FidelityGain fidelity_gain(const ProxyModel& proxy, const ImageEncoder& image_enc,
                                  const PerceptualMetric& perceptual,
                                  std::string_view base_prompt, std::string_view candidate_text,
                                  const Image& showcase, uint64_t seed, double sem_weight = 1.0,
                                  double per_weight = 1.0, const Image* base_image = nullptr) {
    Embedding showcase_emb = image_enc.encode_image(showcase);
    Image base = base_image ? *base_image : proxy.generate(base_prompt, seed);
    Image trial = proxy.generate(append_modifier(base_prompt, candidate_text), seed);
    double base_sem = cosine_similarity(image_enc.encode_image(base), showcase_emb);
    double trial_sem = cosine_similarity(image_enc.encode_image(trial), showcase_emb);
    double base_per = -perceptual.distance(base, showcase);
    double trial_per = -perceptual.distance(trial, showcase);
    FidelityGain g;
    g.sem = trial_sem - base_sem;
    g.per = trial_per - base_per;
    g.total = sem_weight * g.sem + per_weight * g.per;
    return g;
}

struct QueryRecord {
    int query_index = 0;
    ModifierCandidate candidate;
    FidelityGain gain;
    bool accepted = false;
    std::string base_prompt;  // snapshot before this query
    std::string error;        // non-empty when the proxy query failed
};

struct QueryLog {
    std::vector<QueryRecord> entries;

    bool operator==(const QueryLog& o) const;
};

inline nlohmann::json query_record_to_json(const QueryRecord& r) {
    nlohmann::json j{{"query_index", r.query_index},
                     {"candidate",
                      {{"text", r.candidate.text},
                       {"kind", to_string(r.candidate.kind)},
                       {"source", r.candidate.source}}},
                     {"gain", {{"sem", r.gain.sem}, {"per", r.gain.per}, {"total", r.gain.total}}},
                     {"accepted", r.accepted},
                     {"base_prompt", r.base_prompt}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline QueryRecord query_record_from_json(const nlohmann::json& j) {
    QueryRecord r;
    r.query_index = j.at("query_index").get<int>();
    r.candidate.text = j.at("candidate").at("text").get<std::string>();
    r.candidate.kind = modifier_kind_from_string(j.at("candidate").at("kind").get<std::string>());
    r.candidate.source = j.at("candidate").value("source", std::string());
    r.gain.sem = j.at("gain").at("sem").get<double>();
    r.gain.per = j.at("gain").at("per").get<double>();
    r.gain.total = j.at("gain").at("total").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    r.base_prompt = j.at("base_prompt").get<std::string>();
    r.error = j.value("error", std::string());
    return r;
}

inline bool QueryLog::operator==(const QueryLog& o) const {
    if (entries.size() != o.entries.size()) return false;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (query_record_to_json(entries[i]) != query_record_to_json(o.entries[i])) return false;
    }
    return true;
}

// JSON-lines serialization: one record per line, in query order.
inline std::string query_log_to_jsonl(const QueryLog& log) {
    std::string out;
    for (const QueryRecord& r : log.entries) {
        out += query_record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline QueryLog query_log_from_jsonl(std::string_view text) {
    QueryLog log;
    std::istringstream in{std::string(text)};
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            log.entries.push_back(query_record_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw IoError("query log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return log;
}

struct GreedyResult {
    Prompt prompt;
    QueryLog log;
    int proxy_calls = 0;       // actual generator invocations, base included
    double final_sem = 0.0;    // cosine of the final base image vs showcase
    double final_per = 0.0;    // negated perceptual distance of the same
    bool early_stopped = false;
};

namespace detail {

inline std::vector<uint64_t> sample_seeds(uint64_t proxy_seed, int k) {
    std::vector<uint64_t> seeds(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        seeds[static_cast<size_t>(i)] =
            i == 0 ? proxy_seed : rng::mix(proxy_seed, 0x5EEDull + static_cast<uint64_t>(i));
    }
    return seeds;
}

}  // namespace detail

// Greedy proxy-guided prompt search. Starting from the base prompt, walk
// the ranked dynamic list and then the ranked static list; each candidate
// is appended, rendered through the proxy, and kept iff the weighted
// fidelity gain strictly exceeds the threshold. The two phases get fixed
// budget shares up front. Passing a prior run's log resumes it: accepted
// candidates are replayed and already-tried ones skipped, at the cost of
// one fresh base render.
inline GreedyResult greedy_proxy_query(const AttackConfig& config, const std::string& base_prompt,
                                       const RankedModifierList& dynamic_ranked,
                                       const RankedModifierList& static_ranked,
                                       const Image& showcase, const BackendBundle& bundle,
                                       const QueryLog* resume = nullptr) {
    config.validate();
    bundle.require_complete();
    showcase.validate("greedy showcase");
    if (trim(base_prompt).empty()) {
        throw ArgumentError("greedy_proxy_query: empty base prompt");
    }
    for (const ScoredModifier& e : dynamic_ranked.entries) {
        if (!is_dynamic(e.candidate.kind)) {
            throw ArgumentError("greedy_proxy_query: static candidate in dynamic list");
        }
    }
    for (const ScoredModifier& e : static_ranked.entries) {
        if (is_dynamic(e.candidate.kind)) {
            throw ArgumentError("greedy_proxy_query: dynamic candidate in static list");
        }
    }

    const BudgetSplit split =
        allocate_budget(config.query_budget, config.dynamic_ratio, config.static_ratio);
    const int k = config.samples_per_query;
    const std::vector<uint64_t> seeds = detail::sample_seeds(config.proxy_seed, k);
    const Embedding showcase_emb = bundle.image_encoder->encode_image(showcase);

    GreedyResult res;
    res.prompt.subject = base_prompt;
    std::string cur = base_prompt;
    int qi = 0;
    int spent_dynamic = 0;
    int spent_static = 0;
    std::unordered_set<std::string> tried;

    if (resume) {
        for (const QueryRecord& rec : resume->entries) {
            if (rec.base_prompt != cur) {
                throw ArgumentError("resume log does not replay against this base prompt");
            }
            tried.insert(fold_case(normalize_whitespace(rec.candidate.text)));
            (is_dynamic(rec.candidate.kind) ? spent_dynamic : spent_static) += k;
            if (rec.accepted) {
                cur = append_modifier(cur, rec.candidate.text);
                res.prompt.add(rec.candidate);
            }
            ++qi;
        }
        res.log.entries = resume->entries;
    }

    // Fresh base render (k samples); this is the one query outside the
    // candidate budget.
    std::vector<Image> base_imgs;
    double base_sem = 0.0;
    double base_per = 0.0;
    auto score_prompt = [&](const std::string& text, std::vector<Image>& imgs, double& sem,
                            double& per) {
        imgs.clear();
        sem = 0.0;
        per = 0.0;
        for (int s = 0; s < k; ++s) {
            Image img = bundle.proxy->generate(text, seeds[static_cast<size_t>(s)]);
            ++res.proxy_calls;
            sem += cosine_similarity(bundle.image_encoder->encode_image(img), showcase_emb);
            per += -bundle.perceptual->distance(img, showcase);
            imgs.push_back(std::move(img));
        }
        sem /= k;
        per /= k;
    };
    score_prompt(cur, base_imgs, base_sem, base_per);

    auto fidelity = [&] { return config.sem_weight * base_sem + config.per_weight * base_per; };
    if (config.early_stop_fidelity && fidelity() >= *config.early_stop_fidelity) {
        res.early_stopped = true;
    }

    auto run_phase = [&](const RankedModifierList& list, int budget, int& spent) {
        for (const ScoredModifier& entry : list.entries) {
            if (res.early_stopped || spent + k > budget) break;
            std::string folded = fold_case(normalize_whitespace(entry.candidate.text));
            if (tried.count(folded)) continue;
            if (res.prompt.has_modifier(entry.candidate.text)) continue;
            std::string trial = append_modifier(cur, entry.candidate.text);
            QueryRecord rec;
            rec.query_index = qi;
            rec.candidate = entry.candidate;
            rec.base_prompt = cur;
            std::vector<Image> imgs;
            double sem = 0.0;
            double per = 0.0;
            bool ok = true;
            try {
                score_prompt(trial, imgs, sem, per);
            } catch (const Error& e) {
                ok = false;
                rec.error = e.what();
            }
            spent += k;
            if (ok) {
                rec.gain.sem = sem - base_sem;
                rec.gain.per = per - base_per;
                rec.gain.total =
                    config.sem_weight * rec.gain.sem + config.per_weight * rec.gain.per;
                rec.accepted = rec.gain.total > config.gain_threshold;
            }
            res.log.entries.push_back(rec);
            ++qi;
            tried.insert(folded);
            if (rec.accepted) {
                cur = std::move(trial);
                res.prompt.add(entry.candidate);
                base_imgs = std::move(imgs);
                base_sem = sem;
                base_per = per;
                if (config.early_stop_fidelity && fidelity() >= *config.early_stop_fidelity) {
                    res.early_stopped = true;
                }
            }
        }
    };

    run_phase(dynamic_ranked, split.dynamic_budget, spent_dynamic);
    run_phase(static_ranked, split.static_budget, spent_static);

    res.final_sem = base_sem;
    res.final_per = base_per;
    return res;
}

// Weighted fidelity of a prompt's proxy render against a showcase; the same
// objective the greedy loop climbs. Costs samples_per_query proxy calls.
inline double combined_similarity(const BackendBundle& bundle, const std::string& prompt_text,
                                  const Image& showcase, const AttackConfig& config) {
    const std::vector<uint64_t> seeds =
        detail::sample_seeds(config.proxy_seed, config.samples_per_query);
    Embedding showcase_emb = bundle.image_encoder->encode_image(showcase);
    double sem = 0.0;
    double per = 0.0;
    for (uint64_t s : seeds) {
        Image img = bundle.proxy->generate(prompt_text, s);
        sem += cosine_similarity(bundle.image_encoder->encode_image(img), showcase_emb);
        per += -bundle.perceptual->distance(img, showcase);
    }
    sem /= static_cast<double>(seeds.size());
    per /= static_cast<double>(seeds.size());
    return config.sem_weight * sem + config.per_weight * per;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_SEARCH_HPP
