#ifndef PROMPTSTEAL_HARNESS_HPP
#define PROMPTSTEAL_HARNESS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/dataset.hpp"
#include "promptsteal/defenses.hpp"
#include "promptsteal/extraction.hpp"
#include "promptsteal/matching.hpp"
#include "promptsteal/metrics.hpp"
#include "promptsteal/prompt.hpp"
#include "promptsteal/search.hpp"
#include "promptsteal/synthetic.hpp"

namespace promptsteal {

// ---------------------------------------------------------------------------
// Backend configuration

struct BackendConfig {
    std::string kind = "synthetic";  // "synthetic" or "external"

    // synthetic world
    uint64_t seed = 7;
    int dim = 64;
    double noise_sigma = 0.05;
    std::vector<std::string> vocabulary;  // empty -> built-in default list
    std::string vocabulary_file;          // newline-delimited, overrides nothing if empty

    // external model identifiers; adapters are stubs until wired to real
    // services, but the configuration surface is stable
    std::string caption_model = "blip2-flan-t5";
    std::string clip_model = "clip-vit-large";
    std::string proxy_model = "sdxl-turbo";
    std::string sbert_model = "all-mpnet-base-v2";
    std::string lpips_net = "alex";
    std::string device = "cpu";
    int external_dim = 512;

    void validate() const {
        if (kind != "synthetic" && kind != "external") {
            throw ConfigError("backend kind must be \"synthetic\" or \"external\"");
        }
        if (dim < 2) throw ConfigError("backend dim must be >= 2");
        if (external_dim < 2) throw ConfigError("backend external_dim must be >= 2");
        if (!(noise_sigma >= 0.0)) throw ConfigError("backend noise_sigma must be >= 0");
    }
};

inline nlohmann::json backend_config_to_json(const BackendConfig& c) {
    return {{"kind", c.kind},
            {"seed", c.seed},
            {"dim", c.dim},
            {"noise_sigma", c.noise_sigma},
            {"vocabulary", c.vocabulary},
            {"vocabulary_file", c.vocabulary_file},
            {"caption_model", c.caption_model},
            {"clip_model", c.clip_model},
            {"proxy_model", c.proxy_model},
            {"sbert_model", c.sbert_model},
            {"lpips_net", c.lpips_net},
            {"device", c.device},
            {"external_dim", c.external_dim}};
}

inline BackendConfig backend_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("backend config must be a JSON object");
    static const std::unordered_set<std::string> known = {
        "kind",        "seed",      "dim",         "noise_sigma", "vocabulary",
        "vocabulary_file", "caption_model", "clip_model", "proxy_model",
        "sbert_model", "lpips_net", "device",      "external_dim"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw ConfigError("backend config: unknown key \"" + item.key() + "\"");
        }
    }
    BackendConfig c;
    c.kind = j.value("kind", c.kind);
    c.seed = j.value("seed", c.seed);
    c.dim = j.value("dim", c.dim);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.vocabulary = j.value("vocabulary", c.vocabulary);
    c.vocabulary_file = j.value("vocabulary_file", c.vocabulary_file);
    c.caption_model = j.value("caption_model", c.caption_model);
    c.clip_model = j.value("clip_model", c.clip_model);
    c.proxy_model = j.value("proxy_model", c.proxy_model);
    c.sbert_model = j.value("sbert_model", c.sbert_model);
    c.lpips_net = j.value("lpips_net", c.lpips_net);
    c.device = j.value("device", c.device);
    c.external_dim = j.value("external_dim", c.external_dim);
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// External adapter stubs. They construct and wire fine so configs can be
// validated end to end, but every model call reports what is missing.

namespace external {

[[noreturn]] inline void not_wired(const std::string& what, const std::string& model) {
    throw CapabilityError(what + " adapter for \"" + model +
                          "\" is not wired to a real service in this build; use the "
                          "synthetic backend or supply an adapter implementation");
}

class StubTextEncoder final : public TextEncoder {
public:
    StubTextEncoder(std::string model, int dim) : model_(std::move(model)), dim_(dim) {}
    Embedding encode_text(std::string_view) const override { not_wired("text encoder", model_); }
    int dim() const override { return dim_; }

private:
    std::string model_;
    int dim_;
};

class StubImageEncoder final : public ImageEncoder {
public:
    StubImageEncoder(std::string model, int dim) : model_(std::move(model)), dim_(dim) {}
    Embedding encode_image(const Image&) const override { not_wired("image encoder", model_); }
    int dim() const override { return dim_; }

private:
    std::string model_;
    int dim_;
};

class StubCaptioner final : public Captioner {
public:
    explicit StubCaptioner(std::string message) : message_(std::move(message)) {}
    std::vector<std::string> sample_captions(const Image&, int, double, uint64_t) const override {
        throw CapabilityError(message_);
    }
    std::string caption(const Image&) const override { throw CapabilityError(message_); }

private:
    std::string message_;
};

class StubProxy final : public ProxyModel {
public:
    explicit StubProxy(std::string model) : model_(std::move(model)) {}
    Image generate(std::string_view, uint64_t) const override { not_wired("proxy", model_); }

private:
    std::string model_;
};

class StubPerceptual final : public PerceptualMetric {
public:
    explicit StubPerceptual(std::string net) : net_(std::move(net)) {}
    double distance(const Image&, const Image&) const override {
        not_wired("perceptual metric", net_);
    }

private:
    std::string net_;
};

class StubSentenceEncoder final : public SentenceEncoder {
public:
    StubSentenceEncoder(std::string model, int dim) : model_(std::move(model)), dim_(dim) {}
    Embedding encode_sentence(std::string_view) const override {
        not_wired("sentence encoder", model_);
    }
    int dim() const override { return dim_; }

private:
    std::string model_;
    int dim_;
};

}  // namespace external

// Builds bundles for a validated backend config. For synthetic backends
// the world is constructed once and shared across per-pair bundles.
class BackendFactory {
public:
    explicit BackendFactory(BackendConfig config) : config_(std::move(config)) {
        config_.validate();
        if (config_.kind == "synthetic") {
            SyntheticConfig sc;
            sc.seed = config_.seed;
            sc.dim = config_.dim;
            sc.noise_sigma = config_.noise_sigma;
            sc.vocabulary = resolve_vocabulary(config_);
            world_ = make_synthetic_world(std::move(sc));
        }
    }

    const BackendConfig& config() const { return config_; }
    const std::shared_ptr<const SyntheticWorld>& world() const { return world_; }

    BackendBundle bundle(std::optional<CaptionTarget> target = {}) const {
        if (world_) {
            BackendBundle b;
            if (target) {
                b.captioner = std::make_shared<SyntheticCaptioner>(world_, std::move(*target));
            } else {
                b.captioner = std::make_shared<external::StubCaptioner>(
                    "synthetic captioner has no caption target for this showcase; provide a "
                    "<id>.caption.json sidecar or a ground-truth prompt");
            }
            b.text_encoder = std::make_shared<SyntheticTextEncoder>(world_);
            b.image_encoder = std::make_shared<SyntheticImageEncoder>(world_);
            b.proxy = std::make_shared<SyntheticProxy>(world_);
            b.perceptual = std::make_shared<SyntheticPerceptual>();
            b.sentence_encoder = std::make_shared<SyntheticSentenceEncoder>(world_);
            b.parser = std::make_shared<RuleParser>();
            b.id = synthetic_backend_id(*world_);
            b.require_complete();
            return b;
        }
        BackendBundle b;
        b.captioner = std::make_shared<external::StubCaptioner>(
            "caption adapter for \"" + config_.caption_model + "\" is not wired in this build");
        b.text_encoder =
            std::make_shared<external::StubTextEncoder>(config_.clip_model, config_.external_dim);
        b.image_encoder =
            std::make_shared<external::StubImageEncoder>(config_.clip_model, config_.external_dim);
        b.proxy = std::make_shared<external::StubProxy>(config_.proxy_model);
        b.perceptual = std::make_shared<external::StubPerceptual>(config_.lpips_net);
        b.sentence_encoder = std::make_shared<external::StubSentenceEncoder>(
            config_.sbert_model, config_.external_dim);
        b.parser = std::make_shared<RuleParser>();
        b.id = "external(" + config_.clip_model + "," + config_.proxy_model + "," +
               config_.device + ")";
        b.require_complete();
        return b;
    }

private:
    static std::vector<std::string> resolve_vocabulary(const BackendConfig& c) {
        std::vector<std::string> vocab = c.vocabulary;
        if (!c.vocabulary_file.empty()) {
            std::ifstream in(c.vocabulary_file);
            if (!in) throw IoError("cannot open vocabulary file: " + c.vocabulary_file);
            std::string line;
            while (std::getline(in, line)) {
                std::string t = trim(line);
                if (!t.empty() && t[0] != '#') vocab.push_back(t);
            }
        }
        if (vocab.empty()) vocab = default_vocabulary();
        return vocab;
    }

    BackendConfig config_;
    std::shared_ptr<const SyntheticWorld> world_;
};

// ---------------------------------------------------------------------------
// Run configuration and report

struct RunConfig {
    BackendConfig backend;
    AttackConfig attack;
    std::string static_pool_path;
    MatchMethod ranking = MatchMethod::Contextual;
    std::optional<std::string> base_prompt_override;
    double asr_threshold = kDefaultAsrThreshold;

    void validate() const {
        backend.validate();
        attack.validate();
        if (!(asr_threshold > 0.0) || !(asr_threshold < 1.0)) {
            throw ConfigError("run config: asr_threshold must be in (0, 1)");
        }
    }
};

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j{{"backend", backend_config_to_json(c.backend)},
                     {"attack", attack_config_to_json(c.attack)},
                     {"static_pool", c.static_pool_path},
                     {"ranking", to_string(c.ranking)},
                     {"asr_threshold", c.asr_threshold}};
    if (c.base_prompt_override) {
        j["base_prompt"] = *c.base_prompt_override;
    } else {
        j["base_prompt"] = nullptr;
    }
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::unordered_set<std::string> known = {
        "backend", "attack", "static_pool", "ranking", "asr_threshold", "base_prompt"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw ConfigError("run config: unknown key \"" + item.key() + "\"");
        }
    }
    RunConfig c;
    if (j.contains("backend")) c.backend = backend_config_from_json(j["backend"]);
    if (j.contains("attack")) c.attack = attack_config_from_json(j["attack"]);
    c.static_pool_path = j.value("static_pool", c.static_pool_path);
    if (j.contains("ranking")) {
        c.ranking = match_method_from_string(j["ranking"].get<std::string>());
    }
    c.asr_threshold = j.value("asr_threshold", c.asr_threshold);
    if (j.contains("base_prompt") && !j["base_prompt"].is_null()) {
        c.base_prompt_override = j["base_prompt"].get<std::string>();
    }
    c.validate();
    return c;
}

inline nlohmann::json prompt_to_json(const Prompt& p) {
    auto cand = [](const ModifierCandidate& c) {
        return nlohmann::json{{"text", c.text}, {"kind", to_string(c.kind)}, {"source", c.source}};
    };
    nlohmann::json dyn = nlohmann::json::array();
    for (const auto& m : p.dynamic_accepted) dyn.push_back(cand(m));
    nlohmann::json sta = nlohmann::json::array();
    for (const auto& m : p.static_accepted) sta.push_back(cand(m));
    return {{"subject", p.subject}, {"dynamic_accepted", dyn}, {"static_accepted", sta}};
}

inline Prompt prompt_from_json(const nlohmann::json& j) {
    Prompt p;
    p.subject = j.at("subject").get<std::string>();
    auto read = [](const nlohmann::json& arr, std::vector<ModifierCandidate>& out) {
        for (const auto& item : arr) {
            ModifierCandidate c;
            c.text = item.at("text").get<std::string>();
            c.kind = modifier_kind_from_string(item.at("kind").get<std::string>());
            c.source = item.value("source", std::string());
            out.push_back(std::move(c));
        }
    };
    read(j.at("dynamic_accepted"), p.dynamic_accepted);
    read(j.at("static_accepted"), p.static_accepted);
    return p;
}

struct StageTiming {
    std::string stage;
    double millis = 0.0;
};

struct RunReport {
    std::string pair_id;
    std::string backend_id;
    RunConfig config;
    std::string base_prompt;
    Prompt stolen;
    std::string stolen_text;
    QueryLog log;
    int proxy_calls = 0;
    nlohmann::json sizes;  // caption/pool/ranking counts
    std::vector<std::string> notes;
    std::optional<MetricsReport> metrics;
    std::vector<StageTiming> timings;
};

// Timings are wall-clock noise; everything else must replay bit for bit
// from the same config, so the canonical form drops them.
inline nlohmann::json run_report_to_json(const RunReport& r, bool include_timings = true) {
    nlohmann::json j{{"pair_id", r.pair_id},
                     {"backend_id", r.backend_id},
                     {"config", run_config_to_json(r.config)},
                     {"base_prompt", r.base_prompt},
                     {"stolen", prompt_to_json(r.stolen)},
                     {"stolen_text", r.stolen_text},
                     {"proxy_calls", r.proxy_calls},
                     {"sizes", r.sizes},
                     {"notes", r.notes}};
    nlohmann::json log = nlohmann::json::array();
    for (const QueryRecord& rec : r.log.entries) log.push_back(query_record_to_json(rec));
    j["query_log"] = log;
    if (r.metrics) {
        j["metrics"] = metrics_report_to_json(*r.metrics);
    } else {
        j["metrics"] = nullptr;
    }
    if (include_timings) {
        nlohmann::json t = nlohmann::json::array();
        for (const StageTiming& st : r.timings) {
            t.push_back({{"stage", st.stage}, {"millis", st.millis}});
        }
        j["timings"] = t;
    }
    return j;
}

inline std::string canonical_run_report(const RunReport& r) {
    return run_report_to_json(r, false).dump();
}

inline RunReport run_report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.backend_id = j.at("backend_id").get<std::string>();
    r.config = run_config_from_json(j.at("config"));
    r.base_prompt = j.at("base_prompt").get<std::string>();
    r.stolen = prompt_from_json(j.at("stolen"));
    r.stolen_text = j.at("stolen_text").get<std::string>();
    r.proxy_calls = j.at("proxy_calls").get<int>();
    r.sizes = j.value("sizes", nlohmann::json::object());
    r.notes = j.value("notes", std::vector<std::string>{});
    for (const auto& rec : j.at("query_log")) {
        r.log.entries.push_back(query_record_from_json(rec));
    }
    if (j.contains("metrics") && !j["metrics"].is_null()) {
        r.metrics = metrics_report_from_json(j["metrics"]);
    }
    if (j.contains("timings")) {
        for (const auto& t : j["timings"]) {
            r.timings.push_back({t.at("stage").get<std::string>(), t.at("millis").get<double>()});
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Attack orchestration

namespace detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename F>
    auto run(const std::string& stage, F&& f) -> decltype(f()) {
        auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                record(stage, start);
            } else {
                auto out = f();
                record(stage, start);
                return out;
            }
        } catch (const StageError&) {
            record(stage, start);
            throw;
        } catch (const Error& e) {
            record(stage, start);
            throw StageError(stage, e.what());
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        auto end = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(end - start).count();
        sink_.push_back({stage, ms});
    }
    std::vector<StageTiming>& sink_;
};

inline CaptionTarget target_for_pair(const DatasetPair& pair) {
    if (pair.caption_target) return *pair.caption_target;
    if (pair.ground_truth_prompt) {
        // Fall back to treating the ground-truth prompt's segments as the
        // visible scene; fine for hand-made datasets without sidecars.
        Prompt gt = Prompt::parse_flat(*pair.ground_truth_prompt);
        CaptionTarget t;
        t.subject = gt.subject;
        for (const ModifierCandidate* m : gt.all_modifiers()) t.phrases.push_back(m->text);
        return t;
    }
    throw ConfigError("pair \"" + pair.id +
                      "\" has neither a caption target nor a ground-truth prompt");
}

}  // namespace detail

// Full attack pipeline on one dataset pair: caption, extract, rank, search,
// and (when ground truth is known) evaluate. Stage failures surface as
// StageError with the stage name.
inline RunReport run_attack(const RunConfig& config, const DatasetPair& pair,
                            const BackendFactory& factory) {
    config.validate();
    pair.showcase.validate(("showcase for pair " + pair.id).c_str());

    RunReport report;
    report.pair_id = pair.id;
    report.config = config;
    detail::StageClock clock(report.timings);

    BackendBundle bundle;
    CaptionPool captions;
    std::string base_prompt;
    clock.run("captioning", [&] {
        std::optional<CaptionTarget> target;
        if (config.backend.kind == "synthetic") {
            target = detail::target_for_pair(pair);
        }
        bundle = factory.bundle(std::move(target));
        base_prompt = config.base_prompt_override ? *config.base_prompt_override
                                                  : bundle.captioner->caption(pair.showcase);
        base_prompt = normalize_whitespace(base_prompt);
        if (base_prompt.empty()) throw ConfigError("base prompt is empty");
        captions = make_caption_pool(bundle, pair.showcase, config.attack.caption_count,
                                     config.attack.caption_temperature, config.attack.proxy_seed);
    });
    report.backend_id = bundle.id;
    report.base_prompt = base_prompt;

    ModifierPool dynamic_pool = clock.run("extraction", [&] {
        return build_dynamic_pool(captions, *bundle.parser,
                                  [&](size_t idx, const std::string& why) {
                                      report.notes.push_back("extraction: skipped caption " +
                                                             std::to_string(idx) + ": " + why);
                                  });
    });

    ModifierPool static_pool = clock.run("static_pool", [&] {
        if (config.static_pool_path.empty()) {
            throw ConfigError("run config: static_pool path is required");
        }
        return load_static_pool(config.static_pool_path);
    });

    RankedModifierList ranked_dynamic, ranked_static;
    clock.run("ranking", [&] {
        Embedding showcase_emb = bundle.image_encoder->encode_image(pair.showcase);
        std::vector<std::string> dropped;
        ranked_dynamic = rank_modifiers(dynamic_pool, base_prompt, showcase_emb,
                                        *bundle.text_encoder, config.ranking, &dropped);
        ranked_static = rank_modifiers(static_pool, base_prompt, showcase_emb,
                                       *bundle.text_encoder, config.ranking, &dropped);
        for (const std::string& d : dropped) {
            report.notes.push_back("ranking: dropped candidate " + d);
        }
    });

    GreedyResult greedy = clock.run("search", [&] {
        return greedy_proxy_query(config.attack, base_prompt, ranked_dynamic, ranked_static,
                                  pair.showcase, bundle);
    });
    report.stolen = greedy.prompt;
    report.stolen_text = greedy.prompt.render();
    report.log = std::move(greedy.log);
    report.proxy_calls = greedy.proxy_calls;
    report.sizes = {{"captions", captions.captions.size()},
                    {"dynamic_pool", dynamic_pool.size()},
                    {"static_pool", static_pool.size()},
                    {"ranked_dynamic", ranked_dynamic.entries.size()},
                    {"ranked_static", ranked_static.entries.size()}};

    if (pair.ground_truth_prompt) {
        report.metrics = clock.run("evaluation", [&] {
            Image generated =
                bundle.proxy->generate(report.stolen_text, config.attack.proxy_seed);
            return make_metrics_report(bundle, generated, pair.showcase, report.stolen_text,
                                       *pair.ground_truth_prompt, config.asr_threshold);
        });
    }
    return report;
}

// Re-render a stolen prompt and score it against a pair's showcase and
// ground truth.
inline MetricsReport evaluate_run(const RunConfig& config, const DatasetPair& pair,
                                  const std::string& stolen_text, const BackendFactory& factory) {
    config.validate();
    if (!pair.ground_truth_prompt) {
        throw ArgumentError("evaluate_run: pair \"" + pair.id + "\" has no ground-truth prompt");
    }
    BackendBundle bundle = factory.bundle(CaptionTarget{"unused", {}});
    Image generated = bundle.proxy->generate(stolen_text, config.attack.proxy_seed);
    return make_metrics_report(bundle, generated, pair.showcase, stolen_text,
                               *pair.ground_truth_prompt, config.asr_threshold);
}

// ---------------------------------------------------------------------------
// Persistence

inline void persist_run(const fs::path& dir, const RunReport& report) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot write report.json in " + dir.string());
        out << run_report_to_json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "querylog.jsonl");
        if (!out) throw IoError("cannot write querylog.jsonl in " + dir.string());
        out << query_log_to_jsonl(report.log);
    }
}

inline RunReport load_run(const fs::path& dir) {
    std::ifstream in(dir / "report.json");
    if (!in) throw IoError("cannot open report.json in " + dir.string());
    nlohmann::json j;
    try {
        in >> j;
        return run_report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad report.json in " + dir.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Aggregation and defense evaluation

struct MetricsAggregate {
    size_t count = 0;
    double mean_image_similarity = 0.0;
    double mean_perceptual_distance = 0.0;
    double mean_prompt_sbert = 0.0;
    double asr = 0.0;
};

inline MetricsAggregate aggregate_metrics(const std::vector<MetricsReport>& reports,
                                          double asr_threshold = kDefaultAsrThreshold) {
    if (reports.empty()) throw ArgumentError("aggregate_metrics: no reports");
    MetricsAggregate a;
    a.count = reports.size();
    std::vector<double> sberts;
    sberts.reserve(reports.size());
    for (const MetricsReport& r : reports) {
        a.mean_image_similarity += r.image_similarity;
        a.mean_perceptual_distance += r.perceptual_distance;
        a.mean_prompt_sbert += r.prompt_sbert;
        sberts.push_back(r.prompt_sbert);
    }
    a.mean_image_similarity /= static_cast<double>(a.count);
    a.mean_perceptual_distance /= static_cast<double>(a.count);
    a.mean_prompt_sbert /= static_cast<double>(a.count);
    a.asr = attack_success_rate(sberts, asr_threshold);
    return a;
}

inline nlohmann::json aggregate_to_json(const MetricsAggregate& a) {
    return {{"count", a.count},
            {"mean_image_similarity", a.mean_image_similarity},
            {"mean_perceptual_distance", a.mean_perceptual_distance},
            {"mean_prompt_sbert", a.mean_prompt_sbert},
            {"asr", a.asr}};
}

struct DefenseEvaluation {
    MetricsAggregate baseline;
    MetricsAggregate defended;
    double delta_image_similarity = 0.0;   // defended minus baseline
    double delta_perceptual_distance = 0.0;
    double delta_prompt_sbert = 0.0;
    double delta_asr = 0.0;
};

// Re-run the attack on defended showcases and compare against the clean
// baseline. The runner owns how the attack is executed and scored; a
// defense evaluation without a baseline is meaningless and raises.
inline DefenseEvaluation evaluate_defense(
    const std::vector<DatasetPair>& defended_pairs,
    const std::function<MetricsReport(const DatasetPair&)>& attack_runner,
    const MetricsAggregate& baseline, double asr_threshold = kDefaultAsrThreshold) {
    if (defended_pairs.empty()) {
        throw ArgumentError("evaluate_defense: no defended pairs");
    }
    if (!attack_runner) throw ArgumentError("evaluate_defense: no attack runner");
    if (baseline.count == 0) {
        throw ArgumentError("evaluate_defense: baseline metrics are missing");
    }
    std::vector<MetricsReport> reports;
    reports.reserve(defended_pairs.size());
    for (const DatasetPair& pair : defended_pairs) {
        reports.push_back(attack_runner(pair));
    }
    DefenseEvaluation ev;
    ev.baseline = baseline;
    ev.defended = aggregate_metrics(reports, asr_threshold);
    ev.delta_image_similarity = ev.defended.mean_image_similarity - baseline.mean_image_similarity;
    ev.delta_perceptual_distance =
        ev.defended.mean_perceptual_distance - baseline.mean_perceptual_distance;
    ev.delta_prompt_sbert = ev.defended.mean_prompt_sbert - baseline.mean_prompt_sbert;
    ev.delta_asr = ev.defended.asr - baseline.asr;
    return ev;
}

// Standard runner: attack the defended showcase and score against it too,
// since that is the image the thief saw. Deltas against the clean baseline
// then capture what the defense cost the attack. The clean set is only
// consulted to reject defended pairs with no baseline counterpart, which
// would make those deltas meaningless.
inline std::function<MetricsReport(const DatasetPair&)> make_defense_attack_runner(
    const RunConfig& config, const std::vector<DatasetPair>& clean_pairs,
    std::shared_ptr<const BackendFactory> factory,
    std::vector<RunReport>* reports_out = nullptr) {
    auto clean = std::make_shared<std::map<std::string, DatasetPair>>();
    for (const DatasetPair& p : clean_pairs) (*clean)[p.id] = p;
    return [config, clean, factory, reports_out](const DatasetPair& defended) {
        if (clean->find(defended.id) == clean->end()) {
            throw ArgumentError("defended pair \"" + defended.id + "\" has no clean baseline pair");
        }
        RunReport rep = run_attack(config, defended, *factory);
        if (reports_out) reports_out->push_back(rep);
        return evaluate_run(config, defended, rep.stolen_text, *factory);
    };
}

// ---------------------------------------------------------------------------
// Multi-showcase merge and subject swap

// Instruction templates for an LLM-backed prompt rewriter.
inline constexpr std::string_view kMergeInstructionTemplate =
    "Please summarize these sentences into one sentence by rephrasing them. "
    "Replace {subjects} or related words with {target subject}";
inline constexpr std::string_view kSwapInstructionTemplate =
    "Please replace the central subject in the sentence {prompt} with {subject} "
    "while keeping the rest of the content unchanged";

inline std::string replace_all(std::string text, std::string_view needle,
                               std::string_view replacement) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), replacement);
        pos += replacement.size();
    }
    return text;
}

inline std::string build_merge_instruction(const std::vector<std::string>& prompts,
                                           const std::string& target_subject) {
    if (prompts.empty()) throw ArgumentError("merge: no prompts");
    std::string subjects;
    for (const std::string& p : prompts) {
        Prompt parsed = Prompt::parse_flat(p);
        if (!subjects.empty()) subjects += ", ";
        subjects += parsed.subject;
    }
    std::string instr = replace_all(std::string(kMergeInstructionTemplate), "{subjects}",
                                    subjects);
    instr = replace_all(std::move(instr), "{target subject}", target_subject);
    instr += "\n";
    for (const std::string& p : prompts) {
        instr += "- " + p + "\n";
    }
    return instr;
}

inline std::string build_swap_instruction(const std::string& prompt,
                                          const std::string& new_subject) {
    std::string instr = replace_all(std::string(kSwapInstructionTemplate), "{prompt}",
                                    "\"" + prompt + "\"");
    return replace_all(std::move(instr), "{subject}", "\"" + new_subject + "\"");
}

class PromptRewriter {
public:
    virtual ~PromptRewriter() = default;
    virtual std::string merge(const std::vector<std::string>& prompts,
                              const std::string& target_subject) const = 0;
    virtual std::string swap(const std::string& prompt,
                             const std::string& new_subject) const = 0;
};

// LLM-backed rewriter stub: it can prepare the exact instructions but has
// no service to send them to in this build.
class ExternalRewriter final : public PromptRewriter {
public:
    explicit ExternalRewriter(std::string model) : model_(std::move(model)) {}
    std::string merge(const std::vector<std::string>& prompts,
                      const std::string& target_subject) const override {
        build_merge_instruction(prompts, target_subject);  // validates inputs
        external::not_wired("prompt rewriter", model_);
    }
    std::string swap(const std::string& prompt, const std::string& new_subject) const override {
        build_swap_instruction(prompt, new_subject);
        external::not_wired("prompt rewriter", model_);
    }

private:
    std::string model_;
};

// Merge stolen prompts from multiple showcases of one theme into a single
// prompt for the target subject. Without a rewriter, modifiers from all
// prompts are pooled and ordered by cross-prompt frequency (first seen
// wins ties), then appended to the target subject.
inline std::string merge_multi_showcase(const std::vector<Prompt>& prompts,
                                        const std::string& target_subject,
                                        const PromptRewriter* rewriter = nullptr) {
    if (prompts.empty()) throw ArgumentError("merge_multi_showcase: no prompts");
    if (trim(target_subject).empty()) {
        throw ArgumentError("merge_multi_showcase: empty target subject");
    }
    if (rewriter) {
        std::vector<std::string> flat;
        flat.reserve(prompts.size());
        for (const Prompt& p : prompts) flat.push_back(p.render());
        return rewriter->merge(flat, target_subject);
    }
    struct Entry {
        std::string text;
        size_t count = 0;
        size_t first = 0;
    };
    std::unordered_map<std::string, size_t> index;
    std::vector<Entry> entries;
    size_t order = 0;
    for (const Prompt& p : prompts) {
        for (const ModifierCandidate* m : p.all_modifiers()) {
            std::string key = fold_case(normalize_whitespace(m->text));
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(key, entries.size());
                entries.push_back({normalize_whitespace(m->text), 1, order++});
            } else {
                entries[it->second].count += 1;
            }
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.first < b.first;
    });
    std::string out = normalize_whitespace(target_subject);
    for (const Entry& e : entries) {
        out += kPromptSeparator;
        out += e.text;
    }
    return out;
}

inline Prompt swap_subject(const Prompt& prompt, const std::string& new_subject) {
    if (trim(new_subject).empty()) throw ArgumentError("swap_subject: empty subject");
    Prompt out = prompt;
    out.subject = normalize_whitespace(new_subject);
    return out;
}

// Flat-string swap: with a rewriter it is delegated; without one the prompt
// is parsed structurally and the first segment replaced.
inline std::string swap_subject(const std::string& prompt_text, const std::string& new_subject,
                                const PromptRewriter* rewriter = nullptr) {
    if (rewriter) return rewriter->swap(prompt_text, new_subject);
    Prompt parsed = Prompt::parse_flat(prompt_text);
    return swap_subject(parsed, new_subject).render();
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_HARNESS_HPP
