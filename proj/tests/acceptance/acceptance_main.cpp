// Release acceptance benchmark. Each criterion prints one line:
//
//   [PASS] C2 greedy_recovery_and_oracle (12.41s): recovered ...
//
// and the binary exits nonzero if any criterion fails. Criteria build their
// own worlds through the shared bench constructions, so a pass here means
// the full pipeline holds up end to end, not just in isolation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bench.hpp"
#include "promptsteal/dataset.hpp"
#include "promptsteal/harness.hpp"

#ifndef TESTS_DATA_DIR
#error "TESTS_DATA_DIR must point at the tests/data directory"
#endif

using namespace promptsteal;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

class Runner {
public:
    void run(const std::string& name, const std::function<std::string()>& body) {
        Criterion c;
        c.name = name;
        auto start = std::chrono::steady_clock::now();
        try {
            c.detail = body();
            c.pass = true;
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        auto end = std::chrono::steady_clock::now();
        c.seconds = std::chrono::duration<double>(end - start).count();
        std::printf("[%s] %s (%.2fs): %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.seconds, c.detail.c_str());
        std::fflush(stdout);
        results.push_back(std::move(c));
    }

    bool all_passed() const {
        for (const Criterion& c : results) {
            if (!c.pass) return false;
        }
        return true;
    }

    std::vector<Criterion> results;
};

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Query logs carried from the recovery benchmark into the soundness check.
struct CollectedRun {
    QueryLog log;
    double gain_threshold = 0.0;
    int budget = 0;
    int proxy_calls = 0;
};

void check_run_soundness(const CollectedRun& run) {
    for (const QueryRecord& rec : run.log.entries) {
        if (!rec.error.empty()) {
            require(!rec.accepted, "errored query must not be accepted");
            continue;
        }
        if (rec.accepted) {
            require(rec.gain.total > run.gain_threshold,
                    "accepted query with gain " + fmt(rec.gain.total) + " <= threshold");
        } else {
            require(!(rec.gain.total > run.gain_threshold),
                    "rejected query with gain " + fmt(rec.gain.total) + " > threshold");
        }
    }
    require(run.proxy_calls <= run.budget + 1,
            "proxy calls " + std::to_string(run.proxy_calls) + " exceed budget+1");
    require(run.log.entries.size() <= static_cast<size_t>(run.budget),
            "query log longer than the budget");
}

std::vector<SyntheticPairSpec> transfer_specs() {
    return {
        {"castle", "a stone castle",
         {"on a cliff", "under a golden sunset", "near the ocean"},
         {"oil painting", "hyperrealistic", "dramatic lighting"}, ""},
        {"dragon", "a red dragon",
         {"over the mountain", "in the fog", "at night"},
         {"cinematic", "epic", "dark"}, ""},
        {"lighthouse", "an ancient lighthouse",
         {"near the ocean", "during a storm", "under the clouds"},
         {"watercolor", "soft light", "detailed"}, ""},
        {"wizard", "a glowing wizard",
         {"in the forest", "under the moon", "near a frozen lake"},
         {"sketch", "vibrant", "majestic"}, ""},
        {"ship", "a wooden ship",
         {"on the river", "in the rain", "behind the bridge"},
         {"photograph", "realistic", "silver light"}, ""},
        {"fox", "a tiny fox",
         {"in the snow", "at sunrise", "over the hill"},
         {"neon", "crystal render", "misty art"}, ""},
    };
}

// Styles from every benchmark pair plus response-free distractor entries.
// Keeping the pool well above the static budget makes the ranking order
// itself part of what a defense can corrupt.
const char* kBenchmarkStaticPool =
    "oil painting\nhyperrealistic\ndramatic lighting\ncinematic\nepic\ndark\n"
    "watercolor\nsoft light\ndetailed\nsketch\nvibrant\nmajestic\n"
    "photograph\nrealistic\nsilver light\nneon\ncrystal render\nmisty art\n"
    "blue horse\ngreen garden\nwhite temple\nblack train\nqueen\nking\n"
    "whale\nsamurai\nmarket\nlibrary\nowl\nrobot\n"
    "knight\npirate\nastronaut\ntower\nvalley\nbeach\n";

RunConfig transfer_run_config() {
    RunConfig rc;
    rc.backend.kind = "synthetic";
    rc.backend.seed = 7;
    rc.backend.dim = 64;
    rc.backend.noise_sigma = 0.0;
    rc.attack.query_budget = 60;
    rc.attack.caption_count = 120;
    rc.attack.proxy_seed = 5;
    rc.static_pool_path = std::string(TESTS_DATA_DIR) + "/static_pool.txt";
    return rc;
}

DatasetPair spec_pair(const SyntheticPairSpec& spec, const Image& showcase) {
    DatasetPair pair;
    pair.id = spec.id;
    pair.showcase = showcase;
    pair.ground_truth_prompt = spec.full_prompt();
    pair.caption_target = CaptionTarget{spec.subject, spec.scene_phrases};
    return pair;
}

}  // namespace

int main() {
    Runner runner;
    std::vector<CollectedRun> collected;

    runner.run("C1 config_defaults", [&] {
        auto start = std::chrono::steady_clock::now();
        AttackConfig a;
        require(a.query_budget == 200, "query_budget default");
        require(a.gain_threshold == 0.005, "gain_threshold default");
        require(a.dynamic_ratio == 1 && a.static_ratio == 4, "budget ratio default");
        require(a.caption_count == 400, "caption_count default");
        require(a.caption_temperature == 1.0, "caption_temperature default");
        require(a.sem_weight == 1.0 && a.per_weight == 1.0, "gain weight defaults");
        require(a.samples_per_query == 1, "samples_per_query default");
        require(!a.early_stop_fidelity.has_value(), "early stop disabled by default");
        BudgetSplit split = allocate_budget(a.query_budget, a.dynamic_ratio, a.static_ratio);
        require(split.dynamic_budget == 40 && split.static_budget == 160,
                "default budget split must be 40/160");

        DefenseConfig d;
        require(d.noise_std == 25.0, "noise_std default");
        require(d.grid_rows == 4 && d.grid_cols == 4, "grid default");
        require(d.grid_variability == 3.0, "grid_variability default");
        require(d.watermark_text == "@watermark", "watermark text default");
        require(d.font_size == 20 && d.row_gap == 20 && d.col_gap == 30,
                "watermark geometry defaults");
        require(d.epsilon == 8.0 / 255.0, "epsilon default");
        require(d.steps == 200, "steps default");
        require(d.alpha == 0.5 && d.beta == 0.5, "objective weight defaults");
        require(!d.use_adam && !d.step_size.has_value(), "optimizer defaults");

        require(kDefaultAsrThreshold == 0.8, "ASR threshold default");
        RunConfig rc;
        require(rc.ranking == MatchMethod::Contextual, "ranking default");
        require(rc.asr_threshold == 0.8, "run ASR threshold default");

        require(elapsed_since(start) < 1.0, "config check exceeded 1s");
        return std::string("attack, defense, and run defaults verified");
    });

    runner.run("C2 greedy_recovery_and_oracle", [&] {
        auto start = std::chrono::steady_clock::now();
        const int instances = 20;
        int good = 0;
        for (int i = 1; i <= instances; ++i) {
            bench::PlantedInstance inst = bench::make_planted_instance(static_cast<uint64_t>(i));
            GreedyResult res =
                greedy_proxy_query(inst.config, inst.subject, inst.ranked_dynamic,
                                   inst.ranked_static, inst.showcase, inst.bundle);
            if (bench::count_recovered(res.prompt, inst.planted) >= 4) ++good;
            collected.push_back({std::move(res.log), inst.config.gain_threshold,
                                 inst.config.query_budget, res.proxy_calls});
        }
        require(good * 5 >= instances * 4, "recovered >=4/5 planted in only " +
                                               std::to_string(good) + "/20 instances");

        std::vector<double> ratios;
        for (uint64_t seed : {31ull, 32ull, 33ull}) {
            bench::OracleInstance inst = bench::make_oracle_instance(seed);
            GreedyResult res = greedy_proxy_query(inst.base.config, inst.base.subject,
                                                  inst.base.ranked_dynamic, inst.base.ranked_static,
                                                  inst.base.showcase, inst.base.bundle);
            collected.push_back({std::move(res.log), inst.base.config.gain_threshold,
                                 inst.base.config.query_budget, res.proxy_calls});
            double achieved = combined_similarity(inst.base.bundle, res.prompt.render(),
                                                  inst.base.showcase, inst.base.config);
            double best = bench::exhaustive_best_combined(inst);
            require(best > 0.0, "oracle best similarity must be positive");
            require(achieved >= 0.95 * best,
                    "greedy reached " + fmt(achieved) + " vs oracle " + fmt(best));
            ratios.push_back(achieved / best);
        }
        require(elapsed_since(start) < 60.0, "recovery benchmark exceeded 60s");
        std::string detail = "recovered >=4/5 planted in " + std::to_string(good) +
                             "/20 instances; oracle ratios";
        for (double r : ratios) detail += " " + fmt(r);
        return detail;
    });

    runner.run("C3 acceptance_soundness_and_budget", [&] {
        require(!collected.empty(), "no query logs collected by the recovery benchmark");
        size_t records = 0;
        for (const CollectedRun& run : collected) {
            check_run_soundness(run);
            records += run.log.entries.size();
        }
        return "every acceptance strictly beats the threshold across " +
               std::to_string(records) + " records in " + std::to_string(collected.size()) +
               " runs";
    });

    runner.run("C4 contextual_vs_vanilla_pcc", [&] {
        auto start = std::chrono::steady_clock::now();
        std::vector<ConsistencySample> samples = bench::make_consistency_samples(404, 200);
        SyntheticConfig sc;
        sc.seed = 404;
        sc.dim = 64;
        sc.noise_sigma = 0.05;
        sc.vocabulary = bench::pseudo_words(160);
        auto world = make_synthetic_world(sc);
        SyntheticTextEncoder text_enc(world);
        SyntheticImageEncoder image_enc(world);
        SyntheticSentenceEncoder sentence_enc(world);
        auto [ctx, van] = ranking_consistency_eval(samples, text_enc, image_enc, sentence_enc);
        require(ctx.pcc > van.pcc + 0.05, "contextual pcc " + fmt(ctx.pcc) +
                                              " does not clear vanilla " + fmt(van.pcc) +
                                              " by 0.05");
        require(elapsed_since(start) < 30.0, "consistency benchmark exceeded 30s");
        return "contextual pcc " + fmt(ctx.pcc) + " vs vanilla " + fmt(van.pcc) +
               " on 200 samples";
    });

    runner.run("C5 extraction_golden_and_coverage", [&] {
        std::string path = std::string(TESTS_DATA_DIR) + "/golden_extraction.json";
        std::ifstream in(path);
        require(static_cast<bool>(in), "cannot open " + path);
        nlohmann::json corpus;
        in >> corpus;
        require(corpus.is_array() && corpus.size() == 25,
                "golden corpus must hold 25 sentences");

        RuleParser parser;
        bool saw_sunset = false, saw_panther = false, saw_red_car = false;
        for (const auto& entry : corpus) {
            std::string sentence = entry.at("sentence").get<std::string>();
            ParseResult parse = parser.parse(sentence);
            std::vector<std::string> chunks;
            for (const auto& c : extract_noun_chunks(parse)) chunks.push_back(c.text);
            std::vector<std::string> preps;
            for (const auto& c : extract_prepositional_phrases(parse)) preps.push_back(c.text);
            auto want_chunks = entry.at("noun_chunks").get<std::vector<std::string>>();
            auto want_preps = entry.at("prep_phrases").get<std::vector<std::string>>();
            require(chunks == want_chunks, "noun chunks differ for: " + sentence);
            require(preps == want_preps, "prepositional phrases differ for: " + sentence);
            for (const std::string& p : preps) saw_sunset = saw_sunset || p == "during a sunset";
            for (const std::string& c : chunks) {
                saw_panther = saw_panther || c == "Black Panther";
                saw_red_car = saw_red_car || c == "a red car";
            }
        }
        require(saw_sunset, "corpus must cover the phrase \"during a sunset\"");
        require(saw_panther, "corpus must cover the proper noun \"Black Panther\"");
        require(saw_red_car, "corpus must cover the chunk \"a red car\"");

        // More captions can only widen the extracted pool, so coverage of the
        // hidden prompt must be monotone and eventually complete.
        SyntheticConfig sc;
        sc.seed = 21;
        sc.dim = 32;
        sc.noise_sigma = 0.0;
        sc.vocabulary = default_vocabulary();
        auto world = make_synthetic_world(sc);
        std::string subject = "a stone castle";
        std::vector<std::string> phrases = {"on a cliff", "golden sunset", "near the ocean",
                                            "misty light"};
        BackendBundle bundle = make_synthetic_bundle(world, CaptionTarget{subject, phrases});
        std::string gt = subject;
        for (const std::string& p : phrases) gt += ", " + p;
        Prompt reference = Prompt::parse_flat(gt);
        Image showcase = bundle.proxy->generate(gt, 77);
        double prev = -1.0;
        double last = 0.0;
        std::string curve;
        for (int count : {5, 20, 80, 200}) {
            CaptionPool captions = make_caption_pool(bundle, showcase, count, 1.0, 77);
            ModifierPool pool = build_dynamic_pool(captions, *bundle.parser);
            double cov = modifier_coverage(pool, {reference});
            require(cov >= prev, "coverage dropped from " + fmt(prev) + " to " + fmt(cov) +
                                     " at " + std::to_string(count) + " captions");
            prev = cov;
            last = cov;
            if (!curve.empty()) curve += " ";
            curve += fmt(cov);
        }
        require(last == 1.0, "coverage must reach 1.0 with 200 captions, got " + fmt(last));
        return "25/25 golden sentences exact; coverage curve " + curve;
    });

    runner.run("C6 metrics_analytic", [&] {
        double c1 = cosine_similarity(Embedding({1.0, 0.0}), Embedding({1.0, 1.0}));
        require(std::abs(c1 - 1.0 / std::sqrt(2.0)) < 1e-9, "cosine of (1,0),(1,1)");
        double c2 = cosine_similarity(Embedding({1.0, 2.0, 3.0}), Embedding({4.0, 5.0, 6.0}));
        require(std::abs(c2 - 32.0 / (std::sqrt(14.0) * std::sqrt(77.0))) < 1e-9,
                "cosine of (1,2,3),(4,5,6)");
        double c3 = cosine_similarity(Embedding({0.3, 0.4}), Embedding({0.3, 0.4}));
        require(std::abs(c3 - 1.0) < 1e-9, "self cosine");
        double c4 = cosine_similarity(Embedding({1.0, -2.0}), Embedding({-2.0, 4.0}));
        require(std::abs(c4 + 1.0) < 1e-9, "antiparallel cosine");

        std::vector<double> x = {1.0, 2.0, 3.0};
        std::vector<double> y = {1.0, 2.0, 4.0};
        double r = pearson_correlation(x, y);
        require(std::abs(r - 3.0 / std::sqrt(28.0 / 3.0)) < 1e-9, "pearson hand value");
        std::vector<double> lin = {2.0, 4.0, 6.0, 8.0};
        std::vector<double> base = {1.0, 2.0, 3.0, 4.0};
        require(std::abs(pearson_correlation(base, lin) - 1.0) < 1e-9, "pearson linear");

        std::vector<double> sims = {0.85, 0.79, 0.81};
        double asr = attack_success_rate(sims, 0.8);
        require(std::abs(asr - 2.0 / 3.0) < 1e-12, "ASR must be exactly 2/3");
        std::vector<double> at = {0.80};
        require(attack_success_rate(at, 0.8) == 0.0,
                "a similarity exactly at the threshold must not count");
        std::vector<double> above = {0.8000001};
        require(attack_success_rate(above, 0.8) == 1.0, "just above threshold counts");
        return "cosine, pearson, and strict ASR match analytic values";
    });

    runner.run("C7 promptguard_bounds_gradient_transfer", [&] {
        SyntheticConfig sc;
        sc.seed = 7;
        sc.dim = 64;
        sc.noise_sigma = 0.0;
        sc.vocabulary = default_vocabulary();
        auto world = make_synthetic_world(sc);
        SyntheticProxy proxy(world);
        SyntheticImageEncoder enc_img(world);
        SyntheticProjectionEncoder proj_a(world, 101, 32);
        SyntheticSliceEncoder slice_a(world, 0, 16);
        SyntheticSliceEncoder slice_b(world, 16, 32);
        DefenseConfig dc;
        dc.kind = DefenseKind::PromptGuard;

        std::vector<SyntheticPairSpec> specs = transfer_specs();
        std::vector<Image> clean, matched, mismatched;
        for (const SyntheticPairSpec& spec : specs) {
            Image showcase = proxy.generate(spec.full_prompt(), 5);
            // Matched: the defense spends its whole budget on the encoder
            // the attack measures with. Mismatched: slice encoders covering
            // half the feature space, so the perturbation only partially
            // overlaps what the attack looks at.
            PromptGuardResult m = promptguard(showcase, enc_img, enc_img, dc);
            PromptGuardResult mm = promptguard(showcase, slice_a, slice_b, dc);
            require(linf_distance(m.image, showcase) <= 8.0 / 255.0 + 1e-9,
                    "matched defense escaped the L-inf ball");
            require(linf_distance(mm.image, showcase) <= 8.0 / 255.0 + 1e-9,
                    "mismatched defense escaped the L-inf ball");
            require(m.final_objective < m.initial_objective,
                    "matched defense objective did not decrease");
            require(mm.final_objective < mm.initial_objective,
                    "mismatched defense objective did not decrease");
            clean.push_back(showcase);
            matched.push_back(m.image);
            mismatched.push_back(mm.image);
        }

        // Analytic gradient against central differences, away from the
        // clean point where the gradient vanishes.
        Image cand = clean[0];
        for (size_t i = 0; i < cand.pixels.size(); ++i) {
            double wiggle = 0.03 * ((i % 3 == 0) ? 1.0 : -1.0);
            cand.pixels[i] = 0.05 + 0.9 * clamp01(cand.pixels[i] + wiggle);
        }
        Image grad = promptguard_gradient(clean[0], cand, proj_a, slice_a, 0.5, 0.5);
        const double h = 1e-6;
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < cand.pixels.size(); ++i) {
            Image plus = cand;
            plus.pixels[i] += h;
            Image minus = cand;
            minus.pixels[i] -= h;
            double fd = (promptguard_objective(clean[0], plus, proj_a, slice_a, 0.5, 0.5) -
                         promptguard_objective(clean[0], minus, proj_a, slice_a, 0.5, 0.5)) /
                        (2.0 * h);
            double diff = grad.pixels[i] - fd;
            num += diff * diff;
            den += grad.pixels[i] * grad.pixels[i];
        }
        require(den > 0.0, "gradient is identically zero at the probe point");
        double rel = std::sqrt(num / den);
        require(rel < 1e-4, "gradient vs central differences rel err " + fmt(rel));

        // Transfer: attack all three variants, always scoring the stolen
        // prompt against the clean showcase. The tight budget makes the
        // ranking order decisive, which is the surface the perturbation
        // attacks.
        fs::path work = fs::temp_directory_path() / "promptsteal_acceptance_c7";
        fs::remove_all(work);
        fs::create_directories(work);
        {
            std::ofstream out(work / "static_pool.txt");
            out << kBenchmarkStaticPool;
        }
        RunConfig rc = transfer_run_config();
        rc.static_pool_path = (work / "static_pool.txt").string();
        BackendFactory factory(rc.backend);
        // Score against the showcase the attacker saw, mirroring how a real
        // evaluation only ever has the published (possibly defended) image.
        auto attack_score = [&](const std::vector<Image>& showcases) {
            double sum = 0.0;
            for (size_t i = 0; i < specs.size(); ++i) {
                DatasetPair pair = spec_pair(specs[i], showcases[i]);
                RunReport rep = run_attack(rc, pair, factory);
                check_run_soundness({rep.log, rc.attack.gain_threshold,
                                     rc.attack.query_budget, rep.proxy_calls});
                sum += evaluate_run(rc, pair, rep.stolen_text, factory).image_similarity;
            }
            return sum / static_cast<double>(specs.size());
        };
        double base_score = attack_score(clean);
        double matched_score = attack_score(matched);
        double mismatched_score = attack_score(mismatched);
        require(matched_score < base_score,
                "matched defense failed to weaken the attack: " + fmt(matched_score) +
                    " vs clean " + fmt(base_score));
        require(matched_score < mismatched_score,
                "matched defense " + fmt(matched_score) +
                    " must hurt more than mismatched " + fmt(mismatched_score));
        fs::remove_all(work);
        return "bounds and gradient hold; attack score clean " + fmt(base_score) +
               ", matched " + fmt(matched_score) + ", mismatched " + fmt(mismatched_score);
    });

    runner.run("C8 replay_determinism", [&] {
        fs::path work = fs::temp_directory_path() / "promptsteal_acceptance";
        fs::remove_all(work);
        fs::create_directories(work);

        RunConfig rc = transfer_run_config();
        rc.backend.noise_sigma = 0.02;
        {
            std::ofstream out(work / "run.json");
            out << run_config_to_json(rc).dump(2) << "\n";
        }
        SyntheticPairSpec spec = transfer_specs()[0];
        {
            BackendFactory factory(rc.backend);
            generate_synthetic_dataset(work / "ds", factory.world(), {spec}, 5);
        }

        auto run_once = [&](const fs::path& out_dir) {
            std::ifstream in(work / "run.json");
            nlohmann::json j;
            in >> j;
            RunConfig config = run_config_from_json(j);
            BackendFactory factory(config.backend);
            DatasetLoadResult ds = load_dataset(work / "ds");
            require(ds.pairs.size() == 1, "replay dataset must hold one pair");
            RunReport rep = run_attack(config, ds.pairs[0], factory);
            persist_run(out_dir, rep);
            return rep;
        };
        RunReport first = run_once(work / "run1");
        RunReport second = run_once(work / "run2");

        require(query_log_to_jsonl(first.log) == query_log_to_jsonl(second.log),
                "query logs differ between replays");
        require(canonical_run_report(first) == canonical_run_report(second),
                "canonical reports differ between replays");
        std::ifstream l1(work / "run1" / "querylog.jsonl");
        std::ifstream l2(work / "run2" / "querylog.jsonl");
        std::string s1((std::istreambuf_iterator<char>(l1)), std::istreambuf_iterator<char>());
        std::string s2((std::istreambuf_iterator<char>(l2)), std::istreambuf_iterator<char>());
        require(!s1.empty() && s1 == s2, "persisted query logs differ bit for bit");
        require(canonical_run_report(load_run(work / "run1")) ==
                    canonical_run_report(load_run(work / "run2")),
                "reloaded reports differ");
        fs::remove_all(work);
        return std::string("two replays from the persisted config are bit-identical");
    });

    int passed = 0;
    for (const Criterion& c : runner.results) {
        if (c.pass) ++passed;
    }
    std::printf("%d/%zu criteria passed\n", passed, runner.results.size());
    return runner.all_passed() ? 0 : 1;
}
