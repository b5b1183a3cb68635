// Command line front end for the prompt stealing toolkit. Subcommands map
// onto the pipeline stages so each piece can be driven and inspected on its
// own: gen, extract, rank, steal, eval, defend, coverage, merge, swap.
//
// Exit codes: 0 success, 1 usage error, 2 pipeline failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "promptsteal/dataset.hpp"
#include "promptsteal/harness.hpp"

using namespace promptsteal;

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open JSON file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
    return j;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// One entry per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty() && t[0] != '#') lines.push_back(std::move(t));
    }
    return lines;
}

BackendConfig load_backend(const std::string& path) {
    if (path.empty()) return BackendConfig{};
    return backend_config_from_json(load_json_file(path));
}

std::shared_ptr<const SyntheticWorld> require_world(const BackendFactory& factory) {
    if (!factory.world()) {
        throw ConfigError("this subcommand needs a synthetic backend (kind \"synthetic\")");
    }
    return factory.world();
}

std::vector<SyntheticPairSpec> demo_specs() {
    return {
        {"castle", "a stone castle", {"on a cliff", "golden sunset"},
         {"oil painting", "hyperrealistic"}, "landmarks"},
        {"dragon", "a red dragon", {"over the mountain", "at night"},
         {"cinematic", "dramatic"}, "creatures"},
        {"lighthouse", "an ancient lighthouse", {"near the ocean", "in the fog"},
         {"watercolor", "soft light"}, "landmarks"},
    };
}

std::vector<SyntheticPairSpec> load_specs(const std::string& path) {
    nlohmann::json j = load_json_file(path);
    if (!j.is_array() || j.empty()) {
        throw ConfigError("spec file must be a non-empty JSON array: " + path);
    }
    std::vector<SyntheticPairSpec> specs;
    for (const auto& item : j) {
        SyntheticPairSpec s;
        s.id = item.at("id").get<std::string>();
        s.subject = item.at("subject").get<std::string>();
        s.scene_phrases = item.value("phrases", std::vector<std::string>{});
        s.style_modifiers = item.value("styles", std::vector<std::string>{});
        s.theme = item.value("theme", std::string());
        specs.push_back(std::move(s));
    }
    return specs;
}

CaptionTarget load_caption_target(const std::string& path) {
    nlohmann::json j = load_json_file(path);
    CaptionTarget t;
    t.subject = j.at("subject").get<std::string>();
    t.phrases = j.value("phrases", std::vector<std::string>{});
    return t;
}

int run_gen(const std::string& out_dir, const std::string& backend_path,
            const std::string& specs_path, uint64_t proxy_seed) {
    BackendFactory factory(load_backend(backend_path));
    auto world = require_world(factory);
    std::vector<SyntheticPairSpec> specs =
        specs_path.empty() ? demo_specs() : load_specs(specs_path);
    generate_synthetic_dataset(out_dir, world, specs, proxy_seed);
    std::cout << "wrote " << specs.size() << " pairs to " << out_dir << "\n";
    return 0;
}

int run_extract(const std::string& captions_path) {
    CaptionPool captions;
    captions.captions = read_lines(captions_path);
    ModifierPool pool = build_dynamic_pool(captions, RuleParser{},
                                           [](size_t idx, const std::string& why) {
                                               std::cerr << "skipped caption " << idx << ": "
                                                         << why << "\n";
                                           });
    std::cout << pool_to_json(pool).dump(2) << "\n";
    return 0;
}

int run_rank(const std::string& pool_path, const std::string& base_prompt,
             const std::string& image_path, const std::string& backend_path,
             const std::string& method_name) {
    ModifierPool pool = pool_from_json(load_json_file(pool_path));
    MatchMethod method = match_method_from_string(method_name);
    BackendFactory factory(load_backend(backend_path));
    BackendBundle bundle = factory.bundle(CaptionTarget{"unused", {}});
    Embedding showcase = bundle.image_encoder->encode_image(load_image(image_path));
    std::vector<std::string> dropped;
    RankedModifierList ranked =
        rank_modifiers(pool, base_prompt, showcase, *bundle.text_encoder, method, &dropped);
    for (const std::string& d : dropped) std::cerr << "dropped: " << d << "\n";
    std::cout << ranked_to_json(ranked).dump(2) << "\n";
    return 0;
}

int run_steal(const std::string& config_path, const std::string& image_path,
              const std::string& pair_id, const std::string& gt_path,
              const std::string& target_path, const std::string& out_dir) {
    RunConfig config = run_config_from_json(load_json_file(config_path));
    BackendFactory factory(config.backend);
    DatasetPair pair;
    pair.id = pair_id.empty() ? fs::path(image_path).stem().string() : pair_id;
    pair.image_path = image_path;
    pair.showcase = load_image(image_path);
    if (!gt_path.empty()) {
        std::string gt = trim(read_text_file(gt_path));
        if (!gt.empty()) pair.ground_truth_prompt = gt;
    }
    if (!target_path.empty()) pair.caption_target = load_caption_target(target_path);

    RunReport report = run_attack(config, pair, factory);
    if (!out_dir.empty()) persist_run(out_dir, report);

    nlohmann::json out{{"pair_id", report.pair_id},
                       {"backend_id", report.backend_id},
                       {"stolen", report.stolen_text},
                       {"proxy_calls", report.proxy_calls},
                       {"sizes", report.sizes}};
    if (report.metrics) out["metrics"] = metrics_report_to_json(*report.metrics);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_eval(const std::string& config_path, const std::string& image_path,
             const std::string& gt_path, const std::string& stolen_prompt) {
    RunConfig config = run_config_from_json(load_json_file(config_path));
    BackendFactory factory(config.backend);
    DatasetPair pair;
    pair.id = fs::path(image_path).stem().string();
    pair.showcase = load_image(image_path);
    pair.ground_truth_prompt = trim(read_text_file(gt_path));
    MetricsReport metrics = evaluate_run(config, pair, stolen_prompt, factory);
    std::cout << metrics_report_to_json(metrics).dump(2) << "\n";
    return 0;
}

int run_defend(const std::string& config_path, const std::string& kind_name,
               const std::string& in_path, const std::string& out_path,
               const std::string& backend_path) {
    DefenseConfig config;
    if (!config_path.empty()) config = defense_config_from_json(load_json_file(config_path));
    if (!kind_name.empty()) config.kind = defense_kind_from_string(kind_name);
    config.validate();

    Image input = load_image(in_path);
    Image defended;
    if (config.kind == DefenseKind::PromptGuard) {
        BackendFactory factory(load_backend(backend_path));
        auto world = require_world(factory);
        SyntheticImageEncoder encoder_b(world);
        // Second encoder: a projection head over the same world, so the
        // cloak has to fool two views at once.
        int out_dim = std::max(2, world->dim() / 2);
        SyntheticProjectionEncoder encoder_c(world, config.seed ^ 0xC0DEull, out_dim);
        defended = apply_defense(input, config, &encoder_b, &encoder_c);
    } else {
        defended = apply_defense(input, config);
    }
    save_image(out_path, defended);
    std::cout << "wrote defended image to " << out_path << "\n";
    return 0;
}

int run_coverage(const std::string& backend_path, const std::string& subject,
                 const std::string& phrases_path, const std::vector<int>& counts,
                 double temperature, uint64_t seed) {
    BackendFactory factory(load_backend(backend_path));
    auto world = require_world(factory);
    CaptionTarget target;
    target.subject = subject;
    target.phrases = read_lines(phrases_path);
    BackendBundle bundle = make_synthetic_bundle(world, target);

    std::string gt = subject;
    for (const std::string& p : target.phrases) {
        gt += kPromptSeparator;
        gt += p;
    }
    Prompt reference = Prompt::parse_flat(gt);
    Image showcase = bundle.proxy->generate(gt, seed);

    nlohmann::json curve = nlohmann::json::array();
    for (int count : counts) {
        CaptionPool captions = make_caption_pool(bundle, showcase, count, temperature, seed);
        ModifierPool pool = build_dynamic_pool(captions, *bundle.parser);
        curve.push_back({{"captions", count},
                         {"pool_size", pool.size()},
                         {"coverage", modifier_coverage(pool, {reference})}});
    }
    std::cout << curve.dump(2) << "\n";
    return 0;
}

int run_merge(const std::string& prompts_path, const std::string& subject, bool instruction) {
    std::vector<std::string> lines = read_lines(prompts_path);
    if (instruction) {
        std::cout << build_merge_instruction(lines, subject);
        return 0;
    }
    std::vector<Prompt> prompts;
    prompts.reserve(lines.size());
    for (const std::string& line : lines) prompts.push_back(Prompt::parse_flat(line));
    std::cout << merge_multi_showcase(prompts, subject) << "\n";
    return 0;
}

int run_swap(const std::string& prompt, const std::string& subject, bool instruction) {
    if (instruction) {
        std::cout << build_swap_instruction(prompt, subject) << "\n";
        return 0;
    }
    std::cout << swap_subject(prompt, subject) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt stealing attack and defense toolkit"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a synthetic showcase dataset");
    std::string gen_out, gen_backend, gen_specs;
    uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "output dataset directory")->required();
    gen->add_option("--backend", gen_backend, "backend config JSON");
    gen->add_option("--specs", gen_specs, "pair spec JSON array");
    gen->add_option("--proxy-seed", gen_seed, "proxy rendering seed");

    auto* extract = app.add_subcommand("extract", "extract a modifier pool from captions");
    std::string ex_captions;
    extract->add_option("--captions", ex_captions, "caption file, one per line")->required();

    auto* rank = app.add_subcommand("rank", "rank a modifier pool against a showcase");
    std::string rk_pool, rk_base, rk_image, rk_backend, rk_method = "contextual";
    rank->add_option("--pool", rk_pool, "modifier pool JSON")->required();
    rank->add_option("--base", rk_base, "base prompt")->required();
    rank->add_option("--image", rk_image, "showcase image (.json or .png)")->required();
    rank->add_option("--backend", rk_backend, "backend config JSON");
    rank->add_option("--method", rk_method, "contextual or vanilla");

    auto* steal = app.add_subcommand("steal", "run the full attack on one showcase");
    std::string st_config, st_image, st_id, st_gt, st_target, st_out;
    steal->add_option("--config", st_config, "run config JSON")->required();
    steal->add_option("--image", st_image, "showcase image")->required();
    steal->add_option("--id", st_id, "pair id, defaults to the image stem");
    steal->add_option("--gt", st_gt, "ground-truth prompt file, enables metrics");
    steal->add_option("--caption-target", st_target, "caption target JSON sidecar");
    steal->add_option("--out", st_out, "directory for report.json and querylog.jsonl");

    auto* eval = app.add_subcommand("eval", "score a stolen prompt against a pair");
    std::string ev_config, ev_image, ev_gt, ev_prompt;
    eval->add_option("--config", ev_config, "run config JSON")->required();
    eval->add_option("--image", ev_image, "showcase image")->required();
    eval->add_option("--gt", ev_gt, "ground-truth prompt file")->required();
    eval->add_option("--prompt", ev_prompt, "stolen prompt text")->required();

    auto* defend = app.add_subcommand("defend", "apply a defense to a showcase image");
    std::string df_config, df_kind, df_in, df_out, df_backend;
    defend->add_option("--config", df_config, "defense config JSON");
    defend->add_option("--kind", df_kind, "random_noise, puzzle, watermark, or promptguard");
    defend->add_option("--in", df_in, "input image")->required();
    defend->add_option("--out", df_out, "output image")->required();
    defend->add_option("--backend", df_backend, "backend config JSON (promptguard only)");

    auto* coverage = app.add_subcommand("coverage", "caption-count vs modifier coverage curve");
    std::string cv_backend, cv_subject, cv_phrases;
    std::vector<int> cv_counts = {5, 20, 80, 200};
    double cv_temp = 1.0;
    uint64_t cv_seed = 0;
    coverage->add_option("--backend", cv_backend, "backend config JSON");
    coverage->add_option("--subject", cv_subject, "target subject")->required();
    coverage->add_option("--phrases", cv_phrases, "phrase file, one per line")->required();
    coverage->add_option("--counts", cv_counts, "caption counts to sweep");
    coverage->add_option("--temperature", cv_temp, "caption sampling temperature");
    coverage->add_option("--seed", cv_seed, "caption sampling seed");

    auto* merge = app.add_subcommand("merge", "merge stolen prompts for a new subject");
    std::string mg_prompts, mg_subject;
    bool mg_instruction = false;
    merge->add_option("--prompts", mg_prompts, "prompt file, one per line")->required();
    merge->add_option("--subject", mg_subject, "target subject")->required();
    merge->add_flag("--instruction", mg_instruction, "print the LLM rewrite instruction instead");

    auto* swap = app.add_subcommand("swap", "swap the subject of a stolen prompt");
    std::string sw_prompt, sw_subject;
    bool sw_instruction = false;
    swap->add_option("--prompt", sw_prompt, "flat prompt text")->required();
    swap->add_option("--subject", sw_subject, "replacement subject")->required();
    swap->add_flag("--instruction", sw_instruction, "print the LLM rewrite instruction instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_gen(gen_out, gen_backend, gen_specs, gen_seed);
        if (extract->parsed()) return run_extract(ex_captions);
        if (rank->parsed()) return run_rank(rk_pool, rk_base, rk_image, rk_backend, rk_method);
        if (steal->parsed()) {
            return run_steal(st_config, st_image, st_id, st_gt, st_target, st_out);
        }
        if (eval->parsed()) return run_eval(ev_config, ev_image, ev_gt, ev_prompt);
        if (defend->parsed()) return run_defend(df_config, df_kind, df_in, df_out, df_backend);
        if (coverage->parsed()) {
            return run_coverage(cv_backend, cv_subject, cv_phrases, cv_counts, cv_temp, cv_seed);
        }
        if (merge->parsed()) return run_merge(mg_prompts, mg_subject, mg_instruction);
        if (swap->parsed()) return run_swap(sw_prompt, sw_subject, sw_instruction);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
