#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "promptsteal/matching.hpp"
#include "promptsteal/synthetic.hpp"
#include "support/bench.hpp"

using namespace promptsteal;

namespace {

struct Fixture {
    std::shared_ptr<const SyntheticWorld> world;
    std::shared_ptr<SyntheticTextEncoder> text;
    std::shared_ptr<SyntheticImageEncoder> image;
    std::shared_ptr<SyntheticProxy> proxy;

    explicit Fixture(double sigma = 0.0) {
        SyntheticConfig c;
        c.seed = 11;
        c.dim = 32;
        c.noise_sigma = sigma;
        c.vocabulary = bench::pseudo_words(40);
        world = make_synthetic_world(c);
        text = std::make_shared<SyntheticTextEncoder>(world);
        image = std::make_shared<SyntheticImageEncoder>(world);
        proxy = std::make_shared<SyntheticProxy>(world);
    }

    std::string word(size_t i) const { return world->config().vocabulary[i]; }
};

}  // namespace

TEST_CASE("contextual score equals the cosine improvement over the base") {
    Fixture f;
    std::string base = f.word(0);
    std::string gt = base + ", " + f.word(1);
    Image showcase = f.proxy->generate(gt, 0);
    Embedding s = f.image->encode_image(showcase);
    double expect = cosine_similarity(f.text->encode_text(base + ", " + f.word(1)), s) -
                    cosine_similarity(f.text->encode_text(base), s);
    CHECK(contextual_score(*f.text, s, base, f.word(1)) == Catch::Approx(expect).margin(1e-15));
    // Image-overload agrees with the embedding overload.
    CHECK(contextual_score(*f.text, *f.image, showcase, base, f.word(1)) ==
          Catch::Approx(expect).margin(1e-15));
}

TEST_CASE("a modifier repeating the base scores exactly zero contextually") {
    Fixture f;
    std::string base = f.word(0) + " " + f.word(1);
    Image showcase = f.proxy->generate(base, 0);
    Embedding s = f.image->encode_image(showcase);
    // Appending a word already in the base changes multiplicity, so only an
    // exact repetition of the whole bag keeps the embedding direction fixed.
    double self = contextual_score(*f.text, s, base, base);
    CHECK(std::abs(self) < 1e-12);
    double word_repeat = vanilla_score(*f.text, s, f.word(0));
    CHECK(word_repeat > 0.5);  // vanilla rates the redundant word highly
}

TEST_CASE("relevant modifiers outrank irrelevant ones contextually") {
    Fixture f;
    std::string base = f.word(0);
    std::string gt = base + ", " + f.word(2) + ", " + f.word(3);
    Image showcase = f.proxy->generate(gt, 0);
    Embedding s = f.image->encode_image(showcase);

    ModifierPool pool;
    pool.insert({f.word(2), ModifierKind::Static, ""});   // in the prompt
    pool.insert({f.word(7), ModifierKind::Static, ""});   // irrelevant
    pool.insert({f.word(3), ModifierKind::Static, ""});   // in the prompt
    pool.insert({f.word(9), ModifierKind::Static, ""});   // irrelevant
    RankedModifierList ranked = rank_modifiers(pool, base, s, *f.text, MatchMethod::Contextual);
    REQUIRE(ranked.entries.size() == 4);
    std::vector<std::string> top = {ranked.entries[0].candidate.text,
                                    ranked.entries[1].candidate.text};
    CHECK((top[0] == f.word(2) || top[0] == f.word(3)));
    CHECK((top[1] == f.word(2) || top[1] == f.word(3)));
    CHECK(ranked.entries[0].score >= ranked.entries[1].score);
    CHECK(ranked.entries[1].score > ranked.entries[2].score);
    CHECK(ranked.base_prompt == base);
    CHECK(ranked.method == MatchMethod::Contextual);
}

TEST_CASE("ranking drops candidates the encoder cannot embed") {
    Fixture f;
    std::string base = f.word(0);
    Image showcase = f.proxy->generate(base, 0);
    Embedding s = f.image->encode_image(showcase);
    ModifierPool pool;
    pool.insert({f.word(1), ModifierKind::Static, ""});
    pool.insert({"qqqxyzzy", ModifierKind::Static, ""});  // not in vocabulary
    std::vector<std::string> dropped;
    RankedModifierList ranked =
        rank_modifiers(pool, base, s, *f.text, MatchMethod::Contextual, &dropped);
    CHECK(ranked.entries.size() == 1);
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0].rfind("qqqxyzzy", 0) == 0);
    CHECK_THROWS_AS(rank_modifiers(ModifierPool{}, base, s, *f.text, MatchMethod::Contextual),
                    ArgumentError);
}

TEST_CASE("ties break lexicographically so ranking is insertion-order free") {
    Fixture f;
    std::string base = f.word(0);
    Image showcase = f.proxy->generate(base, 0);
    Embedding s = f.image->encode_image(showcase);
    ModifierPool a;
    a.insert({f.word(5), ModifierKind::Static, ""});
    a.insert({f.word(4), ModifierKind::Static, ""});
    ModifierPool b;
    b.insert({f.word(4), ModifierKind::Static, ""});
    b.insert({f.word(5), ModifierKind::Static, ""});
    auto ra = rank_modifiers(a, base, s, *f.text, MatchMethod::Vanilla);
    auto rb = rank_modifiers(b, base, s, *f.text, MatchMethod::Vanilla);
    REQUIRE(ra.entries.size() == rb.entries.size());
    for (size_t i = 0; i < ra.entries.size(); ++i) {
        CHECK(ra.entries[i].candidate.text == rb.entries[i].candidate.text);
    }
}

TEST_CASE("pearson correlation against hand-computed values") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> y = {2.0, 4.0, 5.0, 9.0};
    // Deviations: x-2.5 = {-1.5,-0.5,0.5,1.5}, y-5 = {-3,-1,0,4};
    // sxy = 11, sxx = 5, syy = 26, r = 11/sqrt(130).
    CHECK(pearson_correlation(x, y) == Catch::Approx(11.0 / std::sqrt(130.0)).margin(1e-12));

    std::vector<double> lin;
    for (double v : x) lin.push_back(2.0 * v + 1.0);
    CHECK(pearson_correlation(x, lin) == Catch::Approx(1.0).margin(1e-12));
    std::vector<double> anti;
    for (double v : x) anti.push_back(-v);
    CHECK(pearson_correlation(x, anti) == Catch::Approx(-1.0).margin(1e-12));

    std::vector<double> flat = {1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(pearson_correlation(x, flat), NumericError);
    CHECK_THROWS_AS(pearson_correlation(x, std::vector<double>{1.0, 2.0}), ArgumentError);
    CHECK_THROWS_AS(pearson_correlation(std::vector<double>{1.0, 2.0},
                                        std::vector<double>{2.0, 1.0}),
                    ArgumentError);
}

TEST_CASE("contextual scores predict outcomes better than vanilla") {
    auto samples = bench::make_consistency_samples(404, 90);
    // Encoders must come from the same world as the samples.
    SyntheticConfig c;
    c.seed = 404;
    c.dim = 64;
    c.noise_sigma = 0.05;
    c.vocabulary = bench::pseudo_words(160);
    auto world = make_synthetic_world(c);
    SyntheticTextEncoder text(world);
    SyntheticImageEncoder image(world);
    SyntheticSentenceEncoder sent(world);
    auto [ctx, van] = ranking_consistency_eval(samples, text, image, sent);
    CHECK(ctx.method == MatchMethod::Contextual);
    CHECK(van.method == MatchMethod::Vanilla);
    CHECK(ctx.sample_count == samples.size());
    CHECK(ctx.pcc > van.pcc);
    CHECK(ctx.pcc > 0.5);
}

TEST_CASE("ranked list serializes with ranks") {
    Fixture f;
    std::string base = f.word(0);
    Image showcase = f.proxy->generate(base + ", " + f.word(1), 0);
    Embedding s = f.image->encode_image(showcase);
    ModifierPool pool;
    pool.insert({f.word(1), ModifierKind::DynamicSubjectDetail, ""});
    pool.insert({f.word(2), ModifierKind::Static, ""});
    auto ranked = rank_modifiers(pool, base, s, *f.text, MatchMethod::Contextual);
    nlohmann::json j = ranked_to_json(ranked);
    REQUIRE(j.size() == 2);
    CHECK(j[0].at("rank").get<int>() == 0);
    CHECK(j[1].at("rank").get<int>() == 1);
    CHECK(j[0].at("text").get<std::string>() == f.word(1));
}

TEST_CASE("consistency eval needs at least 3 samples") {
    Fixture f;
    std::vector<ConsistencySample> few;
    SyntheticSentenceEncoder sent(f.world);
    CHECK_THROWS_AS(ranking_consistency_eval(few, *f.text, *f.image, sent), ArgumentError);
}
