#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "promptsteal/parser.hpp"

using namespace promptsteal;

namespace {

ParseResult parse(const std::string& s) {
    static const RuleParser parser;
    return parser.parse(s);
}

std::vector<std::string> tags_of(const ParseResult& r) {
    std::vector<std::string> out;
    for (const auto& t : r.tokens) out.push_back(to_string(t.tag));
    return out;
}

std::vector<std::string> chunk_texts(const ParseResult& r) {
    std::vector<std::string> out;
    for (const auto& c : r.noun_chunks) {
        std::string s;
        for (int i = c.begin; i < c.end; ++i) {
            if (!s.empty()) s += ' ';
            s += r.tokens[i].text;
        }
        out.push_back(s);
    }
    return out;
}

const ParseToken& token(const ParseResult& r, const std::string& text) {
    for (const auto& t : r.tokens) {
        if (t.text == text) return t;
    }
    FAIL("token not found: " << text);
    return r.tokens.front();
}

}  // namespace

TEST_CASE("tokenizer splits punctuation and keeps interior hyphens") {
    ParseResult r = parse("a well-lit room, at night");
    std::vector<std::string> texts;
    for (const auto& t : r.tokens) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"a", "well-lit", "room", ",", "at", "night"});
    CHECK(r.tokens[3].tag == PosTag::Punct);
}

TEST_CASE("closed-class lexicons drive tagging") {
    ParseResult r = parse("the cat sleeps under two trees");
    CHECK(tags_of(r) ==
          std::vector<std::string>{"DET", "NOUN", "VERB", "ADP", "NUM", "NOUN"});
}

TEST_CASE("unknown words default to NOUN, capitalized ones to PROPN") {
    ParseResult r = parse("a zorblax near Mickey");
    CHECK(token(r, "zorblax").tag == PosTag::Noun);
    CHECK(token(r, "Mickey").tag == PosTag::Propn);
    ParseResult lead = parse("Mickey waves");
    CHECK(lead.tokens[0].tag == PosTag::Noun);
}

TEST_CASE("digits and number words tag as NUM") {
    ParseResult r = parse("3 dragons and three cats");
    CHECK(token(r, "3").tag == PosTag::Num);
    CHECK(token(r, "three").tag == PosTag::Num);
    CHECK(token(r, "and").tag == PosTag::Conj);
}

TEST_CASE("suffix heuristics catch adjectives and adverbs") {
    ParseResult r = parse("a colorful gracefully wondrous greenish bird");
    CHECK(token(r, "colorful").tag == PosTag::Adj);
    CHECK(token(r, "gracefully").tag == PosTag::Adv);
    CHECK(token(r, "wondrous").tag == PosTag::Adj);
    CHECK(token(r, "greenish").tag == PosTag::Adj);
}

TEST_CASE("participles disambiguate by context") {
    CHECK(token(parse("two robots are dancing"), "dancing").tag == PosTag::Verb);
    CHECK(token(parse("a glowing castle"), "glowing").tag == PosTag::Adj);
    CHECK(token(parse("a man running through fog"), "running").tag == PosTag::Verb);
    // Plain -ing nouns stay nouns.
    CHECK(token(parse("an oil painting of a king"), "painting").tag == PosTag::Noun);
    CHECK(token(parse("light in the morning"), "morning").tag == PosTag::Noun);
}

TEST_CASE("noun chunks are maximal det-adj-num-noun runs ending on a noun") {
    CHECK(chunk_texts(parse("the big red fox jumps over the lazy dog")) ==
          std::vector<std::string>{"the big red fox", "the lazy dog"});
    CHECK(chunk_texts(parse("two tall ancient towers")) ==
          std::vector<std::string>{"two tall ancient towers"});
    // A run with no noun yields no chunk.
    CHECK(chunk_texts(parse("very quickly")).empty());
    // The chunk stops at its last noun, dangling determiners drop off.
    CHECK(chunk_texts(parse("a castle the")) == std::vector<std::string>{"a castle"});
}

TEST_CASE("chunk head is the last noun of the chunk") {
    ParseResult r = parse("a crystal orb glows");
    REQUIRE(r.noun_chunks.size() == 1);
    CHECK(r.tokens[r.noun_chunks[0].head].text == "orb");
}

TEST_CASE("subject and object attach to the verb") {
    ParseResult r = parse("the wizard holds a crystal orb");
    const ParseToken& wizard = token(r, "wizard");
    const ParseToken& orb = token(r, "orb");
    const ParseToken& holds = token(r, "holds");
    CHECK(holds.dep == "root");
    CHECK(holds.head == -1);
    CHECK(wizard.dep == "nsubj");
    CHECK(r.tokens[wizard.head].text == "holds");
    CHECK(orb.dep == "dobj");
    CHECK(r.tokens[orb.head].text == "holds");
}

TEST_CASE("prepositions claim the next chunk head as pobj") {
    ParseResult r = parse("a cat sits on a red roof");
    const ParseToken& on = token(r, "on");
    const ParseToken& roof = token(r, "roof");
    CHECK(on.dep == "prep");
    CHECK(r.tokens[on.head].text == "sits");
    CHECK(roof.dep == "pobj");
    CHECK(r.tokens[roof.head].text == "on");
}

TEST_CASE("chained prepositions nest") {
    ParseResult r = parse("statues in front of a large room");
    const ParseToken& in = token(r, "in");
    const ParseToken& front = token(r, "front");
    const ParseToken& of = token(r, "of");
    const ParseToken& room = token(r, "room");
    CHECK(r.tokens[in.head].text == "statues");
    CHECK(front.dep == "pobj");
    CHECK(r.tokens[front.head].text == "in");
    CHECK(of.dep == "prep");
    CHECK(r.tokens[of.head].text == "front");
    CHECK(room.dep == "pobj");
    CHECK(r.tokens[room.head].text == "of");
}

TEST_CASE("objectless preposition becomes a particle") {
    ParseResult r = parse("the owl looks up");
    CHECK(token(r, "up").dep == "prt");
}

TEST_CASE("chunk internals link to the head with det amod nummod compound") {
    ParseResult r = parse("two shiny brass keys");
    CHECK(token(r, "two").dep == "nummod");
    CHECK(token(r, "brass").dep == "compound");
    const ParseToken& keys = token(r, "keys");
    CHECK(keys.dep == "root");
    for (const std::string& w : {"two", "shiny", "brass"}) {
        CHECK(r.tokens[token(r, w).head].text == "keys");
    }
}

TEST_CASE("rootless fragment roots its first unclaimed chunk head") {
    ParseResult r = parse("a dragon over the sea");
    const ParseToken& dragon = token(r, "dragon");
    CHECK(dragon.dep == "root");
    CHECK(r.tokens[token(r, "over").head].text == "dragon");
}

TEST_CASE("empty input raises") {
    RuleParser p;
    CHECK_THROWS_AS(p.parse(""), ArgumentError);
    CHECK_THROWS_AS(p.parse("   "), ArgumentError);
}

TEST_CASE("children_of inverts the head relation") {
    ParseResult r = parse("a cat sits on a mat");
    auto kids = children_of(r);
    int sits = -1;
    for (size_t i = 0; i < r.tokens.size(); ++i) {
        if (r.tokens[i].text == "sits") sits = static_cast<int>(i);
    }
    REQUIRE(sits >= 0);
    bool cat_is_child = false;
    for (int k : kids[static_cast<size_t>(sits)]) {
        if (r.tokens[static_cast<size_t>(k)].text == "cat") cat_is_child = true;
    }
    CHECK(cat_is_child);
}
