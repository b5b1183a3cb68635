#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "promptsteal/rng.hpp"

using namespace promptsteal;

namespace {

// Reference splitmix64, written out independently of the header.
uint64_t ref_splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("splitmix64 matches the published seed-zero sequence") {
    uint64_t state = 0;
    CHECK(rng::splitmix64_next(state) == 0xe220a8397b1dcdafULL);
    CHECK(rng::splitmix64_next(state) == 0x6e789e6aa1b965f4ULL);
    CHECK(rng::splitmix64_next(state) == 0x06c45d188009454fULL);
}

TEST_CASE("splitmix64 agrees with an independent reimplementation") {
    uint64_t a = 0x123456789abcdef0ULL;
    uint64_t b = a;
    for (int i = 0; i < 100; ++i) {
        CHECK(rng::splitmix64_next(a) == ref_splitmix64(b));
    }
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(rng::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(rng::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(rng::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("mix derives distinct stable stream seeds") {
    CHECK(rng::mix(7, 1) == rng::mix(7, 1));
    std::set<uint64_t> seen;
    for (uint64_t tag = 0; tag < 64; ++tag) {
        seen.insert(rng::mix(7, tag));
        seen.insert(rng::mix(8, tag));
    }
    CHECK(seen.size() == 128);
}

TEST_CASE("next_double stays in [0, 1)") {
    rng::Stream s(42);
    for (int i = 0; i < 10000; ++i) {
        double d = s.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("next_int covers its inclusive range") {
    rng::Stream s(3);
    std::set<int64_t> seen;
    for (int i = 0; i < 400; ++i) {
        int64_t v = s.next_int(-2, 3);
        CHECK(v >= -2);
        CHECK(v <= 3);
        seen.insert(v);
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("next_gaussian reproduces the Box-Muller formula") {
    rng::Stream s(99);
    rng::Stream probe(99);
    for (int i = 0; i < 50; ++i) {
        double u1 = probe.next_double();
        double u2 = probe.next_double();
        double expected =
            std::sqrt(-2.0 * std::log1p(-u1)) *
            std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
        CHECK(s.next_gaussian() == expected);
    }
}

TEST_CASE("next_gaussian consumes exactly two uniforms per call") {
    rng::Stream a(5);
    rng::Stream b(5);
    a.next_gaussian();
    b.next_double();
    b.next_double();
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("gaussian sample moments are near standard normal") {
    rng::Stream s(2024);
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = s.next_gaussian();
        sum += g;
        sq += g * g;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("streams with equal seeds replay bit-identically") {
    rng::Stream a(rng::mix(11, 22));
    rng::Stream b(rng::mix(11, 22));
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}
