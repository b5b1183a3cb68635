#ifndef PROMPTSTEAL_RNG_HPP
#define PROMPTSTEAL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

// Hand-rolled generators instead of <random> distributions: the standard
// leaves normal_distribution implementation-defined, and runs must replay
// bit-identically from a persisted seed regardless of the stdlib build.

namespace promptsteal::rng {

inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to turn strings (words, prompts) into stream seeds.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive an independent stream seed from a base seed and a tag. Chaining
// mix calls gives hierarchical streams (world -> purpose -> item).
inline uint64_t mix(uint64_t seed, uint64_t tag) {
    uint64_t state = seed ^ (0x632be59bd9b4e019ULL + tag);
    uint64_t a = splitmix64_next(state);
    state ^= tag * 0x9e3779b97f4a7c15ULL;
    return a ^ splitmix64_next(state);
}

class Stream {
public:
    explicit Stream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] inclusive.
    int64_t next_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    // Box-Muller, cosine branch only. Each call consumes exactly two
    // uniforms, so the stream position does not depend on caller history.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        // Shift u1 away from zero so the log is finite.
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

private:
    uint64_t state_;
};

}  // namespace promptsteal::rng

#endif  // PROMPTSTEAL_RNG_HPP
