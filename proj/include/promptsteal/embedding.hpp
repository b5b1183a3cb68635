#ifndef PROMPTSTEAL_EMBEDDING_HPP
#define PROMPTSTEAL_EMBEDDING_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "promptsteal/common.hpp"

namespace promptsteal {

struct Embedding {
    std::vector<double> values;

    Embedding() = default;
    explicit Embedding(std::vector<double> v) : values(std::move(v)) {}
    explicit Embedding(size_t dim) : values(dim, 0.0) {}

    size_t dim() const { return values.size(); }
    double& operator[](size_t i) { return values[i]; }
    double operator[](size_t i) const { return values[i]; }

    bool operator==(const Embedding& other) const { return values == other.values; }
};

inline void check_same_dim(const Embedding& a, const Embedding& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw ArgumentError(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
    if (a.dim() == 0) {
        throw ArgumentError(std::string(what) + ": empty embeddings");
    }
}

inline double dot(const Embedding& a, const Embedding& b) {
    check_same_dim(a, b, "dot");
    double s = 0.0;
    for (size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Embedding& a) {
    double s = 0.0;
    for (double v : a.values) s += v * v;
    return std::sqrt(s);
}

inline Embedding normalized(const Embedding& a) {
    double n = norm(a);
    if (!(n > 0.0)) {
        throw ZeroEmbeddingError("cannot normalize a zero embedding");
    }
    Embedding out(a.values);
    for (double& v : out.values) v /= n;
    return out;
}

// Cosine similarity, clamped to [-1, 1] against rounding spill. Zero-norm
// inputs are a caller bug (or an all-unknown text) and raise, never NaN.
inline double cosine_similarity(const Embedding& a, const Embedding& b) {
    check_same_dim(a, b, "cosine_similarity");
    double na = norm(a);
    double nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw ZeroEmbeddingError("cosine similarity undefined for zero embeddings");
    }
    double c = dot(a, b) / (na * nb);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_EMBEDDING_HPP
