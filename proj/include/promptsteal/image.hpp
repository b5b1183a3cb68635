#ifndef PROMPTSTEAL_IMAGE_HPP
#define PROMPTSTEAL_IMAGE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "promptsteal/common.hpp"

namespace promptsteal {

// Dense float image, row-major H x W x C, values in [0, 1]. Synthetic
// backends use 1 x dim x 1 "feature images" that carry an embedding.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          pixels(static_cast<size_t>(h) * static_cast<size_t>(w) * static_cast<size_t>(c), fill) {}

    size_t size() const { return pixels.size(); }

    double& at(int y, int x, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }

    bool operator==(const Image& other) const {
        return same_shape(other) && pixels == other.pixels;
    }

    // Shape and range invariants; raise instead of propagating garbage.
    void validate(const char* what = "image") const {
        if (height <= 0 || width <= 0 || channels <= 0) {
            throw ArgumentError(std::string(what) + ": non-positive dimensions");
        }
        size_t expect = static_cast<size_t>(height) * width * channels;
        if (pixels.size() != expect) {
            throw ArgumentError(std::string(what) + ": pixel count " +
                                std::to_string(pixels.size()) + " does not match shape");
        }
        for (double v : pixels) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw ArgumentError(std::string(what) + ": pixel out of [0,1]");
            }
        }
    }
};

inline double clamp01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

// Mean squared error over pixels; shapes must match.
inline double image_mse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ArgumentError("image_mse: shape mismatch");
    if (a.size() == 0) throw ArgumentError("image_mse: empty images");
    double s = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = a.pixels[i] - b.pixels[i];
        s += d * d;
    }
    return s / static_cast<double>(a.pixels.size());
}

inline double linf_distance(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ArgumentError("linf_distance: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        m = std::max(m, std::fabs(a.pixels[i] - b.pixels[i]));
    }
    return m;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_IMAGE_HPP
