#ifndef PROMPTSTEAL_BACKENDS_HPP
#define PROMPTSTEAL_BACKENDS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "promptsteal/common.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/parser.hpp"

namespace promptsteal {

// Capability interfaces. A backend bundle wires one implementation of each;
// the pipeline only ever talks to these, so the synthetic world and real
// model adapters are interchangeable.

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual Embedding encode_text(std::string_view text) const = 0;
    virtual int dim() const = 0;
};

class ImageEncoder {
public:
    virtual ~ImageEncoder() = default;
    virtual Embedding encode_image(const Image& image) const = 0;
    virtual int dim() const = 0;
};

// An image encoder that can also pull gradients back through itself.
// encode_vjp returns d<cotangent, encode(x)>/dx as an image-shaped array.
class GradientImageEncoder : public ImageEncoder {
public:
    virtual Image encode_vjp(const Image& x, const Embedding& cotangent) const = 0;
};

class Captioner {
public:
    virtual ~Captioner() = default;
    virtual std::vector<std::string> sample_captions(const Image& image, int count,
                                                     double temperature, uint64_t seed) const = 0;
    // Greedy single caption, used as the attack's base prompt.
    virtual std::string caption(const Image& image) const = 0;
};

class ProxyModel {
public:
    virtual ~ProxyModel() = default;
    virtual Image generate(std::string_view prompt, uint64_t seed) const = 0;
};

class PerceptualMetric {
public:
    virtual ~PerceptualMetric() = default;
    // A distance: 0 for identical images, larger means further apart.
    virtual double distance(const Image& a, const Image& b) const = 0;
};

class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;
    virtual Embedding encode_sentence(std::string_view text) const = 0;
    virtual int dim() const = 0;
};

struct BackendBundle {
    std::shared_ptr<const Captioner> captioner;
    std::shared_ptr<const TextEncoder> text_encoder;
    std::shared_ptr<const ImageEncoder> image_encoder;
    std::shared_ptr<const ProxyModel> proxy;
    std::shared_ptr<const PerceptualMetric> perceptual;
    std::shared_ptr<const SentenceEncoder> sentence_encoder;
    std::shared_ptr<const DependencyParser> parser;
    std::string id;  // human-readable backend description for reports

    void require_complete() const {
        if (!captioner || !text_encoder || !image_encoder || !proxy || !perceptual ||
            !sentence_encoder || !parser) {
            throw ConfigError("backend bundle is missing a capability");
        }
        if (text_encoder->dim() != image_encoder->dim()) {
            throw ConfigError("text and image encoders disagree on dimension");
        }
    }
};

// Validated front doors; pipeline code calls these instead of the raw
// virtuals so precondition errors carry consistent messages.

inline Embedding encode_text(const BackendBundle& b, std::string_view text) {
    if (trim(text).empty()) throw ArgumentError("encode_text: empty text");
    return b.text_encoder->encode_text(text);
}

inline Embedding encode_image(const BackendBundle& b, const Image& image) {
    image.validate("encode_image input");
    return b.image_encoder->encode_image(image);
}

inline std::vector<std::string> sample_captions(const BackendBundle& b, const Image& image,
                                                int count, double temperature, uint64_t seed) {
    if (count < 1) throw ArgumentError("sample_captions: count must be >= 1");
    if (!(temperature > 0.0)) throw ArgumentError("sample_captions: temperature must be > 0");
    image.validate("sample_captions input");
    return b.captioner->sample_captions(image, count, temperature, seed);
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_BACKENDS_HPP
