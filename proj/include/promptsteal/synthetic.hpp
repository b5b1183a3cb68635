#ifndef PROMPTSTEAL_SYNTHETIC_HPP
#define PROMPTSTEAL_SYNTHETIC_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/parser.hpp"
#include "promptsteal/rng.hpp"

namespace promptsteal {

// Stream tags keep the per-purpose RNG streams apart.
namespace synth_tags {
inline constexpr uint64_t kWord = 0x57524400;     // word vectors
inline constexpr uint64_t kProxy = 0x50585900;    // proxy generation noise
inline constexpr uint64_t kCaption = 0x43415000;  // caption sampling
inline constexpr uint64_t kProj = 0x504a4300;     // projection encoders
}  // namespace synth_tags

struct SyntheticConfig {
    uint64_t seed = 7;
    int dim = 64;
    double noise_sigma = 0.05;
    std::vector<std::string> vocabulary;
};

// The hidden prompt behind a showcase image; the captioner paraphrases it.
struct CaptionTarget {
    std::string subject;
    std::vector<std::string> phrases;
};

// Immutable ground-truth universe: a vocabulary with one fixed unit vector
// per word. Every vector is derived from (seed, word) alone, so adding or
// reordering vocabulary entries never disturbs existing vectors.
class SyntheticWorld {
public:
    explicit SyntheticWorld(SyntheticConfig config) : config_(std::move(config)) {
        if (config_.dim < 2) throw ConfigError("synthetic world: dim must be >= 2");
        if (!(config_.noise_sigma >= 0.0)) {
            throw ConfigError("synthetic world: noise_sigma must be >= 0");
        }
        if (config_.vocabulary.empty()) {
            throw ConfigError("synthetic world: vocabulary must not be empty");
        }
        for (const std::string& word : config_.vocabulary) {
            std::string key = fold_case(trim(word));
            if (key.empty()) throw ConfigError("synthetic world: blank vocabulary entry");
            if (vectors_.count(key)) continue;  // case-insensitive duplicates collapse
            vectors_.emplace(key, make_word_vector(key));
        }
    }

    const SyntheticConfig& config() const { return config_; }
    uint64_t seed() const { return config_.seed; }
    int dim() const { return config_.dim; }
    double noise_sigma() const { return config_.noise_sigma; }

    bool has_word(std::string_view word) const {
        return vectors_.count(fold_case(word)) > 0;
    }

    const Embedding* word_vector(std::string_view word) const {
        auto it = vectors_.find(fold_case(word));
        return it == vectors_.end() ? nullptr : &it->second;
    }

    // Bag-of-words text embedding: mean of known word vectors (token
    // multiplicity counts), unit-normalized. Unknown words are skipped; a
    // text with no known word has no direction and raises.
    Embedding embed_text(std::string_view text) const {
        std::vector<std::string> words = tokenize_words(text);
        if (words.empty()) throw ArgumentError("embed_text: no word tokens in text");
        Embedding sum(static_cast<size_t>(config_.dim));
        int known = 0;
        for (const std::string& w : words) {
            const Embedding* v = word_vector(w);
            if (!v) continue;
            for (int i = 0; i < config_.dim; ++i) sum[i] += (*v)[i];
            ++known;
        }
        if (known == 0) {
            throw ZeroEmbeddingError("embed_text: no known words in \"" +
                                     normalize_whitespace(text) + "\"");
        }
        for (int i = 0; i < config_.dim; ++i) sum[i] /= known;
        return normalized(sum);
    }

private:
    Embedding make_word_vector(const std::string& folded) const {
        rng::Stream stream(rng::mix(rng::mix(config_.seed, synth_tags::kWord),
                                    rng::fnv1a64(folded)));
        Embedding v(static_cast<size_t>(config_.dim));
        for (int i = 0; i < config_.dim; ++i) v[i] = stream.next_gaussian();
        return normalized(v);
    }

    SyntheticConfig config_;
    std::unordered_map<std::string, Embedding> vectors_;
};

// Feature image codec: embeddings in [-1, 1] map affinely onto a 1 x dim x 1
// image in [0, 1]. Values outside [-1, 1] (possible only with large proxy
// noise) saturate, because Image's range invariant wins.
inline Image render_feature_image(const std::vector<double>& components) {
    if (components.empty()) throw ArgumentError("render_feature_image: empty vector");
    Image img(1, static_cast<int>(components.size()), 1);
    for (size_t i = 0; i < components.size(); ++i) {
        img.pixels[i] = clamp01((components[i] + 1.0) * 0.5);
    }
    return img;
}

inline Embedding decode_feature_image(const Image& img) {
    img.validate("decode_feature_image input");
    Embedding e(img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        e[i] = 2.0 * img.pixels[i] - 1.0;
    }
    return e;
}

class SyntheticTextEncoder final : public TextEncoder {
public:
    explicit SyntheticTextEncoder(std::shared_ptr<const SyntheticWorld> world)
        : world_(std::move(world)) {}
    Embedding encode_text(std::string_view text) const override {
        return world_->embed_text(text);
    }
    int dim() const override { return world_->dim(); }

private:
    std::shared_ptr<const SyntheticWorld> world_;
};

// Linear image encoder: flattens the feature image back to its embedding.
// Linearity makes the vjp exact, which the gradient defenses rely on.
class SyntheticImageEncoder final : public GradientImageEncoder {
public:
    explicit SyntheticImageEncoder(std::shared_ptr<const SyntheticWorld> world)
        : world_(std::move(world)) {}

    Embedding encode_image(const Image& image) const override {
        check_shape(image);
        return decode_feature_image(image);
    }

    Image encode_vjp(const Image& x, const Embedding& cotangent) const override {
        check_shape(x);
        if (static_cast<int>(cotangent.dim()) != world_->dim()) {
            throw ArgumentError("encode_vjp: cotangent dimension mismatch");
        }
        Image grad(x.height, x.width, x.channels);
        for (size_t i = 0; i < grad.pixels.size(); ++i) {
            grad.pixels[i] = 2.0 * cotangent[i];
        }
        return grad;
    }

    int dim() const override { return world_->dim(); }

private:
    void check_shape(const Image& image) const {
        if (image.height != 1 || image.channels != 1 || image.width != world_->dim()) {
            throw ArgumentError("synthetic image encoder expects a 1 x " +
                                std::to_string(world_->dim()) + " x 1 feature image");
        }
    }
    std::shared_ptr<const SyntheticWorld> world_;
};

// Rank-reduced linear encoder with its own seed. Stands in for a defender
// model whose structure differs from the attacker's: it sees the same
// feature images but through a random projection.
class SyntheticProjectionEncoder final : public GradientImageEncoder {
public:
    SyntheticProjectionEncoder(std::shared_ptr<const SyntheticWorld> world, uint64_t seed,
                               int out_dim)
        : world_(std::move(world)), out_dim_(out_dim) {
        if (out_dim_ < 1 || out_dim_ > world_->dim()) {
            throw ConfigError("projection encoder: out_dim must be in [1, dim]");
        }
        rng::Stream stream(rng::mix(rng::mix(seed, synth_tags::kProj),
                                    static_cast<uint64_t>(out_dim_)));
        int in = world_->dim();
        matrix_.resize(static_cast<size_t>(out_dim_) * in);
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (double& m : matrix_) m = stream.next_gaussian() * scale;
    }

    Embedding encode_image(const Image& image) const override {
        Embedding x = base_embedding(image);
        int in = world_->dim();
        Embedding y(static_cast<size_t>(out_dim_));
        for (int r = 0; r < out_dim_; ++r) {
            double s = 0.0;
            for (int c = 0; c < in; ++c) s += matrix_[static_cast<size_t>(r) * in + c] * x[c];
            y[r] = s;
        }
        return y;
    }

    Image encode_vjp(const Image& x, const Embedding& cotangent) const override {
        if (static_cast<int>(cotangent.dim()) != out_dim_) {
            throw ArgumentError("encode_vjp: cotangent dimension mismatch");
        }
        check_shape(x);
        int in = world_->dim();
        Image grad(x.height, x.width, x.channels);
        for (int c = 0; c < in; ++c) {
            double s = 0.0;
            for (int r = 0; r < out_dim_; ++r) {
                s += matrix_[static_cast<size_t>(r) * in + c] * cotangent[r];
            }
            grad.pixels[static_cast<size_t>(c)] = 2.0 * s;
        }
        return grad;
    }

    int dim() const override { return out_dim_; }

private:
    void check_shape(const Image& image) const {
        if (image.height != 1 || image.channels != 1 || image.width != world_->dim()) {
            throw ArgumentError("projection encoder expects a 1 x " +
                                std::to_string(world_->dim()) + " x 1 feature image");
        }
    }
    Embedding base_embedding(const Image& image) const {
        check_shape(image);
        return decode_feature_image(image);
    }

    std::shared_ptr<const SyntheticWorld> world_;
    int out_dim_;
    std::vector<double> matrix_;
};

// Reads only the feature coordinates in [lo, hi). Stands in for an encoder
// family that extracts part of the feature space, so perturbations tuned
// against one family need not transfer to another.
class SyntheticSliceEncoder final : public GradientImageEncoder {
public:
    SyntheticSliceEncoder(std::shared_ptr<const SyntheticWorld> world, int lo, int hi)
        : world_(std::move(world)), lo_(lo), hi_(hi) {
        if (lo_ < 0 || hi_ <= lo_ || hi_ > world_->dim()) {
            throw ConfigError("slice encoder: window must satisfy 0 <= lo < hi <= dim");
        }
    }

    Embedding encode_image(const Image& image) const override {
        check_shape(image);
        Embedding x = decode_feature_image(image);
        Embedding y(static_cast<size_t>(hi_ - lo_));
        for (int i = lo_; i < hi_; ++i) y[static_cast<size_t>(i - lo_)] = x[static_cast<size_t>(i)];
        return y;
    }

    Image encode_vjp(const Image& x, const Embedding& cotangent) const override {
        if (static_cast<int>(cotangent.dim()) != hi_ - lo_) {
            throw ArgumentError("encode_vjp: cotangent dimension mismatch");
        }
        check_shape(x);
        Image grad(x.height, x.width, x.channels);
        for (int i = lo_; i < hi_; ++i) {
            grad.pixels[static_cast<size_t>(i)] = 2.0 * cotangent[static_cast<size_t>(i - lo_)];
        }
        return grad;
    }

    int dim() const override { return hi_ - lo_; }

private:
    void check_shape(const Image& image) const {
        if (image.height != 1 || image.channels != 1 || image.width != world_->dim()) {
            throw ArgumentError("slice encoder expects a 1 x " + std::to_string(world_->dim()) +
                                " x 1 feature image");
        }
    }

    std::shared_ptr<const SyntheticWorld> world_;
    int lo_;
    int hi_;
};

// Text-conditioned generator stand-in: encodes the prompt, adds seeded
// Gaussian noise in embedding space, renders a feature image. Noise depends
// on (seed, prompt text), so repeated queries replay bit-identically while
// different prompts draw independent noise.
class SyntheticProxy final : public ProxyModel {
public:
    explicit SyntheticProxy(std::shared_ptr<const SyntheticWorld> world)
        : world_(std::move(world)) {}

    Image generate(std::string_view prompt, uint64_t seed) const override {
        Embedding e;
        try {
            e = world_->embed_text(prompt);
        } catch (const Error& err) {
            throw QueryError("proxy cannot render \"" + normalize_whitespace(prompt) +
                             "\": " + err.what());
        }
        double sigma = world_->noise_sigma();
        std::vector<double> comps(e.values);
        if (sigma > 0.0) {
            rng::Stream stream(rng::mix(rng::mix(seed, synth_tags::kProxy),
                                        rng::fnv1a64(fold_case(prompt))));
            for (double& c : comps) c += sigma * stream.next_gaussian();
        }
        return render_feature_image(comps);
    }

private:
    std::shared_ptr<const SyntheticWorld> world_;
};

// Pixel-space Euclidean distance; the stand-in for a learned perceptual
// metric. Zero iff the images match exactly.
class SyntheticPerceptual final : public PerceptualMetric {
public:
    double distance(const Image& a, const Image& b) const override {
        if (!a.same_shape(b)) throw ArgumentError("perceptual distance: shape mismatch");
        if (a.size() == 0) throw ArgumentError("perceptual distance: empty images");
        double s = 0.0;
        for (size_t i = 0; i < a.pixels.size(); ++i) {
            double d = a.pixels[i] - b.pixels[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
};

class SyntheticSentenceEncoder final : public SentenceEncoder {
public:
    explicit SyntheticSentenceEncoder(std::shared_ptr<const SyntheticWorld> world)
        : world_(std::move(world)) {}
    Embedding encode_sentence(std::string_view text) const override {
        return world_->embed_text(text);
    }
    int dim() const override { return world_->dim(); }

private:
    std::shared_ptr<const SyntheticWorld> world_;
};

// Samples noisy paraphrases of a configured hidden target. Caption i is a
// pure function of (seed, i): the subject always appears, each phrase is
// kept with probability t/(t+1). Prefix stability follows, which is what
// makes coverage-vs-caption-count curves monotone.
class SyntheticCaptioner final : public Captioner {
public:
    SyntheticCaptioner(std::shared_ptr<const SyntheticWorld> world, CaptionTarget target)
        : world_(std::move(world)), target_(std::move(target)) {
        if (trim(target_.subject).empty()) {
            throw ConfigError("synthetic captioner: target subject must not be empty");
        }
    }

    std::vector<std::string> sample_captions(const Image& image, int count, double temperature,
                                             uint64_t seed) const override {
        (void)image;  // the target is configured, not inferred
        if (count < 1) throw ArgumentError("sample_captions: count must be >= 1");
        if (!(temperature > 0.0)) throw ArgumentError("sample_captions: temperature must be > 0");
        double keep = temperature / (temperature + 1.0);
        std::vector<std::string> captions;
        captions.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            rng::Stream stream(rng::mix(rng::mix(seed, synth_tags::kCaption),
                                        static_cast<uint64_t>(i)));
            std::string cap = target_.subject;
            for (const std::string& phrase : target_.phrases) {
                if (stream.next_double() < keep) {
                    cap += ", ";
                    cap += phrase;
                }
            }
            captions.push_back(std::move(cap));
        }
        return captions;
    }

    std::string caption(const Image& image) const override {
        (void)image;
        return target_.subject;
    }

private:
    std::shared_ptr<const SyntheticWorld> world_;
    CaptionTarget target_;
};

inline std::shared_ptr<const SyntheticWorld> make_synthetic_world(SyntheticConfig config) {
    return std::make_shared<const SyntheticWorld>(std::move(config));
}

inline std::string synthetic_backend_id(const SyntheticWorld& world) {
    return "synthetic(seed=" + std::to_string(world.seed()) +
           ",dim=" + std::to_string(world.dim()) +
           ",sigma=" + std::to_string(world.noise_sigma()) + ")";
}

// Assemble a full bundle over one world. The caption target is required
// because the synthetic captioner has no vision of its own.
inline BackendBundle make_synthetic_bundle(std::shared_ptr<const SyntheticWorld> world,
                                           CaptionTarget target) {
    BackendBundle b;
    b.captioner = std::make_shared<SyntheticCaptioner>(world, std::move(target));
    b.text_encoder = std::make_shared<SyntheticTextEncoder>(world);
    b.image_encoder = std::make_shared<SyntheticImageEncoder>(world);
    b.proxy = std::make_shared<SyntheticProxy>(world);
    b.perceptual = std::make_shared<SyntheticPerceptual>();
    b.sentence_encoder = std::make_shared<SyntheticSentenceEncoder>(world);
    b.parser = std::make_shared<RuleParser>();
    b.id = synthetic_backend_id(*world);
    b.require_complete();
    return b;
}

// A compact default vocabulary so the CLI runs out of the box; serious use
// supplies its own word list.
inline std::vector<std::string> default_vocabulary() {
    return {
        "a", "an", "the", "on", "in", "at", "of", "under", "over", "near",
        "during", "front", "behind", "castle", "cliff", "forest", "mountain",
        "river", "ocean", "beach", "city", "street", "bridge", "tower", "hill",
        "valley", "desert", "island", "sky", "cloud", "clouds", "moon", "stars",
        "sunset", "sunrise", "night", "storm", "fog", "snow", "rain", "cat",
        "dog", "dragon", "wizard", "knight", "robot", "astronaut", "pirate",
        "fox", "owl", "whale", "horse", "samurai", "queen", "king", "garden",
        "lake", "temple", "village", "market", "library", "lighthouse", "ship",
        "train", "car", "red", "blue", "green", "golden", "purple", "white",
        "black", "silver", "ancient", "giant", "tiny", "glowing", "frozen",
        "misty", "crystal", "stone", "wooden", "neon", "oil", "painting",
        "watercolor", "sketch", "photograph", "render", "art", "style",
        "detailed", "realistic", "cinematic", "dramatic", "soft", "light",
        "lighting", "hyperrealistic", "majestic", "epic", "vibrant", "dark",
    };
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_SYNTHETIC_HPP
