#ifndef PROMPTSTEAL_DEFENSES_HPP
#define PROMPTSTEAL_DEFENSES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/font5x7.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/rng.hpp"

namespace promptsteal {

enum class DefenseKind { RandomNoise, Puzzle, Watermark, PromptGuard };

inline const char* to_string(DefenseKind k) {
    switch (k) {
        case DefenseKind::RandomNoise: return "random_noise";
        case DefenseKind::Puzzle: return "puzzle";
        case DefenseKind::Watermark: return "watermark";
        case DefenseKind::PromptGuard: return "promptguard";
    }
    return "?";
}

inline DefenseKind defense_kind_from_string(std::string_view s) {
    if (s == "random_noise") return DefenseKind::RandomNoise;
    if (s == "puzzle") return DefenseKind::Puzzle;
    if (s == "watermark") return DefenseKind::Watermark;
    if (s == "promptguard") return DefenseKind::PromptGuard;
    throw ArgumentError("unknown defense kind: " + std::string(s));
}

// Pixel-valued knobs (noise_std) are on the usual 0..255 scale and are
// converted where applied, since images here live in [0, 1].
struct DefenseConfig {
    DefenseKind kind = DefenseKind::RandomNoise;
    uint64_t seed = 0;

    double noise_std = 25.0;  // gaussian sigma, 0..255 scale

    int grid_rows = 4;
    int grid_cols = 4;
    double grid_variability = 3.0;  // max per-line jitter, pixels

    std::string watermark_text = "@watermark";
    int font_size = 20;  // glyph height, pixels
    int row_gap = 20;
    int col_gap = 30;

    double epsilon = 8.0 / 255.0;  // L-inf budget on [0,1] pixels
    int steps = 200;
    double alpha = 0.5;  // weight of encoder B's term
    double beta = 0.5;   // weight of encoder C's term
    std::optional<double> step_size;  // default derived from epsilon/steps
    bool use_adam = false;

    void validate() const {
        if (!(noise_std >= 0.0)) throw ConfigError("defense: noise_std must be >= 0");
        if (grid_rows < 1 || grid_cols < 1) {
            throw ConfigError("defense: grid must be at least 1x1");
        }
        if (!(grid_variability >= 0.0)) {
            throw ConfigError("defense: grid_variability must be >= 0");
        }
        if (kind == DefenseKind::Watermark && watermark_text.empty()) {
            throw ConfigError("defense: watermark text must not be empty");
        }
        if (font_size < 1) throw ConfigError("defense: font_size must be >= 1");
        if (row_gap < 0 || col_gap < 0) throw ConfigError("defense: gaps must be >= 0");
        // epsilon = 0 is allowed as the degenerate no-op defense.
        if (!(epsilon >= 0.0) || epsilon > 1.0) {
            throw ConfigError("defense: epsilon must be in [0, 1]");
        }
        if (steps < 1) throw ConfigError("defense: steps must be >= 1");
        if (!(alpha >= 0.0) || !(beta >= 0.0) || alpha + beta <= 0.0) {
            throw ConfigError("defense: alpha and beta must be >= 0 with a positive sum");
        }
        if (step_size && !(*step_size > 0.0)) {
            throw ConfigError("defense: step_size must be > 0");
        }
    }
};

inline nlohmann::json defense_config_to_json(const DefenseConfig& c) {
    nlohmann::json j{{"kind", to_string(c.kind)},
                     {"seed", c.seed},
                     {"noise_std", c.noise_std},
                     {"grid_rows", c.grid_rows},
                     {"grid_cols", c.grid_cols},
                     {"grid_variability", c.grid_variability},
                     {"watermark_text", c.watermark_text},
                     {"font_size", c.font_size},
                     {"row_gap", c.row_gap},
                     {"col_gap", c.col_gap},
                     {"epsilon", c.epsilon},
                     {"steps", c.steps},
                     {"alpha", c.alpha},
                     {"beta", c.beta},
                     {"use_adam", c.use_adam}};
    if (c.step_size) {
        j["step_size"] = *c.step_size;
    } else {
        j["step_size"] = nullptr;
    }
    return j;
}

inline DefenseConfig defense_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("defense config must be a JSON object");
    DefenseConfig c;
    if (j.contains("kind")) c.kind = defense_kind_from_string(j.at("kind").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.grid_rows = j.value("grid_rows", c.grid_rows);
    c.grid_cols = j.value("grid_cols", c.grid_cols);
    c.grid_variability = j.value("grid_variability", c.grid_variability);
    c.watermark_text = j.value("watermark_text", c.watermark_text);
    c.font_size = j.value("font_size", c.font_size);
    c.row_gap = j.value("row_gap", c.row_gap);
    c.col_gap = j.value("col_gap", c.col_gap);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.steps = j.value("steps", c.steps);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.use_adam = j.value("use_adam", c.use_adam);
    if (j.contains("step_size") && !j["step_size"].is_null()) {
        c.step_size = j["step_size"].get<double>();
    }
    c.validate();
    return c;
}

// Additive seeded Gaussian pixel noise, clamped back into range.
inline Image defend_random_noise(const Image& input, const DefenseConfig& config) {
    config.validate();
    input.validate("random_noise input");
    double sigma = config.noise_std / 255.0;
    Image out = input;
    if (sigma == 0.0) return out;
    rng::Stream stream(rng::mix(config.seed, 0xD01Full));
    for (double& p : out.pixels) {
        p = clamp01(p + sigma * stream.next_gaussian());
    }
    return out;
}

// Overlay a jittered grid of dark seam lines, as if the image were cut into
// puzzle tiles. Interior seams move by up to grid_variability pixels; the
// outer border is always drawn.
inline Image defend_puzzle(const Image& input, const DefenseConfig& config) {
    config.validate();
    input.validate("puzzle input");
    if (input.height < config.grid_rows || input.width < config.grid_cols) {
        throw ArgumentError("puzzle: image smaller than the grid");
    }
    rng::Stream stream(rng::mix(config.seed, 0x9C21ull));
    int64_t v = std::llround(config.grid_variability);

    auto seam_positions = [&](int extent, int cells) {
        std::set<int> lines = {0, extent - 1};
        for (int i = 1; i < cells; ++i) {
            int base = static_cast<int>(
                std::lround(static_cast<double>(i) * extent / cells));
            int jitter = v > 0 ? static_cast<int>(stream.next_int(-v, v)) : 0;
            int pos = base + jitter;
            if (pos < 1) pos = 1;
            if (pos > extent - 2) pos = extent - 2;
            if (extent >= 3) lines.insert(pos);
        }
        return lines;
    };

    std::set<int> rows = seam_positions(input.height, config.grid_rows);
    std::set<int> cols = seam_positions(input.width, config.grid_cols);

    Image out = input;
    for (int y = 0; y < out.height; ++y) {
        bool row_hit = rows.count(y) > 0;
        for (int x = 0; x < out.width; ++x) {
            if (!row_hit && !cols.count(x)) continue;
            for (int c = 0; c < out.channels; ++c) {
                out.at(y, x, c) *= 0.2;
            }
        }
    }
    return out;
}

// Tile the watermark text across the image with the built-in 5x7 font
// scaled to font_size, alpha-blended halfway toward white.
inline Image defend_watermark(const Image& input, const DefenseConfig& config) {
    config.validate();
    input.validate("watermark input");
    if (config.watermark_text.empty()) {
        throw ArgumentError("watermark: empty text");
    }
    constexpr double kAlpha = 0.5;
    int fs = config.font_size;
    int cell_w = std::max(1, fs * font::kGlyphWidth / font::kGlyphHeight);
    int spacing = std::max(1, fs / font::kGlyphHeight);
    int advance = cell_w + spacing;
    int text_w = static_cast<int>(config.watermark_text.size()) * advance;

    Image out = input;
    for (int ty = 0; ty < out.height; ty += fs + config.row_gap) {
        for (int tx = 0; tx < out.width; tx += text_w + config.col_gap) {
            int pen_x = tx;
            for (char ch : config.watermark_text) {
                const font::Glyph* glyph = font::lookup(ch);
                if (glyph) {
                    for (int yy = 0; yy < fs; ++yy) {
                        int y = ty + yy;
                        if (y >= out.height) break;
                        int gy = yy * font::kGlyphHeight / fs;
                        for (int xx = 0; xx < cell_w; ++xx) {
                            int x = pen_x + xx;
                            if (x >= out.width) break;
                            int gx = xx * font::kGlyphWidth / cell_w;
                            bool on = ((*glyph)[static_cast<size_t>(gy)] >>
                                       (font::kGlyphWidth - 1 - gx)) & 1;
                            if (!on) continue;
                            for (int c = 0; c < out.channels; ++c) {
                                double& p = out.at(y, x, c);
                                p = p * (1.0 - kAlpha) + 1.0 * kAlpha;
                            }
                        }
                    }
                }
                pen_x += advance;
            }
        }
    }
    return out;
}

struct PromptGuardResult {
    Image image;
    std::vector<double> objective_trace;  // clean-image value, then after each step
    double initial_objective = 0.0;
    double final_objective = 0.0;
};

namespace detail {

// d cos(u, v) / d v for fixed u.
inline Embedding cosine_grad_wrt_v(const Embedding& u, const Embedding& v) {
    double nu = norm(u);
    double nv = norm(v);
    if (!(nu > 0.0) || !(nv > 0.0)) {
        throw NumericError("promptguard: zero embedding inside cosine gradient");
    }
    double c = dot(u, v) / (nu * nv);
    Embedding g(v.dim());
    for (size_t i = 0; i < v.dim(); ++i) {
        g[i] = u[i] / (nu * nv) - c * v[i] / (nv * nv);
    }
    return g;
}

inline const GradientImageEncoder& require_gradients(const ImageEncoder& enc,
                                                     const char* which) {
    const auto* g = dynamic_cast<const GradientImageEncoder*>(&enc);
    if (!g) {
        throw CapabilityError(std::string("promptguard: encoder ") + which +
                              " exposes no gradients");
    }
    return *g;
}

}  // namespace detail

// Objective used by promptguard: weighted embedding similarity between the
// clean showcase and its defended version under two encoders.
inline double promptguard_objective(const Image& clean, const Image& candidate,
                                    const ImageEncoder& enc_b, const ImageEncoder& enc_c,
                                    double alpha, double beta) {
    double obj = 0.0;
    if (alpha > 0.0) {
        obj += alpha * cosine_similarity(enc_b.encode_image(clean),
                                         enc_b.encode_image(candidate));
    }
    if (beta > 0.0) {
        obj += beta * cosine_similarity(enc_c.encode_image(clean),
                                        enc_c.encode_image(candidate));
    }
    return obj;
}

// Pixel gradient of promptguard_objective with respect to the candidate.
inline Image promptguard_gradient(const Image& clean, const Image& candidate,
                                  const GradientImageEncoder& enc_b,
                                  const GradientImageEncoder& enc_c, double alpha, double beta) {
    Image grad(candidate.height, candidate.width, candidate.channels);
    auto accumulate = [&](const GradientImageEncoder& enc, double weight) {
        if (weight <= 0.0) return;
        Embedding u = enc.encode_image(clean);
        Embedding v = enc.encode_image(candidate);
        Embedding cot = detail::cosine_grad_wrt_v(u, v);
        for (double& g : cot.values) g *= weight;
        Image part = enc.encode_vjp(candidate, cot);
        for (size_t i = 0; i < grad.pixels.size(); ++i) grad.pixels[i] += part.pixels[i];
    };
    accumulate(enc_b, alpha);
    accumulate(enc_c, beta);
    return grad;
}

// Adversarial anti-theft cloak: minimize the weighted similarity between
// the image and its perturbed copy under two encoders, constrained to an
// L-inf ball of radius epsilon around the original (and to valid pixels).
// Iterated sign-gradient descent by default, Adam if configured.
inline PromptGuardResult promptguard(const Image& showcase, const ImageEncoder& encoder_b,
                                     const ImageEncoder& encoder_c, const DefenseConfig& config) {
    config.validate();
    showcase.validate("promptguard input");
    const GradientImageEncoder& gb = detail::require_gradients(encoder_b, "B");
    const GradientImageEncoder& gc = detail::require_gradients(encoder_c, "C");

    const double eps = config.epsilon;
    const double step = config.step_size ? *config.step_size
                                         : 2.5 * (eps > 0.0 ? eps : 1.0) / config.steps;

    PromptGuardResult res;
    res.image = showcase;
    res.objective_trace.reserve(static_cast<size_t>(config.steps) + 1);
    res.initial_objective = promptguard_objective(showcase, res.image, encoder_b, encoder_c,
                                                  config.alpha, config.beta);
    res.objective_trace.push_back(res.initial_objective);

    // Cosine similarity peaks when the candidate equals the showcase, so the
    // gradient there is exactly zero. Start from a seeded random point inside
    // the ball to get a usable descent direction.
    if (eps > 0.0) {
        rng::Stream init(rng::mix(config.seed, 0xAD17ull));
        for (size_t i = 0; i < res.image.pixels.size(); ++i) {
            double delta = eps * (2.0 * init.next_double() - 1.0);
            res.image.pixels[i] = clamp01(showcase.pixels[i] + delta);
        }
    }

    auto project = [&](Image& img) {
        for (size_t i = 0; i < img.pixels.size(); ++i) {
            double delta = img.pixels[i] - showcase.pixels[i];
            if (delta > eps) delta = eps;
            if (delta < -eps) delta = -eps;
            img.pixels[i] = clamp01(showcase.pixels[i] + delta);
        }
    };

    std::vector<double> m, v;
    if (config.use_adam) {
        m.assign(showcase.pixels.size(), 0.0);
        v.assign(showcase.pixels.size(), 0.0);
    }
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kAdamEps = 1e-8;

    for (int t = 1; t <= config.steps; ++t) {
        Image grad = promptguard_gradient(showcase, res.image, gb, gc, config.alpha, config.beta);
        if (config.use_adam) {
            double bc1 = 1.0 - std::pow(kBeta1, t);
            double bc2 = 1.0 - std::pow(kBeta2, t);
            for (size_t i = 0; i < grad.pixels.size(); ++i) {
                double g = grad.pixels[i];
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
                double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
                res.image.pixels[i] -= step * update;
            }
        } else {
            for (size_t i = 0; i < grad.pixels.size(); ++i) {
                double g = grad.pixels[i];
                double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
                res.image.pixels[i] -= step * sign;
            }
        }
        project(res.image);
        res.objective_trace.push_back(promptguard_objective(showcase, res.image, encoder_b,
                                                            encoder_c, config.alpha, config.beta));
    }
    res.final_objective = res.objective_trace.back();
    return res;
}

// Dispatcher used by the CLI. PromptGuard needs the two encoders; the
// others ignore them.
inline Image apply_defense(const Image& input, const DefenseConfig& config,
                           const ImageEncoder* encoder_b = nullptr,
                           const ImageEncoder* encoder_c = nullptr) {
    switch (config.kind) {
        case DefenseKind::RandomNoise: return defend_random_noise(input, config);
        case DefenseKind::Puzzle: return defend_puzzle(input, config);
        case DefenseKind::Watermark: return defend_watermark(input, config);
        case DefenseKind::PromptGuard: {
            if (!encoder_b || !encoder_c) {
                throw ArgumentError("promptguard needs two image encoders");
            }
            return promptguard(input, *encoder_b, *encoder_c, config).image;
        }
    }
    throw ArgumentError("apply_defense: unhandled defense kind");
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_DEFENSES_HPP
