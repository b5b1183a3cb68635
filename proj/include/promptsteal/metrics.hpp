#ifndef PROMPTSTEAL_METRICS_HPP
#define PROMPTSTEAL_METRICS_HPP

#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/image.hpp"

namespace promptsteal {

inline constexpr double kDefaultAsrThreshold = 0.8;

// Image-side fidelity: cosine of the two image embeddings.
inline double image_semantic_similarity(const ImageEncoder& enc, const Image& generated,
                                        const Image& showcase) {
    return cosine_similarity(enc.encode_image(generated), enc.encode_image(showcase));
}

// Perceptual distance between generated and showcase (lower is better).
inline double perceptual_similarity(const PerceptualMetric& metric, const Image& generated,
                                    const Image& showcase) {
    if (!generated.same_shape(showcase)) {
        throw ArgumentError("perceptual_similarity: image shape mismatch");
    }
    return metric.distance(generated, showcase);
}

// Sentence-level similarity between two prompt strings.
inline double prompt_similarity(const SentenceEncoder& enc, std::string_view a,
                                std::string_view b) {
    if (trim(a).empty() || trim(b).empty()) {
        throw ArgumentError("prompt_similarity: empty prompt");
    }
    return cosine_similarity(enc.encode_sentence(a), enc.encode_sentence(b));
}

// Fraction of attacks whose prompt similarity strictly exceeds the
// threshold. A score exactly at the threshold does not count.
inline double attack_success_rate(std::span<const double> similarities,
                                  double threshold = kDefaultAsrThreshold) {
    if (similarities.empty()) {
        throw ArgumentError("attack_success_rate: no similarity scores");
    }
    size_t wins = 0;
    for (double s : similarities) {
        if (s > threshold) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(similarities.size());
}

struct MetricsReport {
    double image_similarity = 0.0;   // embedding cosine, generated vs showcase
    double perceptual_distance = 0.0;  // lower is closer
    double prompt_sbert = 0.0;       // sentence similarity, stolen vs ground truth
    double asr_threshold = kDefaultAsrThreshold;
    bool success = false;            // prompt_sbert > asr_threshold
};

inline MetricsReport make_metrics_report(const BackendBundle& bundle, const Image& generated,
                                         const Image& showcase, std::string_view stolen_prompt,
                                         std::string_view ground_truth_prompt,
                                         double asr_threshold = kDefaultAsrThreshold) {
    MetricsReport r;
    r.image_similarity = image_semantic_similarity(*bundle.image_encoder, generated, showcase);
    r.perceptual_distance = perceptual_similarity(*bundle.perceptual, generated, showcase);
    r.prompt_sbert = prompt_similarity(*bundle.sentence_encoder, stolen_prompt,
                                       ground_truth_prompt);
    r.asr_threshold = asr_threshold;
    r.success = r.prompt_sbert > asr_threshold;
    return r;
}

inline nlohmann::json metrics_report_to_json(const MetricsReport& r) {
    return {{"image_similarity", r.image_similarity},
            {"perceptual_distance", r.perceptual_distance},
            {"prompt_sbert", r.prompt_sbert},
            {"asr_threshold", r.asr_threshold},
            {"success", r.success}};
}

inline MetricsReport metrics_report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.image_similarity = j.at("image_similarity").get<double>();
    r.perceptual_distance = j.at("perceptual_distance").get<double>();
    r.prompt_sbert = j.at("prompt_sbert").get<double>();
    r.asr_threshold = j.at("asr_threshold").get<double>();
    r.success = j.at("success").get<bool>();
    return r;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_METRICS_HPP
