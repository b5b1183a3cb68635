#ifndef PROMPTSTEAL_MODIFIER_HPP
#define PROMPTSTEAL_MODIFIER_HPP

#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "promptsteal/common.hpp"

namespace promptsteal {

enum class ModifierKind {
    Static,              // from a curated style/quality list
    DynamicSubjectDetail,  // noun chunk mined from captions
    DynamicPosition,       // prepositional phrase mined from captions
};

inline const char* to_string(ModifierKind k) {
    switch (k) {
        case ModifierKind::Static: return "static";
        case ModifierKind::DynamicSubjectDetail: return "dynamic_subject_detail";
        case ModifierKind::DynamicPosition: return "dynamic_position";
    }
    return "?";
}

inline ModifierKind modifier_kind_from_string(std::string_view s) {
    if (s == "static") return ModifierKind::Static;
    if (s == "dynamic_subject_detail") return ModifierKind::DynamicSubjectDetail;
    if (s == "dynamic_position") return ModifierKind::DynamicPosition;
    throw ArgumentError("unknown modifier kind: " + std::string(s));
}

inline bool is_dynamic(ModifierKind k) { return k != ModifierKind::Static; }

struct ModifierCandidate {
    std::string text;
    ModifierKind kind = ModifierKind::Static;
    std::string source;  // provenance, e.g. "caption:12" or "static_pool"

    bool operator==(const ModifierCandidate& o) const {
        return text == o.text && kind == o.kind && source == o.source;
    }
};

// Ordered, case-insensitively deduplicated candidate collection. Insertion
// order is preserved; the first spelling of a duplicate wins.
class ModifierPool {
public:
    // Returns false when the candidate was already present.
    bool insert(ModifierCandidate candidate) {
        candidate.text = normalize_whitespace(candidate.text);
        if (candidate.text.empty()) {
            throw ArgumentError("modifier pool: blank candidate text");
        }
        std::string key = fold_case(candidate.text);
        if (!seen_.insert(key).second) return false;
        items_.push_back(std::move(candidate));
        return true;
    }

    bool contains(std::string_view text) const {
        return seen_.count(fold_case(normalize_whitespace(text))) > 0;
    }

    size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const ModifierCandidate& operator[](size_t i) const { return items_[i]; }
    const std::vector<ModifierCandidate>& items() const { return items_; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<ModifierCandidate> items_;
    std::unordered_set<std::string> seen_;
};

}  // namespace promptsteal

#endif  // PROMPTSTEAL_MODIFIER_HPP
