#ifndef PROMPTSTEAL_PROMPT_HPP
#define PROMPTSTEAL_PROMPT_HPP

#include <string>
#include <string_view>
#include <vector>

#include "promptsteal/common.hpp"
#include "promptsteal/modifier.hpp"

namespace promptsteal {

// Separator used whenever modifiers are appended to a prompt.
inline constexpr std::string_view kPromptSeparator = ", ";

// A structured prompt: subject first, then accepted dynamic modifiers, then
// accepted static modifiers. render() flattens it to the comma-joined form
// generators expect.
struct Prompt {
    std::string subject;
    std::vector<ModifierCandidate> dynamic_accepted;
    std::vector<ModifierCandidate> static_accepted;

    std::string render() const {
        std::string out = subject;
        for (const auto& m : dynamic_accepted) {
            out += kPromptSeparator;
            out += m.text;
        }
        for (const auto& m : static_accepted) {
            out += kPromptSeparator;
            out += m.text;
        }
        return out;
    }

    std::vector<const ModifierCandidate*> all_modifiers() const {
        std::vector<const ModifierCandidate*> out;
        out.reserve(dynamic_accepted.size() + static_accepted.size());
        for (const auto& m : dynamic_accepted) out.push_back(&m);
        for (const auto& m : static_accepted) out.push_back(&m);
        return out;
    }

    bool has_modifier(std::string_view text) const {
        std::string key = fold_case(normalize_whitespace(text));
        for (const auto* m : all_modifiers()) {
            if (fold_case(m->text) == key) return true;
        }
        return false;
    }

    void add(ModifierCandidate m) {
        if (is_dynamic(m.kind)) {
            dynamic_accepted.push_back(std::move(m));
        } else {
            static_accepted.push_back(std::move(m));
        }
    }

    // Split a flat comma-joined prompt: first segment is the subject, the
    // rest become modifiers. Their original kinds are not recoverable from
    // flat text, so the caller picks one (static by default).
    static Prompt parse_flat(std::string_view flat, ModifierKind kind = ModifierKind::Static) {
        Prompt p;
        std::vector<std::string> parts;
        std::string cur;
        for (char c : flat) {
            if (c == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        parts.push_back(cur);
        bool have_subject = false;
        for (std::string& part : parts) {
            std::string seg = normalize_whitespace(part);
            if (seg.empty()) continue;
            if (!have_subject) {
                p.subject = seg;
                have_subject = true;
            } else {
                p.add({seg, kind, "parsed"});
            }
        }
        if (!have_subject) {
            throw ArgumentError("parse_flat: prompt has no subject segment");
        }
        return p;
    }
};

}  // namespace promptsteal

#endif  // PROMPTSTEAL_PROMPT_HPP
