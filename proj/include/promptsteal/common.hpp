#ifndef PROMPTSTEAL_COMMON_HPP
#define PROMPTSTEAL_COMMON_HPP

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace promptsteal {

// Error taxonomy. Callers catch by category; the CLI maps categories to
// exit codes (usage vs. stage failure).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Raised when a text has no known words (or a vector is identically zero),
// so cosine similarity would be undefined.
class ZeroEmbeddingError : public NumericError {
public:
    using NumericError::NumericError;
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string caption)
        : Error(message), caption_(std::move(caption)) {}
    const std::string& caption() const { return caption_; }

private:
    std::string caption_;
};

class CapabilityError : public Error {
public:
    using Error::Error;
};

class QueryError : public Error {
public:
    using Error::Error;
};

// A pipeline error annotated with the stage it came from.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

inline std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

// ASCII case-fold; the toolkit's vocabulary handling is ASCII-oriented.
inline std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Collapse internal whitespace runs to single spaces and trim the ends.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            if (!in_space && !out.empty()) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// Word tokens for encoding: maximal alphanumeric runs, apostrophes and
// hyphens kept when interior. Punctuation is dropped, case is folded.
inline std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
    for (size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if ((c == '\'' || c == '-') && !cur.empty() && i + 1 < text.size() &&
                   is_word_char(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back(static_cast<char>(c));
        } else {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_COMMON_HPP
