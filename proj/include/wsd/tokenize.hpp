#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "wsd/porter.hpp"

namespace wsd {

struct Token {
    std::string surface;  // lowercased
    std::string stem;     // Porter stem for alphabetic tokens, surface otherwise
    int sentence = 0;

    bool operator==(const Token&) const = default;
};

struct TokenStream {
    std::vector<Token> tokens;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
    const Token& operator[](std::size_t i) const { return tokens[i]; }

    bool operator==(const TokenStream&) const = default;
};

// Identifies the tokenization rules a dataset was indexed under; stored in the
// dataset manifest so feature files and annotation spans stay aligned.
inline constexpr const char* kTokenizerFingerprint =
    "alnum-runs.lowercase.porter.sentences=.?!+ws+upper.v1";

// Token = maximal run of ASCII letters/digits. Sentence boundary = one of .?!
// followed by whitespace and then an uppercase letter, judged on the raw text.
inline TokenStream tokenize(std::string_view text) {
    TokenStream out;
    PorterStemmer stemmer;
    int sentence = 0;
    bool sentence_has_tokens = false;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c)) {
            std::size_t start = i;
            bool all_alpha = true;
            while (i < n && std::isalnum(static_cast<unsigned char>(text[i]))) {
                if (!std::isalpha(static_cast<unsigned char>(text[i]))) all_alpha = false;
                ++i;
            }
            Token t;
            t.surface.reserve(i - start);
            for (std::size_t p = start; p < i; ++p)
                t.surface.push_back(
                    static_cast<char>(std::tolower(static_cast<unsigned char>(text[p]))));
            t.stem = all_alpha ? stemmer.stem(t.surface) : t.surface;
            t.sentence = sentence;
            out.tokens.push_back(std::move(t));
            sentence_has_tokens = true;
            continue;
        }
        if ((c == '.' || c == '?' || c == '!') && sentence_has_tokens) {
            std::size_t p = i + 1;
            std::size_t ws = 0;
            while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) {
                ++ws;
                ++p;
            }
            if (ws > 0 && p < n && std::isupper(static_cast<unsigned char>(text[p]))) {
                ++sentence;
                sentence_has_tokens = false;
            }
        }
        ++i;
    }
    return out;
}

// Citation text is the title and abstract joined by a newline.
inline std::string citation_text(std::string_view title, std::string_view abstract) {
    std::string text;
    text.reserve(title.size() + 1 + abstract.size());
    text.append(title);
    if (!title.empty() && !abstract.empty()) text.push_back('\n');
    text.append(abstract);
    return text;
}

}  // namespace wsd
