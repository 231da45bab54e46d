#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace assistrag {

// Pluggable tokenizer used for chunking and token accounting.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    // Splits text into tokens. Deterministic; never throws.
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

    std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

// Default tokenizer: maximal runs of non-whitespace, where whitespace is the
// Unicode whitespace set decoded from UTF-8. Malformed bytes are kept as
// token content.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override;
};

// Process-wide default (whitespace) tokenizer.
const Tokenizer& default_tokenizer();

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer = default_tokenizer());

} // namespace assistrag
