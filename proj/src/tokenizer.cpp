#include "assistrag/tokenizer.hpp"

#include <cstdint>

namespace assistrag {

namespace {

bool is_unicode_space(std::uint32_t cp) {
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0:
    case 0x1680:
    case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 codepoint at `pos`; advances `pos` past it. Invalid
// sequences are consumed one byte at a time and reported as that byte value.
std::uint32_t decode_utf8(std::string_view text, std::size_t& pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    std::size_t need = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { need = 1; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { need = 2; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { need = 3; cp = b0 & 0x07; }
    else { ++pos; return b0; }
    for (std::size_t i = 1; i <= need; ++i) {
        if (pos + i >= text.size() || (byte(pos + i) & 0xC0) != 0x80) { ++pos; return b0; }
        cp = (cp << 6) | (byte(pos + i) & 0x3F);
    }
    pos += need + 1;
    return cp;
}

} // namespace

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    std::size_t token_start = 0;
    bool in_token = false;
    while (pos < text.size()) {
        std::size_t cp_start = pos;
        std::uint32_t cp = decode_utf8(text, pos);
        if (is_unicode_space(cp)) {
            if (in_token) {
                tokens.emplace_back(text.substr(token_start, cp_start - token_start));
                in_token = false;
            }
        } else if (!in_token) {
            token_start = cp_start;
            in_token = true;
        }
    }
    if (in_token) {
        tokens.emplace_back(text.substr(token_start));
    }
    return tokens;
}

const Tokenizer& default_tokenizer() {
    static const WhitespaceTokenizer tokenizer;
    return tokenizer;
}

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.count(text);
}

} // namespace assistrag
