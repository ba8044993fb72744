#include "prefforge/eval/tokenize.hpp"

namespace prefforge::eval {

namespace {

bool ascii_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

// Byte length of the UTF-8 sequence starting at text[pos], or 1 if invalid.
std::size_t sequence_length(std::string_view text, std::size_t pos) {
    const auto lead = static_cast<unsigned char>(text[pos]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead <= 0xF4) len = 4;
    else if (lead >= 0xE0) len = lead <= 0xEF ? 3 : 1;
    else if (lead >= 0xC2) len = 2;
    if (pos + len > text.size()) return 1;
    for (std::size_t i = 1; i < len; ++i) {
        if ((static_cast<unsigned char>(text[pos + i]) & 0xC0) != 0x80) return 1;
    }
    return len;
}

bool unicode_space(std::string_view cp) {
    if (cp.size() == 1) return ascii_space(static_cast<unsigned char>(cp[0]));
    // no-break space, ideographic space
    return cp == "\xC2\xA0" || cp == "\xE3\x80\x80";
}

}  // namespace

std::string_view tokenizer_name(Tokenizer tokenizer) {
    return tokenizer == Tokenizer::whitespace ? "whitespace" : "unicode_char";
}

std::optional<Tokenizer> tokenizer_from_name(std::string_view name) {
    if (name == "whitespace") return Tokenizer::whitespace;
    if (name == "unicode_char") return Tokenizer::unicode_char;
    return std::nullopt;
}

TokenizedText tokenize(std::string_view text, Tokenizer tokenizer) {
    TokenizedText out{{}, tokenizer};
    if (tokenizer == Tokenizer::whitespace) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            while (pos < text.size() && ascii_space(static_cast<unsigned char>(text[pos]))) ++pos;
            const auto start = pos;
            while (pos < text.size() && !ascii_space(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos > start) out.tokens.emplace_back(text.substr(start, pos - start));
        }
        return out;
    }
    for (std::size_t pos = 0; pos < text.size();) {
        const auto len = sequence_length(text, pos);
        const auto cp = text.substr(pos, len);
        if (!unicode_space(cp)) out.tokens.emplace_back(cp);
        pos += len;
    }
    return out;
}

}  // namespace prefforge::eval
