#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::eval {

enum class Tokenizer { whitespace, unicode_char };

std::string_view tokenizer_name(Tokenizer tokenizer);
std::optional<Tokenizer> tokenizer_from_name(std::string_view name);

struct TokenizedText {
    std::vector<std::string> tokens;
    Tokenizer tokenizer = Tokenizer::whitespace;

    bool operator==(const TokenizedText&) const = default;
};

// whitespace: maximal runs of non-space characters.
// unicode_char: every code point that is not whitespace, so CJK text is
// scored per character. Invalid UTF-8 bytes become one token each.
TokenizedText tokenize(std::string_view text, Tokenizer tokenizer);

}  // namespace prefforge::eval
