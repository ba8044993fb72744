#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prefforge::dpo {

using Token = std::size_t;
using TokenSeq = std::vector<Token>;

inline constexpr std::string_view kBos = "<bos>";
inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kUnk = "<unk>";

// Next-token symbols of a toy policy. Indices 0..size()-1 are the columns of
// the logit table. BOS is never emitted, so it only exists as the extra row
// index bos(); EOS and UNK, when used, are ordinary symbols.
class Vocab {
public:
    explicit Vocab(std::vector<std::string> symbols);

    // Symbols "t0" .. "t<n-1>".
    static Vocab numbered(std::size_t n);

    std::size_t size() const { return symbols_.size(); }
    Token bos() const { return symbols_.size(); }

    const std::string& symbol(Token token) const;
    bool contains(std::string_view symbol) const;
    // Throws std::domain_error for unknown symbols.
    Token index(std::string_view symbol) const;

    const std::vector<std::string>& symbols() const { return symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, Token> index_;
};

// Throws std::domain_error if any token is not a column of a vocab of size `v`.
void check_tokens(const TokenSeq& tokens, std::size_t v, std::string_view what);

}  // namespace prefforge::dpo
