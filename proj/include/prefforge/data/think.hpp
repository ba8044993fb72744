#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prefforge::data {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

// Raised by wrap_think/split_think. offset() is the byte offset in the input
// where the problem was detected.
class ThinkFormatError : public std::runtime_error {
public:
    ThinkFormatError(std::string reason, std::size_t offset);

    const std::string& reason() const { return reason_; }
    std::size_t offset() const { return offset_; }

private:
    std::string reason_;
    std::size_t offset_;
};

struct ThinkParts {
    std::string reasoning;
    std::string answer;

    bool operator==(const ThinkParts&) const = default;
};

/// Embeds a reasoning trace in a think block followed by the answer:
/// "<think>\n{reasoning}\n</think>\n\n{answer}". The answer must be non-empty.
std::string wrap_think(std::string_view reasoning, std::string_view answer);

/// Inverse of wrap_think. Accepts exactly one think block, optionally preceded
/// by whitespace, followed by a non-empty answer. The newline padding that
/// wrap_think inserts is removed when present, so inputs written by other
/// tools (e.g. "<think>x</think>y") also parse.
ThinkParts split_think(std::string_view text);

}  // namespace prefforge::data
