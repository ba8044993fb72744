#include "prefforge/data/think.hpp"

namespace prefforge::data {

ThinkFormatError::ThinkFormatError(std::string reason, std::size_t offset)
    : std::runtime_error(reason + " (at offset " + std::to_string(offset) + ")"),
      reason_(std::move(reason)),
      offset_(offset) {}

std::string wrap_think(std::string_view reasoning, std::string_view answer) {
    if (answer.empty()) throw ThinkFormatError("empty answer", 0);
    std::string out;
    out.reserve(reasoning.size() + answer.size() + 24);
    out.append(kThinkOpen).append("\n");
    out.append(reasoning);
    out.append("\n").append(kThinkClose).append("\n\n");
    out.append(answer);
    return out;
}

ThinkParts split_think(std::string_view text) {
    const auto open = text.find(kThinkOpen);
    if (open == std::string_view::npos) {
        const auto stray = text.find(kThinkClose);
        if (stray != std::string_view::npos) throw ThinkFormatError("closing tag without opening tag", stray);
        throw ThinkFormatError("missing think block", 0);
    }
    for (std::size_t i = 0; i < open; ++i) {
        const char c = text[i];
        if (c != ' ' && c != '\n' && c != '\t' && c != '\r') {
            throw ThinkFormatError("text before think block", i);
        }
    }

    const auto body_begin = open + kThinkOpen.size();
    const auto close = text.find(kThinkClose, body_begin);
    const auto reopen = text.find(kThinkOpen, body_begin);
    if (reopen != std::string_view::npos && (close == std::string_view::npos || reopen < close)) {
        throw ThinkFormatError("nested think block", reopen);
    }
    if (close == std::string_view::npos) throw ThinkFormatError("unterminated think block", open);

    const auto rest_begin = close + kThinkClose.size();
    if (auto again = text.find(kThinkOpen, rest_begin); again != std::string_view::npos) {
        throw ThinkFormatError("multiple think blocks", again);
    }
    if (auto again = text.find(kThinkClose, rest_begin); again != std::string_view::npos) {
        throw ThinkFormatError("closing tag without opening tag", again);
    }

    std::string_view body = text.substr(body_begin, close - body_begin);
    if (body.starts_with('\n')) body.remove_prefix(1);
    if (body.ends_with('\n')) body.remove_suffix(1);

    std::string_view answer = text.substr(rest_begin);
    if (answer.starts_with("\n\n")) {
        answer.remove_prefix(2);
    } else if (answer.starts_with('\n')) {
        answer.remove_prefix(1);
    }
    if (answer.empty()) throw ThinkFormatError("empty answer", rest_begin);

    return {std::string(body), std::string(answer)};
}

}  // namespace prefforge::data
