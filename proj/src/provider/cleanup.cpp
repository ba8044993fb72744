#include "prefforge/provider/cleanup.hpp"

#include <regex>
#include <unordered_set>

namespace prefforge::provider {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string normalize_whitespace(std::string_view text) {
    // Collapse horizontal runs, trim each line, allow at most one blank line.
    std::string out;
    out.reserve(text.size());
    std::size_t newlines = 0;
    bool pending_space = false;
    for (char c : text) {
        if (c == '\r') continue;
        if (c == '\n') {
            pending_space = false;
            ++newlines;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
            pending_space = true;
            continue;
        }
        if (!out.empty()) {
            if (newlines > 0) {
                out.append(newlines >= 2 ? "\n\n" : "\n");
            } else if (pending_space) {
                out.push_back(' ');
            }
        }
        newlines = 0;
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string strip_once(std::string_view input) {
    static const std::regex comment(R"(<!--[\s\S]*?-->)");
    static const std::regex tag(R"(</?[A-Za-z][^<>]*>)");
    static const std::regex citation(R"(\[\d{1,3}\])");
    std::string text(input);
    text = std::regex_replace(text, comment, " ");
    text = std::regex_replace(text, tag, " ");
    text = std::regex_replace(text, citation, "");
    text = replace_all(std::move(text), "&nbsp;", " ");
    text = replace_all(std::move(text), "&lt;", "<");
    text = replace_all(std::move(text), "&gt;", ">");
    text = replace_all(std::move(text), "&quot;", "\"");
    text = replace_all(std::move(text), "&#39;", "'");
    text = replace_all(std::move(text), "&apos;", "'");
    text = replace_all(std::move(text), "&amp;", "&");
    return normalize_whitespace(text);
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
    std::size_t count = 0;
    for (unsigned char c : text) {
        if (!is_continuation(c)) ++count;
    }
    return count;
}

std::string utf8_prefix(std::string_view text, std::size_t count) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_continuation(static_cast<unsigned char>(text[i]))) {
            if (seen == count) return std::string(text.substr(0, i));
            ++seen;
        }
    }
    return std::string(text);
}

std::string strip_markup(std::string_view text) {
    // Every step that changes the text shortens it, so this terminates.
    std::string current = strip_once(text);
    for (;;) {
        std::string next = strip_once(current);
        if (next == current) return current;
        current = std::move(next);
    }
}

std::string normalize_for_dedup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool space = false;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

std::vector<std::string> cleanup_passages(std::span<const std::string> passages, const CleanupOptions& options) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    const std::size_t separator_len = utf8_length(options.separator);
    std::size_t total = 0;

    auto acceptable = [&](const std::string& text) {
        return !text.empty() && utf8_length(text) >= options.min_chars && !seen.contains(normalize_for_dedup(text));
    };

    for (const auto& passage : passages) {
        std::string text = strip_markup(passage);
        if (!acceptable(text)) continue;
        const std::size_t extra = out.empty() ? 0 : separator_len;
        const std::size_t length = utf8_length(text);
        if (total + extra + length <= options.max_chars) {
            seen.insert(normalize_for_dedup(text));
            out.push_back(std::move(text));
            total += extra + length;
            continue;
        }
        const std::size_t room = options.max_chars > total + extra ? options.max_chars - total - extra : 0;
        std::string truncated = strip_markup(utf8_prefix(text, room));
        if (acceptable(truncated)) out.push_back(std::move(truncated));
        break;
    }
    return out;
}

std::string merge_passages(std::span<const std::string> passages, const CleanupOptions& options) {
    std::string merged;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i > 0) merged += options.separator;
        merged += passages[i];
    }
    return merged;
}

RetrievalResult assemble_retrieval(const std::string& query, std::span<const RetrievedPassage> raw,
                                   const CleanupOptions& options) {
    std::vector<std::string> texts;
    texts.reserve(raw.size());
    for (const auto& passage : raw) {
        if (options.min_score && passage.score && *passage.score < *options.min_score) continue;
        texts.push_back(passage.text);
    }
    RetrievalResult result;
    result.query = query;
    result.passages = cleanup_passages(texts, options);
    result.merged = merge_passages(result.passages, options);
    result.empty = result.passages.empty();
    return result;
}

}  // namespace prefforge::provider
