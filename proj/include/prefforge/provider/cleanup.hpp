#pragma once

#include "prefforge/provider/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prefforge::provider {

struct CleanupOptions {
    // Passages shorter than this (in code points, after stripping) are dropped.
    std::size_t min_chars = 40;
    // Cap on the merged text, separators included, in code points.
    std::size_t max_chars = 8000;
    // Passages with a backend score below this are dropped.
    std::optional<double> min_score;
    std::string separator = "\n---\n";
};

std::size_t utf8_length(std::string_view text);

// First `count` UTF-8 code points of `text`.
std::string utf8_prefix(std::string_view text, std::size_t count);

// Removes HTML tags, decodes common entities, drops numeric citation markers
// like "[3]" and normalises whitespace. Applied to a fixpoint, so
// strip_markup(strip_markup(x)) == strip_markup(x).
std::string strip_markup(std::string_view text);

// Key used for deduplication: ASCII-lowercased, whitespace collapsed.
std::string normalize_for_dedup(std::string_view text);

// Strips, filters by length, deduplicates and truncates so the merged text
// fits max_chars. Idempotent.
std::vector<std::string> cleanup_passages(std::span<const std::string> passages, const CleanupOptions& options);

std::string merge_passages(std::span<const std::string> passages, const CleanupOptions& options);

// Applies score filtering and cleanup, then merges.
RetrievalResult assemble_retrieval(const std::string& query, std::span<const RetrievedPassage> raw,
                                   const CleanupOptions& options);

}  // namespace prefforge::provider
