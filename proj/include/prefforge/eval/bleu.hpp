#pragma once

#include "prefforge/eval/tokenize.hpp"

#include <cstddef>
#include <vector>

namespace prefforge::eval {

struct BleuOptions {
    std::size_t max_n = 4;
    // Add one to numerator and denominator of every precision with n >= 2.
    bool smooth = false;
};

// Closest reference length to `candidate_length`; ties go to the shorter one.
std::size_t closest_reference_length(std::size_t candidate_length, const std::vector<TokenizedText>& refs);

// Uniform-weight geometric mean of clipped 1..max_n-gram precisions times
// the brevity penalty exp(min(0, 1 - r/c)). An empty candidate scores 0.
// Throws std::invalid_argument for an empty reference set and
// std::domain_error on tokenizer mismatch.
double bleu(const TokenizedText& candidate, const std::vector<TokenizedText>& refs, BleuOptions options = {});

}  // namespace prefforge::eval
