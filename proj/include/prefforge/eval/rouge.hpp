#pragma once

#include "prefforge/eval/tokenize.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace prefforge::eval {

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    // From a match count and the two totals; any zero total gives all zeros.
    static PrfScore from_counts(std::size_t matches, std::size_t candidate_total, std::size_t reference_total);

    bool operator==(const PrfScore&) const = default;
};

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n);

// Clipped n-gram overlap. Throws std::domain_error when n is 0 or the two
// texts were tokenized differently.
PrfScore rouge_n(const TokenizedText& candidate, const TokenizedText& reference, std::size_t n);

// Longest-common-subsequence variant with a plain harmonic-mean F.
PrfScore rouge_l(const TokenizedText& candidate, const TokenizedText& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace prefforge::eval
