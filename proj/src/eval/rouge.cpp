#include "prefforge/eval/rouge.hpp"

#include <algorithm>
#include <stdexcept>

namespace prefforge::eval {

namespace {

void check_same_tokenizer(const TokenizedText& a, const TokenizedText& b) {
    if (a.tokenizer != b.tokenizer) {
        throw std::domain_error("tokenizer mismatch: " + std::string(tokenizer_name(a.tokenizer)) + " vs " +
                                std::string(tokenizer_name(b.tokenizer)));
    }
}

}  // namespace

PrfScore PrfScore::from_counts(std::size_t matches, std::size_t candidate_total, std::size_t reference_total) {
    if (candidate_total == 0 || reference_total == 0) return {};
    PrfScore s;
    s.precision = static_cast<double>(matches) / static_cast<double>(candidate_total);
    s.recall = static_cast<double>(matches) / static_cast<double>(reference_total);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    NgramCounts counts;
    if (n == 0 || tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

PrfScore rouge_n(const TokenizedText& candidate, const TokenizedText& reference, std::size_t n) {
    if (n == 0) throw std::domain_error("rouge_n needs n >= 1");
    check_same_tokenizer(candidate, reference);
    const auto cand = ngram_counts(candidate.tokens, n);
    const auto ref = ngram_counts(reference.tokens, n);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
    }
    const auto cand_total = candidate.tokens.size() >= n ? candidate.tokens.size() - n + 1 : 0;
    const auto ref_total = reference.tokens.size() >= n ? reference.tokens.size() - n + 1 : 0;
    return PrfScore::from_counts(overlap, cand_total, ref_total);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

PrfScore rouge_l(const TokenizedText& candidate, const TokenizedText& reference) {
    check_same_tokenizer(candidate, reference);
    return PrfScore::from_counts(lcs_length(candidate.tokens, reference.tokens), candidate.tokens.size(),
                                 reference.tokens.size());
}

}  // namespace prefforge::eval
