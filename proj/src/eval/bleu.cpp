#include "prefforge/eval/bleu.hpp"

#include "prefforge/eval/rouge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prefforge::eval {

std::size_t closest_reference_length(std::size_t candidate_length, const std::vector<TokenizedText>& refs) {
    std::size_t best = refs.front().tokens.size();
    auto distance = [&](std::size_t len) {
        return len > candidate_length ? len - candidate_length : candidate_length - len;
    };
    for (const auto& ref : refs) {
        const auto len = ref.tokens.size();
        if (distance(len) < distance(best) || (distance(len) == distance(best) && len < best)) best = len;
    }
    return best;
}

double bleu(const TokenizedText& candidate, const std::vector<TokenizedText>& refs, BleuOptions options) {
    if (refs.empty()) throw std::invalid_argument("bleu needs at least one reference");
    if (options.max_n == 0) throw std::invalid_argument("bleu needs max_n >= 1");
    for (const auto& ref : refs) {
        if (ref.tokenizer != candidate.tokenizer) throw std::domain_error("tokenizer mismatch");
    }
    const auto c = candidate.tokens.size();
    if (c == 0) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= options.max_n; ++n) {
        const auto cand = ngram_counts(candidate.tokens, n);
        NgramCounts max_ref;
        for (const auto& ref : refs) {
            for (const auto& [gram, count] : ngram_counts(ref.tokens, n)) {
                auto& slot = max_ref[gram];
                slot = std::max(slot, count);
            }
        }
        std::size_t clipped = 0;
        for (const auto& [gram, count] : cand) {
            if (auto it = max_ref.find(gram); it != max_ref.end()) clipped += std::min(count, it->second);
        }
        std::size_t total = c >= n ? c - n + 1 : 0;
        if (options.smooth && n >= 2) {
            ++clipped;
            ++total;
        }
        if (clipped == 0 || total == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    const auto r = closest_reference_length(c, refs);
    const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(r) / static_cast<double>(c)));
    return bp * std::exp(log_sum / static_cast<double>(options.max_n));
}

}  // namespace prefforge::eval
