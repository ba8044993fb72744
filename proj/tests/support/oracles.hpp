#pragma once

// Slow, obviously-correct reference implementations used to check the
// library. They share no code with it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline bool same_gram(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        if (a[i + k] != b[j + k]) return false;
    }
    return true;
}

inline std::size_t gram_total(const Tokens& t, std::size_t n) { return t.size() >= n ? t.size() - n + 1 : 0; }

// Occurrences of the n-gram starting at a[i] inside `hay`, by linear scan.
inline std::size_t occurrences(const Tokens& a, std::size_t i, const Tokens& hay, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < gram_total(hay, n); ++j) count += same_gram(a, i, hay, j, n) ? 1 : 0;
    return count;
}

// Sum over distinct candidate n-grams of min(count in cand, count in ref).
inline std::size_t clipped_overlap(const Tokens& cand, const Tokens& ref, std::size_t n) {
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < gram_total(cand, n); ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (same_gram(cand, i, cand, j, n)) first = false;
        }
        if (first) overlap += std::min(occurrences(cand, i, cand, n), occurrences(cand, i, ref, n));
    }
    return overlap;
}

// Clipping against several references uses the largest count in any one.
inline std::size_t clipped_overlap_multi(const Tokens& cand, const std::vector<Tokens>& refs, std::size_t n) {
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < gram_total(cand, n); ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (same_gram(cand, i, cand, j, n)) first = false;
        }
        if (!first) continue;
        std::size_t best = 0;
        for (const auto& ref : refs) best = std::max(best, occurrences(cand, i, ref, n));
        overlap += std::min(occurrences(cand, i, cand, n), best);
    }
    return overlap;
}

struct Prf {
    double p = 0, r = 0, f = 0;
};

inline Prf prf(std::size_t match, std::size_t cand_total, std::size_t ref_total) {
    if (cand_total == 0 || ref_total == 0) return {};
    Prf s;
    s.p = static_cast<double>(match) / static_cast<double>(cand_total);
    s.r = static_cast<double>(match) / static_cast<double>(ref_total);
    s.f = s.p + s.r == 0.0 ? 0.0 : 2.0 * s.p * s.r / (s.p + s.r);
    return s;
}

inline Prf rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
    return prf(clipped_overlap(cand, ref, n), gram_total(cand, n), gram_total(ref, n));
}

inline bool is_subsequence(const Tokens& sub, const Tokens& of) {
    std::size_t k = 0;
    for (const auto& t : of) {
        if (k < sub.size() && sub[k] == t) ++k;
    }
    return k == sub.size();
}

// Longest common subsequence by trying every subsequence of `a`.
inline std::size_t lcs_exhaustive(const Tokens& a, const Tokens& b) {
    std::size_t best = 0;
    const std::size_t limit = std::size_t{1} << a.size();
    for (std::size_t mask = 0; mask < limit; ++mask) {
        Tokens sub;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
        }
        if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
    }
    return best;
}

inline Prf rouge_l(const Tokens& cand, const Tokens& ref) {
    return prf(lcs_exhaustive(cand, ref), cand.size(), ref.size());
}

inline double bleu(const Tokens& cand, const std::vector<Tokens>& refs, std::size_t max_n = 4, bool smooth = false) {
    if (cand.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::size_t match = clipped_overlap_multi(cand, refs, n);
        std::size_t total = gram_total(cand, n);
        if (smooth && n >= 2) {
            match += 1;
            total += 1;
        }
        if (match == 0 || total == 0) return 0.0;
        log_sum += std::log(static_cast<double>(match) / static_cast<double>(total));
    }
    // Closest reference length, shorter one on ties.
    std::size_t r = refs[0].size();
    for (const auto& ref : refs) {
        const auto d_new = ref.size() > cand.size() ? ref.size() - cand.size() : cand.size() - ref.size();
        const auto d_old = r > cand.size() ? r - cand.size() : cand.size() - r;
        if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
    }
    const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(r) / static_cast<double>(cand.size())));
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace oracle
