#include "prefforge/dpo/text_dataset.hpp"

#include <algorithm>
#include <map>

namespace prefforge::dpo {

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < text.size()) {
        pos = text.find_first_not_of(" \t\r\n\f\v", pos);
        if (pos == std::string_view::npos) break;
        auto end = text.find_first_of(" \t\r\n\f\v", pos);
        if (end == std::string_view::npos) end = text.size();
        words.emplace_back(text.substr(pos, end - pos));
        pos = end;
    }
    return words;
}

Vocab build_text_vocab(const std::vector<data::DpoTriple>& triples, std::size_t max_size) {
    if (max_size < 3) throw std::invalid_argument("vocab cap must leave room for at least one word");
    std::map<std::string, std::size_t> counts;
    for (const auto& t : triples) {
        for (const auto* text : {&t.prompt, &t.chosen, &t.rejected}) {
            for (auto& w : split_whitespace(*text)) {
                if (w != kUnk && w != kEos && w != kBos) ++counts[w];
            }
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size - 2) ranked.resize(max_size - 2);

    std::vector<std::string> symbols;
    for (auto& [word, count] : ranked) symbols.push_back(word);
    symbols.emplace_back(kUnk);
    symbols.emplace_back(kEos);
    return Vocab(std::move(symbols));
}

TokenSeq encode(const Vocab& vocab, std::string_view text) {
    const Token unk = vocab.index(kUnk);
    TokenSeq out;
    for (const auto& w : split_whitespace(text)) out.push_back(vocab.contains(w) ? vocab.index(w) : unk);
    return out;
}

TextDataset build_text_dataset(const std::vector<data::DpoTriple>& triples, std::size_t max_vocab) {
    TextDataset dataset{build_text_vocab(triples, max_vocab), {}, 0};
    const Token eos = dataset.vocab.index(kEos);
    for (const auto& t : triples) {
        PreferenceInstance inst{encode(dataset.vocab, t.prompt), encode(dataset.vocab, t.chosen),
                                encode(dataset.vocab, t.rejected)};
        inst.chosen.push_back(eos);
        inst.rejected.push_back(eos);
        if (inst.chosen == inst.rejected) {
            ++dataset.dropped;
            continue;
        }
        dataset.instances.push_back(std::move(inst));
    }
    return dataset;
}

}  // namespace prefforge::dpo
